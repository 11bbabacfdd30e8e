"""Seeded ground-truth simulator of edge travel times.

Travel time of an edge is its nominal time (length over nominal speed)
inflated by the floor roughness of the zone it lies in and by a battery
factor that grows as the state of charge drops::

    battery_factor(soc) = 1 + alpha * (1 - soc) + beta * max(0, knee - soc) ** 2

The factor is flat-ish over the mid-charge plateau and shoots up once the
charge falls below ``knee``.
"""

from __future__ import annotations

import copy
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .topomap import NOMINAL_SPEED

LIGHT, MODERATE, HEAVY = 1.2, 1.5, 2.0


class BatteryExhausted(RuntimeError):
    """The battery cannot power the requested traversal."""


@dataclass(frozen=True)
class WorldParams:
    nominal_speed: float = NOMINAL_SPEED
    discharge_per_meter: float = 0.03
    noise_std: float = 0.2
    process_noise_std: float = 0.0
    alpha: float = 0.1
    beta: float = 40.0
    soc_knee: float = 0.15

    def __post_init__(self):
        if self.nominal_speed <= 0:
            raise ValueError("nominal_speed must be positive")
        for name in ("discharge_per_meter", "noise_std", "process_noise_std", "alpha", "beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0.0 <= self.soc_knee <= 1.0:
            raise ValueError("soc_knee must lie in [0, 1]")


def battery_factor(soc, alpha=0.1, beta=40.0, knee=0.15):
    return 1.0 + alpha * (1.0 - soc) + beta * max(0.0, knee - soc) ** 2


@dataclass(frozen=True)
class ObservationRecord:
    edge: int
    k: int
    m: int
    true_time: float
    observed_time: float
    soc: float


@dataclass
class SimWorld:
    """Mutable simulation state for one scenario.

    Two worlds built with the same map, parameters and seed produce
    identical logs when driven through the same traversal sequence.
    """

    topo: object
    params: WorldParams = field(default_factory=WorldParams)
    seed: int = 0
    soc: float = 1.0
    zone_factors: dict = field(default=None)
    log: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.soc <= 1.0:
            raise ValueError("soc must lie in [0, 1]")
        if self.zone_factors is None:
            self.zone_factors = self.topo.zone_factors()
        self.rng = np.random.default_rng(self.seed)
        self.counts = [0] * self.topo.edge_count
        self.latest = {}
        self._m = 0

    def clone(self):
        return copy.deepcopy(self)

    def roughness(self, edge):
        return self.topo.roughness(edge, self.zone_factors)

    def set_zone_factor(self, zone, factor):
        self.topo.zone(zone)
        if factor < 1.0:
            raise ValueError("roughness factor must be >= 1")
        self.zone_factors[zone] = float(factor)

    def recharge(self):
        self.soc = 1.0

    def begin_path(self):
        """Reset the in-path position counter."""
        self._m = 0

    def battery_factor(self, soc=None):
        p = self.params
        return battery_factor(self.soc if soc is None else soc, p.alpha, p.beta, p.soc_knee)

    def base_time(self, edge):
        return self.topo.edge_length(edge) / self.params.nominal_speed

    def discharge(self, edge):
        return self.params.discharge_per_meter * self.topo.edge_length(edge) * self.roughness(edge)


def ground_truth_time(world, edge, soc=None):
    """Noise-free travel time of ``edge`` at the world's (or the given) charge."""
    return world.base_time(edge) * world.roughness(edge) * world.battery_factor(soc)


def traverse(world, edge, path_position=None):
    """Drive one edge, log and return the observation.

    Raises
    ------
    BatteryExhausted
        If the traversal would drain the battery to zero or below. The
        world is left untouched.
    """
    drain = world.discharge(edge)
    if world.soc <= 0.0 or world.soc - drain <= 0.0:
        raise BatteryExhausted(f"soc {world.soc:.4f} cannot cover drain {drain:.4f}")
    p = world.params
    true_time = ground_truth_time(world, edge)
    if p.process_noise_std > 0:
        true_time = max(true_time + world.rng.normal(0.0, p.process_noise_std), 1e-3)
    noise = world.rng.normal(0.0, p.noise_std) if p.noise_std > 0 else 0.0
    world.counts[edge] += 1
    world._m = world._m + 1 if path_position is None else int(path_position)
    rec = ObservationRecord(
        edge=edge,
        k=world.counts[edge],
        m=world._m,
        true_time=true_time,
        observed_time=true_time + noise,
        soc=world.soc,
    )
    world.soc -= drain
    world.log.append(rec)
    world.latest[edge] = rec
    return rec


@dataclass
class ObservationTable:
    """Offline observations ``Y(edge, k)`` for k = 1..max_k."""

    topo: object
    values: np.ndarray  # shape (edge_count, max_k)

    @property
    def max_k(self):
        return self.values.shape[1]

    def lookup(self, edge, k):
        """Observation at traversal ``k``; returns (value, clipped) where
        ``clipped`` is set when ``k`` exceeded the table and the last row was used."""
        if k < 1:
            raise ValueError("k starts at 1")
        clipped = k > self.max_k
        return float(self.values[edge, min(k, self.max_k) - 1]), clipped

    def to_csv(self, path):
        """Write to a file path or an open text stream."""
        if hasattr(path, "write"):
            self._write(path)
            return
        with open(path, "w", newline="") as fh:
            self._write(fh)

    def _write(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge_from", "edge_to", "k", "observed_time"])
        for e, (u, v) in enumerate(self.topo.edges):
            for k in range(1, self.max_k + 1):
                w.writerow([u, v, k, repr(float(self.values[e, k - 1]))])

    @classmethod
    def from_csv(cls, topo, path):
        rows = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["edge_from", "edge_to", "k", "observed_time"]:
                raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
            for row in reader:
                e = topo.edge_index(int(row["edge_from"]), int(row["edge_to"]))
                rows[(e, int(row["k"]))] = float(row["observed_time"])
        max_k = max(k for _, k in rows)
        values = np.empty((topo.edge_count, max_k))
        for e in range(topo.edge_count):
            for k in range(1, max_k + 1):
                try:
                    values[e, k - 1] = rows[(e, k)]
                except KeyError:
                    raise ValueError(f"{path}: missing row for edge {e}, k={k}") from None
        return cls(topo, values)


def build_offline_table(world, max_k):
    """Record ``max_k`` consecutive traversals of every edge from full charge.

    Each edge gets its own discharge episode on a copy of ``world``; the
    battery is recharged whenever it runs out. Edges are processed in index
    order so the table is a deterministic function of the world's seed.
    """
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    topo = world.topo
    values = np.empty((topo.edge_count, max_k))
    sim = world.clone()
    for e in range(topo.edge_count):
        sim.recharge()
        for k in range(max_k):
            try:
                rec = traverse(sim, e)
            except BatteryExhausted:
                sim.recharge()
                rec = traverse(sim, e)
            values[e, k] = rec.observed_time
    return ObservationTable(topo, values)


def save_log(world, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge", "k", "m", "true_time", "observed_time", "soc"])
        for r in world.log:
            w.writerow([r.edge, r.k, r.m, repr(r.true_time), repr(r.observed_time), repr(r.soc)])
