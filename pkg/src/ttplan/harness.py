"""Experiment orchestration.

Experiment 1 compares heuristic paths (H) with paths planned on scalar
filter estimates fed from an offline observation table (R). Experiment 2
compares H with paths planned on bilinear filter estimates learnt online
from the robot's own traversals (D), over several plan bundle sizes and
window lengths.

Every mode of a comparison drives its own world built from the same seed
through the same source/destination schedule.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kf_dynamic, kf_static
from .kf_dynamic import BilinearParams, DynamicFilterBank
from .kf_static import StaticFilterBank
from .planner import (
    K_MODES,
    DynamicKFCost,
    HeuristicCost,
    StaticKFCost,
    execute_path,
    shortest_path,
)
from .topomap import BUILTIN_MAPS, builtin_map, euclidean_cost, load_map
from .worldsim import SimWorld, WorldParams, build_offline_table

log = logging.getLogger(__name__)

SCORES = ("executed", "estimated")
RUN_FIELDS = [
    "run_id", "experiment", "map", "mode", "bundle", "regression_no", "plan",
    "source", "dest", "path", "planned_cost", "executed_cost", "score", "recharges",
]
SUMMARY_FIELDS = [
    "experiment", "map", "bundle", "regression_no", "mode", "n", "mean", "std", "saving_pct",
]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    maps: list = field(default_factory=lambda: list(BUILTIN_MAPS))
    n_plans: int = 100
    bundles: list = field(default_factory=lambda: [20, 40, 60, 80])
    regression_nos: list = field(default_factory=lambda: list(range(2, 10)))
    seed: int = 0
    pairs: list = None
    min_hops: int = 3
    world: dict = field(default_factory=dict)
    zone_factors: dict = field(default_factory=dict)
    zone_overrides: list = field(default_factory=list)
    recharge_every: int = 10
    k_mode: str = "per_edge"
    score: str = "executed"
    static: dict = field(default_factory=dict)
    dynamic: dict = field(default_factory=dict)
    drawn: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.n_plans < 1:
            raise ConfigError("n_plans must be >= 1")
        if any(b < 1 for b in self.bundles):
            raise ConfigError("bundle sizes must be >= 1")
        if any(r < 1 for r in self.regression_nos):
            raise ConfigError("regression_no must be >= 1")
        if self.k_mode not in K_MODES:
            raise ConfigError(f"k_mode must be one of {K_MODES}")
        if self.score not in SCORES:
            raise ConfigError(f"score must be one of {SCORES}")
        if self.recharge_every < 1:
            raise ConfigError("recharge_every must be >= 1")
        if self.pairs is not None:
            for s, d in self.pairs:
                if s == d:
                    raise ConfigError(f"scheduled pair has source == dest ({s})")
        for item in self.zone_overrides:
            if len(item) != 3:
                raise ConfigError(f"zone override must be [plan_index, zone, factor], got {item}")
        try:
            WorldParams(**self.world)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad world parameters: {exc}") from None
        unknown = set(self.static) - {"p0", "sigma2_omega", "sigma2_eta"}
        if unknown:
            raise ConfigError(f"unknown static filter options {sorted(unknown)}")
        unknown = set(self.dynamic) - set(DYNAMIC_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown dynamic filter options {sorted(unknown)}")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


DYNAMIC_DEFAULTS = {
    "phi": kf_dynamic.DEFAULT_PHI,
    "coef_mean": kf_dynamic.DEFAULT_COEF_MEAN,
    "coef_std": kf_dynamic.DEFAULT_COEF_STD,
    "xi_mean": kf_dynamic.DEFAULT_XI_MEAN,
    "xi_std": kf_dynamic.DEFAULT_XI_STD,
    "q_std": kf_dynamic.DEFAULT_Q_STD,
    "r_std": kf_dynamic.DEFAULT_R_STD,
    "x_var": kf_dynamic.DEFAULT_X_VAR,
    "stochastic_xi": False,
    "share_reverse": True,
}


@dataclass
class RunSummary:
    cells: list = field(default_factory=list)

    def cell(self, **match):
        found = [c for c in self.cells if all(c[k] == v for k, v in match.items())]
        if len(found) != 1:
            raise KeyError(f"{len(found)} cells match {match}")
        return found[0]

    def saving(self, **match):
        return self.cell(**match)["saving_pct"]

    def merge(self, other):
        return RunSummary(self.cells + other.cells)


def resolve_map(name):
    if name in BUILTIN_MAPS:
        return builtin_map(name)
    return load_map(name)


def _seeds(seed):
    """Independent child seeds: schedule, world, offline table, coefficients."""
    children = np.random.SeedSequence(seed).spawn(4)
    return [int(c.generate_state(1)[0]) for c in children]


def schedule(topo, n, seed, min_hops=3, pairs=None):
    """``n`` (source, dest) pairs at least ``min_hops`` apart, drawn uniformly."""
    if pairs is not None:
        if len(pairs) < n:
            raise ConfigError(f"schedule has {len(pairs)} pairs, {n} needed")
        return [tuple(p) for p in pairs[:n]]
    rng = np.random.default_rng(_seeds(seed)[0])
    hops = [topo.hop_distances(s) for s in range(topo.node_count)]
    candidates = [
        (s, d) for s in range(topo.node_count) for d, h in hops[s].items() if h >= min_hops
    ]
    if not candidates:
        raise ConfigError(f"no node pairs are {min_hops} hops apart")
    idx = rng.integers(len(candidates), size=n)
    return [candidates[i] for i in idx]


def make_world(topo, config):
    world = SimWorld(topo, WorldParams(**config.world), seed=_seeds(config.seed)[1])
    for zone, factor in config.zone_factors.items():
        world.set_zone_factor(zone, factor)
    return world


def bilinear_params(config, regression_no):
    """Model coefficients for one window length; drawn from the seed unless pinned in ``drawn``."""
    opts = {**DYNAMIC_DEFAULTS, **config.dynamic}
    extra = dict(xi_mean=opts["xi_mean"], xi_std=opts["xi_std"], q_std=opts["q_std"],
                 r_std=opts["r_std"])
    pinned = config.drawn.get(str(regression_no))
    if pinned is not None:
        return BilinearParams(regression_no, np.full(regression_no, float(opts["phi"])),
                              pinned["b"], pinned["c"], **extra)
    rng = np.random.default_rng([_seeds(config.seed)[3], regression_no])
    return BilinearParams.draw(regression_no, rng, phi=opts["phi"], coef_mean=opts["coef_mean"],
                               coef_std=opts["coef_std"], **extra)


def make_provider(mode, topo, world, config, regression_no=None, table=None):
    speed = world.params.nominal_speed
    heuristic = [euclidean_cost(topo, e, speed) for e in range(topo.edge_count)]
    if mode == "heuristic":
        return HeuristicCost(topo, speed)
    if mode == "static_kf":
        bank = StaticFilterBank(table, heuristic, **config.static)
        return StaticKFCost(topo, bank, counts=world.counts, k_mode=config.k_mode)
    if mode == "dynamic_kf":
        opts = {**DYNAMIC_DEFAULTS, **config.dynamic}
        params = bilinear_params(config, regression_no)
        rng = None
        if opts["stochastic_xi"]:
            rng = np.random.default_rng([_seeds(config.seed)[3], regression_no, 1])
        bank = DynamicFilterBank(params, heuristic, x_var=opts["x_var"], rng=rng)
        return DynamicKFCost(topo, bank, world=world, speed=speed,
                             share_reverse=bool(opts["share_reverse"]))
    raise ConfigError(f"unknown mode {mode!r}")


def offline_table(topo, config, max_k):
    world = SimWorld(topo, WorldParams(**config.world), seed=_seeds(config.seed)[2])
    for zone, factor in config.zone_factors.items():
        world.set_zone_factor(zone, factor)
    return build_offline_table(world, max_k)


def table_size(topo, config, n_plans):
    # an edge appears at most once in a simple path, so per-edge k <= n_plans + 1
    return n_plans + 1 if config.k_mode == "per_edge" else topo.node_count


def run_plans(topo, config, pairs, provider, world, tag):
    """Plan and drive every pair in order; return one record per plan."""
    overrides = {}
    for plan_index, zone, factor in config.zone_overrides:
        overrides.setdefault(int(plan_index), []).append((zone, float(factor)))
    records = []
    for i, (s, d) in enumerate(pairs):
        if i and i % config.recharge_every == 0:
            world.recharge()
        for zone, factor in overrides.get(i, ()):
            world.set_zone_factor(zone, factor)
        path = shortest_path(topo, s, d, provider)
        before = len(world.log)
        path = execute_path(world, path, recharge=True)
        if config.score == "executed":
            score = path.executed_cost
        else:
            score = sum(r.observed_time for r in world.log[before:])
        records.append({
            **tag,
            "mode": provider.mode,
            "plan": i,
            "source": s,
            "dest": d,
            "path": "-".join(str(n) for n in path.nodes(topo)),
            "planned_cost": path.planned_cost,
            "executed_cost": path.executed_cost,
            "score": score,
            "recharges": path.recharges,
        })
    return records


def _cell(records, experiment, map_name, bundle, regression_no, mode, baseline=None):
    scores = [r["score"] for r in records]
    mean = statistics.fmean(scores)
    std = statistics.pstdev(scores) if len(scores) > 1 else 0.0
    if baseline is None:
        baseline = mean
    return {
        "experiment": experiment,
        "map": map_name,
        "bundle": bundle,
        "regression_no": regression_no,
        "mode": mode,
        "n": len(scores),
        "mean": mean,
        "std": std,
        "saving_pct": 100.0 * (baseline - mean) / baseline,
    }


def run_experiment1(config):
    """Heuristic versus statically estimated paths, ``n_plans`` per map.

    Returns ``(summary, records)``.
    """
    summary = RunSummary()
    records = []
    for map_name in config.maps:
        topo = resolve_map(map_name)
        pairs = schedule(topo, config.n_plans, config.seed, config.min_hops, config.pairs)
        table = offline_table(topo, config, table_size(topo, config, config.n_plans))
        by_mode = {}
        for mode in ("heuristic", "static_kf"):
            world = make_world(topo, config)
            provider = make_provider(mode, topo, world, config, table=table)
            tag = {"run_id": f"exp1-{topo.name}-{mode}", "experiment": "exp1", "map": topo.name,
                   "bundle": config.n_plans, "regression_no": ""}
            by_mode[mode] = run_plans(topo, config, pairs, provider, world, tag)
            if mode == "static_kf" and provider.bank.clipped:
                log.warning("%s: %d table lookups beyond max_k", topo.name, provider.bank.clipped)
            records.extend(by_mode[mode])
        base = _cell(by_mode["heuristic"], "exp1", topo.name, config.n_plans, "", "heuristic")
        summary.cells.append(base)
        summary.cells.append(_cell(by_mode["static_kf"], "exp1", topo.name, config.n_plans, "",
                                   "static_kf", base["mean"]))
    return summary, records


def run_experiment2(config):
    """Heuristic versus dynamically estimated paths.

    One cell per (map, bundle size, regression_no); each cell starts from a
    fresh world and fresh filters so observations accrue only from the
    cell's own plans. The heuristic baseline does not depend on
    regression_no and is run once per bundle.
    """
    summary = RunSummary()
    records = []
    for map_name in config.maps:
        topo = resolve_map(map_name)
        all_pairs = schedule(topo, max(config.bundles), config.seed, config.min_hops, config.pairs)
        for bundle in config.bundles:
            pairs = all_pairs[:bundle]
            world = make_world(topo, config)
            tag = {"run_id": f"exp2-{topo.name}-heuristic-b{bundle}", "experiment": "exp2",
                   "map": topo.name, "bundle": bundle, "regression_no": ""}
            base_records = run_plans(topo, config, pairs, make_provider("heuristic", topo, world, config),
                                     world, tag)
            records.extend(base_records)
            base = _cell(base_records, "exp2", topo.name, bundle, "", "heuristic")
            summary.cells.append(base)
            for reg in config.regression_nos:
                world = make_world(topo, config)
                provider = make_provider("dynamic_kf", topo, world, config, regression_no=reg)
                tag = {"run_id": f"exp2-{topo.name}-dynamic_kf-b{bundle}-r{reg}",
                       "experiment": "exp2", "map": topo.name, "bundle": bundle,
                       "regression_no": reg}
                recs = run_plans(topo, config, pairs, provider, world, tag)
                records.extend(recs)
                summary.cells.append(_cell(recs, "exp2", topo.name, bundle, reg, "dynamic_kf",
                                           base["mean"]))
    return summary, records


def resolved_config(config, experiment):
    """Copy of ``config`` with every random coefficient pinned, for echoing."""
    d = config.to_dict()
    if experiment == "exp2":
        d["drawn"] = {
            str(r): {"b": p.b.tolist(), "c": p.c.tolist()}
            for r in config.regression_nos
            for p in [bilinear_params(config, r)]
        }
    return ExperimentConfig.from_dict(d)


def _fmt(value):
    return repr(value) if isinstance(value, float) else value


def emit_csv(summary, records, out_dir, config=None):
    """Write ``runs.csv``, ``summary.csv`` and, with a config, ``config.echo``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "runs.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=RUN_FIELDS)
            w.writeheader()
            for r in records:
                w.writerow({k: _fmt(r[k]) for k in RUN_FIELDS})
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
            w.writeheader()
            for c in summary.cells:
                w.writerow({k: _fmt(c[k]) for k in SUMMARY_FIELDS})
        if config is not None:
            config.dump(out / "config.echo")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return [out / "runs.csv", out / "summary.csv"] + ([out / "config.echo"] if config else [])


def read_runs(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
