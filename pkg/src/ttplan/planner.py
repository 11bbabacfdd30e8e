"""Dijkstra's algorithm with edge weights queried from a cost provider.

Weights are requested while the search explores the graph: when node
``u`` is extracted, every outgoing edge is costed with knowledge of the
tentative path that reached ``u`` (its depth ``k`` and the weights of the
edges on it). Each edge is queried at most once per search, so the
weights a search sees are consistent.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

from .kf_static import StaticFilterBank
from .kf_dynamic import DynamicFilterBank
from .topomap import NOMINAL_SPEED, euclidean_cost
from .worldsim import BatteryExhausted, traverse

MODES = ("heuristic", "static_kf", "dynamic_kf")
K_MODES = ("per_edge", "path_depth")


class NoPathError(RuntimeError):
    pass


class HeuristicCost:
    """Straight-line travel time; ignores k and the path so far."""

    mode = "heuristic"

    def __init__(self, topo, speed=NOMINAL_SPEED):
        self.topo = topo
        self.speed = speed

    def cost(self, edge, k=1, pW=0.0, chain=()):
        return euclidean_cost(self.topo, edge, self.speed)


class StaticKFCost:
    """Scalar-filter estimates fed from the offline table.

    With ``k_mode="per_edge"`` the filter step of an edge is its own
    traversal count plus one, read from ``counts`` (usually
    ``world.counts``). With ``k_mode="path_depth"`` the search depth is
    used instead.
    """

    mode = "static_kf"

    def __init__(self, topo, bank: StaticFilterBank, counts=None, k_mode="per_edge"):
        if k_mode not in K_MODES:
            raise ValueError(f"k_mode must be one of {K_MODES}")
        if k_mode == "per_edge" and counts is None:
            raise ValueError("per_edge k_mode needs traversal counts")
        self.topo = topo
        self.bank = bank
        self.counts = counts
        self.k_mode = k_mode

    def cost(self, edge, k=1, pW=0.0, chain=()):
        kk = self.counts[edge] + 1 if self.k_mode == "per_edge" else k
        return self.bank.estimate(edge, kk)


class DynamicKFCost:
    """Bilinear-filter estimates with the in-path window of previous costs.

    The latest logged observation of the edge is used as ``Y``. With
    ``share_reverse`` an edge never driven in its own direction borrows the
    latest observation of the opposite direction (same corridor floor). An
    edge with no observation at all costs its heuristic travel time; its
    filter starts with the first observation.
    """

    mode = "dynamic_kf"

    def __init__(self, topo, bank: DynamicFilterBank, world=None, speed=NOMINAL_SPEED,
                 share_reverse=True):
        self.topo = topo
        self.bank = bank
        self.world = world
        self.speed = speed
        self.share_reverse = share_reverse

    def observation(self, edge):
        if self.world is None:
            return None
        rec = self.world.latest.get(edge)
        if rec is None and self.share_reverse:
            rev = self.topo.reverse(edge)
            rec = None if rev is None else self.world.latest.get(rev)
        return None if rec is None else rec.observed_time

    def cost(self, edge, k=1, pW=0.0, chain=()):
        y = self.observation(edge)
        if y is None:
            return euclidean_cost(self.topo, edge, self.speed)
        # the source contributes X(0) = 0
        window = (0.0,) + tuple(chain)
        return self.bank.estimate(edge, window, y)


class FrozenCost:
    """Fixed weights, for testing and replay."""

    mode = "frozen"

    def __init__(self, weights):
        self.weights = weights

    def cost(self, edge, k=1, pW=0.0, chain=()):
        return self.weights[edge]


def provider_cost(provider, u, v, k, pW, chain=()):
    """Weight of edge ``u -> v`` at search depth ``k`` with predecessor weight ``pW``."""
    return provider.cost(provider.topo.edge_index(u, v), k=k, pW=pW, chain=chain)


@dataclass(frozen=True)
class PathResult:
    source: int
    dest: int
    mode: str
    edges: tuple
    planned: tuple
    executed: tuple = None
    exhausted: bool = False
    recharges: int = 0

    @property
    def planned_cost(self):
        return sum(self.planned)

    @property
    def executed_cost(self):
        return None if self.executed is None else sum(self.executed)

    @property
    def per_edge(self):
        executed = self.executed or ()
        return [
            (e, p, executed[i] if i < len(executed) else None)
            for i, (e, p) in enumerate(zip(self.edges, self.planned))
        ]

    def nodes(self, topo):
        if not self.edges:
            return [self.source]
        return [topo.edges[self.edges[0]][0]] + [topo.edges[e][1] for e in self.edges]


def shortest_path(topo, source, dest, provider):
    """Least-cost path from ``source`` to ``dest`` under ``provider``'s weights.

    Ties are broken towards the smaller node index, both when extracting
    from the queue and when relaxing (the first equal-cost predecessor is
    kept).
    """
    n = topo.node_count
    if not (0 <= source < n and 0 <= dest < n):
        raise ValueError(f"source/dest out of range 0..{n - 1}")
    if source == dest:
        raise ValueError("source and dest must differ")
    dist = [math.inf] * n
    pred = [None] * n
    done = [False] * n
    weight = {}
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        chain = _chain(topo, pred, weight, u)
        k = len(chain) + 1
        pw = chain[-1] if chain else 0.0
        for e in topo.out_edges(u):
            v = topo.edges[e][1]
            w = provider.cost(e, k=k, pW=pw, chain=chain)
            if not w > 0:
                raise ValueError(f"provider returned non-positive weight {w} for edge {e}")
            weight[e] = w
            if du + w < dist[v]:
                dist[v] = du + w
                pred[v] = e
                heapq.heappush(heap, (dist[v], v))
    if pred[dest] is None:
        raise NoPathError(f"no path from {source} to {dest}")
    edges = []
    node = dest
    while node != source:
        e = pred[node]
        edges.append(e)
        node = topo.edges[e][0]
    edges.reverse()
    return PathResult(
        source, dest, getattr(provider, "mode", "custom"), tuple(edges), tuple(weight[e] for e in edges)
    )


def _chain(topo, pred, weight, node):
    out = []
    while pred[node] is not None:
        e = pred[node]
        out.append(weight[e])
        node = topo.edges[e][0]
    out.reverse()
    return tuple(out)


def execute_path(world, path, recharge=False):
    """Drive ``path`` in ``world`` and fill in the true travel times.

    On battery exhaustion the battery is recharged and the edge retried when
    ``recharge`` is set; otherwise the partial result is returned with
    ``exhausted=True``.
    """
    world.begin_path()
    executed = []
    recharges = 0
    for m, e in enumerate(path.edges, start=1):
        try:
            rec = traverse(world, e, path_position=m)
        except BatteryExhausted:
            if not recharge:
                return replace(path, executed=tuple(executed), exhausted=True, recharges=recharges)
            world.recharge()
            recharges += 1
            rec = traverse(world, e, path_position=m)
        executed.append(rec.true_time)
    return replace(path, executed=tuple(executed), recharges=recharges)
