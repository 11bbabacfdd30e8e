"""Topological floor maps.

A map is a set of nodes with planar coordinates (meters), directed edges
between them and named roughness zones. Corridors that can be driven both
ways are stored as two directed edges.

Map files are plain text with three sections::

    # comment
    [nodes]
    # id x y
    0 0.0 0.0
    1 0.3 0.0
    [edges]
    # from to
    0 1
    1 0
    [zones]
    # name factor edge-index ...
    dock 1.5 0 1

Node ids must be dense (0..n-1). Zones list edge *indices*, i.e. positions
in the ``[edges]`` section counted from zero. Blank lines and ``#`` comments
are ignored; any other extra column is a parse error.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

NOMINAL_SPEED = 0.1  # m/s, scaled robot
BUILTIN_MAPS = ("map1", "map2", "map3")


class MapFormatError(ValueError):
    """Raised when a map file cannot be parsed."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


class MapValidationError(ValueError):
    """Raised when a map violates a structural invariant."""


@dataclass(frozen=True)
class RoughnessZone:
    name: str
    edges: frozenset
    factor: float = 1.0


@dataclass(frozen=True)
class TopologyMap:
    """Immutable directed graph of the floor.

    Parameters
    ----------
    coords : tuple of (x, y)
        Node coordinates in meters; node ``i`` is ``coords[i]``.
    edges : tuple of (from, to)
        Directed edges. The position in this tuple is the edge index.
    zones : tuple of RoughnessZone
    name : str, optional
    """

    coords: tuple
    edges: tuple
    zones: tuple = ()
    name: str = ""
    _out: tuple = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple((float(x), float(y)) for x, y in self.coords))
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        object.__setattr__(
            self,
            "zones",
            tuple(
                RoughnessZone(z.name, frozenset(int(e) for e in z.edges), float(z.factor))
                for z in self.zones
            ),
        )
        self._validate()
        out = [[] for _ in self.coords]
        index = {}
        for e, (u, v) in enumerate(self.edges):
            out[u].append(e)
            index[(u, v)] = e
        # neighbours visited in increasing node order
        out = tuple(tuple(sorted(es, key=lambda e: self.edges[e][1])) for es in out)
        object.__setattr__(self, "_out", out)
        object.__setattr__(self, "_index", index)

    def _validate(self):
        n = len(self.coords)
        if n == 0:
            raise MapValidationError("map has no nodes")
        for x, y in self.coords:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise MapValidationError("node coordinates must be finite")
        seen = set()
        for e, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise MapValidationError(f"edge {e} ({u}->{v}) references an unknown node")
            if u == v:
                raise MapValidationError(f"edge {e} is a self-loop on node {u}")
            if (u, v) in seen:
                raise MapValidationError(f"duplicate edge {u}->{v}")
            seen.add((u, v))
            if self.coords[u] == self.coords[v]:
                raise MapValidationError(f"edge {e} ({u}->{v}) has zero length")
        names = set()
        for z in self.zones:
            if z.name in names:
                raise MapValidationError(f"duplicate zone name {z.name!r}")
            names.add(z.name)
            if not z.factor >= 1.0:
                raise MapValidationError(f"zone {z.name!r} has roughness factor {z.factor} < 1")
            bad = [e for e in z.edges if not 0 <= e < len(self.edges)]
            if bad:
                raise MapValidationError(f"zone {z.name!r} references unknown edges {sorted(bad)}")
        if not _weakly_connected(n, self.edges):
            raise MapValidationError("map is not connected")

    @property
    def node_count(self):
        return len(self.coords)

    @property
    def edge_count(self):
        return len(self.edges)

    def out_edges(self, node):
        """Indices of edges leaving ``node``, ordered by target node."""
        return self._out[node]

    def edge_index(self, u, v):
        return self._index[(u, v)]

    def has_edge(self, u, v):
        return (u, v) in self._index

    def reverse(self, edge):
        """Index of the opposite-direction edge, or None."""
        u, v = self.edges[edge]
        return self._index.get((v, u))

    def edge_length(self, edge):
        u, v = self.edges[edge]
        (x0, y0), (x1, y1) = self.coords[u], self.coords[v]
        return math.hypot(x1 - x0, y1 - y0)

    def zone(self, name):
        for z in self.zones:
            if z.name == name:
                return z
        raise KeyError(name)

    def zone_factors(self):
        return {z.name: z.factor for z in self.zones}

    def edge_zones(self, edge):
        return [z.name for z in self.zones if edge in z.edges]

    def roughness(self, edge, factors=None):
        """Roughness multiplier of an edge; the largest factor wins when zones overlap."""
        factors = self.zone_factors() if factors is None else factors
        r = 1.0
        for z in self.zones:
            if edge in z.edges:
                r = max(r, factors.get(z.name, z.factor))
        return r

    def with_zone_factors(self, **factors):
        zones = tuple(
            RoughnessZone(z.name, z.edges, factors.get(z.name, z.factor)) for z in self.zones
        )
        unknown = set(factors) - {z.name for z in self.zones}
        if unknown:
            raise KeyError(f"unknown zones {sorted(unknown)}")
        return TopologyMap(self.coords, self.edges, zones, self.name)

    def degree(self, node):
        """Number of distinct neighbours, ignoring direction."""
        nb = {v for u, v in self.edges if u == node} | {u for u, v in self.edges if v == node}
        return len(nb)

    def hop_distances(self, source):
        """Breadth-first hop counts along directed edges from ``source``."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for e in self._out[u]:
                v = self.edges[e][1]
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist


def _weakly_connected(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == n


def euclidean_cost(topo, edge, speed=NOMINAL_SPEED):
    """Heuristic travel time of an edge: straight-line length over nominal speed."""
    if speed <= 0:
        raise ValueError("speed must be positive")
    return topo.edge_length(edge) / speed


_SECTIONS = ("nodes", "edges", "zones")


def parse_map(text, name="", path=None):
    nodes = {}
    edges = []
    zones = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in _SECTIONS:
                raise MapFormatError(f"unknown section {line!r}", lineno, path)
            section = line[1:-1].strip()
            continue
        fields = line.split()
        try:
            if section == "nodes":
                if len(fields) != 3:
                    raise MapFormatError(
                        f"node line needs 3 fields (id x y), got {len(fields)}", lineno, path
                    )
                nid = int(fields[0])
                if nid in nodes:
                    raise MapFormatError(f"duplicate node id {nid}", lineno, path)
                nodes[nid] = (float(fields[1]), float(fields[2]))
            elif section == "edges":
                if len(fields) != 2:
                    raise MapFormatError(
                        f"edge line needs 2 fields (from to), got {len(fields)}", lineno, path
                    )
                edges.append((int(fields[0]), int(fields[1])))
            elif section == "zones":
                if len(fields) < 2:
                    raise MapFormatError("zone line needs name, factor and edge indices", lineno, path)
                zones.append(
                    RoughnessZone(fields[0], frozenset(int(f) for f in fields[2:]), float(fields[1]))
                )
            else:
                raise MapFormatError("data before any section header", lineno, path)
        except ValueError as exc:
            if isinstance(exc, MapFormatError):
                raise
            raise MapFormatError(f"bad number in {section} line: {exc}", lineno, path) from None
    if sorted(nodes) != list(range(len(nodes))):
        raise MapValidationError("node ids must be dense 0..n-1")
    coords = tuple(nodes[i] for i in range(len(nodes)))
    return TopologyMap(coords, tuple(edges), tuple(zones), name)


def load_map(path):
    """Read and validate a map file."""
    path = Path(path)
    return parse_map(path.read_text(), name=path.stem, path=path)


def format_map(topo):
    lines = []
    if topo.name:
        lines.append(f"# map {topo.name}")
    lines.append("[nodes]")
    for i, (x, y) in enumerate(topo.coords):
        lines.append(f"{i} {x!r} {y!r}")
    lines.append("[edges]")
    for u, v in topo.edges:
        lines.append(f"{u} {v}")
    lines.append("[zones]")
    for z in topo.zones:
        lines.append(" ".join([z.name, repr(z.factor)] + [str(e) for e in sorted(z.edges)]))
    return "\n".join(lines) + "\n"


def save_map(topo, path):
    Path(path).write_text(format_map(topo))


def builtin_map(which):
    """One of the bundled representative maps.

    ``map1`` has winding rack aisles, ``map2`` randomly placed racks and
    ``map3`` racks organised around a central hub.
    """
    if which not in BUILTIN_MAPS:
        raise ValueError(f"unknown builtin map {which!r}; choose from {BUILTIN_MAPS}")
    text = resources.files("ttplan.maps").joinpath(f"{which}.map").read_text()
    return parse_map(text, name=which)
