"""Regenerate the bundled maps in src/ttplan/maps/.

    python tools/make_maps.py [--search]

The layouts are fixed; ``--search`` prints the route costs of the map1 rough-zone
detour scenario under the light and heavy settings.
"""

import argparse
import math
from pathlib import Path

import networkx as nx
import numpy as np

from ttplan.topomap import RoughnessZone, TopologyMap, format_map

OUT = Path(__file__).resolve().parent.parent / "src" / "ttplan" / "maps"
SPACING = 0.3


def _bidirectional(pairs):
    edges = []
    for u, v in pairs:
        edges.append((u, v))
        edges.append((v, u))
    return edges


def _zone_in_box(coords, edges, name, factor, box):
    x0, y0, x1, y1 = box

    def inside(n):
        x, y = coords[n]
        return x0 - 1e-9 <= x <= x1 + 1e-9 and y0 - 1e-9 <= y <= y1 + 1e-9

    members = frozenset(e for e, (u, v) in enumerate(edges) if inside(u) and inside(v))
    return RoughnessZone(name, members, factor)


def winding_layout():
    """Six rack aisles; the lower three are joined at both ends, the upper
    ones wind back and forth with a couple of cross gaps."""
    rows, cols = 6, 8
    dy = 0.2
    coords = [(round(c * SPACING, 3), round(r * dy, 3)) for r in range(rows) for c in range(cols)]
    nid = lambda r, c: r * cols + c
    pairs = []
    for r in range(rows):
        for c in range(cols - 1):
            pairs.append((nid(r, c), nid(r, c + 1)))
    for r in range(rows - 1):
        if r < 2:
            ends = (0, cols - 1)
        else:
            ends = (cols - 1,) if r % 2 == 0 else (0,)
        for c in ends:
            pairs.append((nid(r, c), nid(r + 1, c)))
        if r >= 2:
            gap = 3 if r % 2 == 0 else 4
            pairs.append((nid(r, gap), nid(r + 1, gap)))
    return coords, _bidirectional(pairs)


def random_racks_layout(seed=7):
    """7x7 aisle grid with racks dropped on random cells."""
    rng = np.random.default_rng(seed)
    n = 7
    while True:
        blocked = set(map(tuple, rng.choice(n, size=(11, 2))))
        cells = [(r, c) for r in range(n) for c in range(n) if (r, c) not in blocked]
        index = {cell: i for i, cell in enumerate(cells)}
        g = nx.Graph()
        g.add_nodes_from(range(len(cells)))
        pairs = []
        for (r, c), i in index.items():
            for dr, dc in ((0, 1), (1, 0)):
                j = index.get((r + dr, c + dc))
                if j is not None:
                    pairs.append((i, j))
                    g.add_edge(i, j)
        if nx.is_connected(g) and 20 <= len(cells) <= 60:
            break
    jitter = rng.uniform(-0.04, 0.04, size=(len(cells), 2))
    coords = [
        (round(c * SPACING + jx, 3), round(r * SPACING + jy, 3))
        for (r, c), (jx, jy) in zip(cells, jitter)
    ]
    return coords, _bidirectional(pairs)


def hub_layout():
    """Central hub with eight spokes and two connecting rings."""
    coords = [(0.0, 0.0)]
    radii = (0.3, 0.6, 0.9, 1.2)
    ids = {}
    for s in range(8):
        a = 2 * math.pi * s / 8
        for ri, r in enumerate(radii):
            ids[(s, ri)] = len(coords)
            coords.append((round(r * math.cos(a), 4), round(r * math.sin(a), 4)))
    pairs = []
    for s in range(8):
        pairs.append((0, ids[(s, 0)]))
        for ri in range(len(radii) - 1):
            pairs.append((ids[(s, ri)], ids[(s, ri + 1)]))
        for ri in (0, 2, 3):
            pairs.append((ids[(s, ri)], ids[((s + 1) % 8, ri)]))
    return coords, _bidirectional(pairs)


def _graph(coords, edges, factors):
    g = nx.DiGraph()
    for e, (u, v) in enumerate(edges):
        length = math.dist(coords[u], coords[v])
        g.add_edge(u, v, w=length * factors.get(e, 1.0), e=e)
    return g


def _path_edges(g, path):
    return [g[u][v]["e"] for u, v in zip(path, path[1:])]


def check_winding(coords, edges, scenario):
    """Route costs (nominal units) for the rough-zone detour scenario."""
    s, d = scenario["source"], scenario["dest"]
    mod = _zone_in_box(coords, edges, "moderate", 1.5, scenario["moderate"]).edges
    light = _zone_in_box(coords, edges, "light", 1.0, scenario["light"]).edges
    out = {}
    for label, fl in (("plain", None), ("light", 1.2), ("heavy", 2.0)):
        factors = {} if fl is None else {**{e: 1.5 for e in mod}, **{e: fl for e in light}}
        g = _graph(coords, edges, factors)
        p = nx.dijkstra_path(g, s, d, weight="w")
        pe = set(_path_edges(g, p))
        out[label] = (p, nx.path_weight(g, p, "w"), len(pe & mod), len(pe & light))
    return out


HEAVY = 2.0
MAP1_ROUGH = (-0.05, -0.05, 1.25, 0.65)
MAP2_ROUGH = (0.25, 0.55, 1.25, 1.85)
MAP3_ROUGH = (-0.85, -0.85, 0.85, 0.85)

# Source 0 and dest 7 are the two ends of the bottom aisle.
WINDING_SCENARIO = dict(source=0, dest=7, moderate=(0.0, 0.0, 2.1, 0.0), light=(0.6, 0.2, 1.5, 0.2))


def build():
    coords, edges = winding_layout()
    sc = WINDING_SCENARIO
    map1 = TopologyMap(
        coords,
        edges,
        (
            _zone_in_box(coords, edges, "rough", HEAVY, MAP1_ROUGH),
            _zone_in_box(coords, edges, "aisle_a", 1.0, sc["moderate"]),
            _zone_in_box(coords, edges, "aisle_b", 1.0, sc["light"]),
        ),
        "map1",
    )
    coords, edges = random_racks_layout()
    map2 = TopologyMap(coords, edges, (_zone_in_box(coords, edges, "rough", HEAVY, MAP2_ROUGH),), "map2")
    coords, edges = hub_layout()
    map3 = TopologyMap(coords, edges, (_zone_in_box(coords, edges, "rough", HEAVY, MAP3_ROUGH),), "map3")
    return map1, map2, map3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--search", action="store_true")
    args = ap.parse_args()
    if args.search:
        coords, edges = winding_layout()
        for label, row in check_winding(coords, edges, WINDING_SCENARIO).items():
            print(label, row)
        return
    OUT.mkdir(parents=True, exist_ok=True)
    for topo in build():
        (OUT / f"{topo.name}.map").write_text(format_map(topo))
        print(topo.name, topo.node_count, "nodes", topo.edge_count, "edges",
              {z.name: len(z.edges) for z in topo.zones})


if __name__ == "__main__":
    main()
