"""
The bundled floor maps
======================

Three desk-scale topological maps ship with the package: winding rack
aisles (``map1``), randomly placed racks (``map2``) and racks organised
around a hub (``map3``). Each has one heavily rough zone.
"""

from ttplan.topomap import BUILTIN_MAPS, builtin_map, euclidean_cost

for name in BUILTIN_MAPS:
    topo = builtin_map(name)
    zones = ", ".join(f"{z.name} x{z.factor} ({len(z.edges)} edges)" for z in topo.zones)
    print(f"{name}: {topo.node_count} nodes, {topo.edge_count} directed edges; zones: {zones}")

###############################################################################
# Corridors are stored as two directed edges. The heuristic cost of an edge
# is its length over the nominal speed of 0.1 m/s.

topo = builtin_map("map3")
hub = max(range(topo.node_count), key=topo.degree)
print(f"map3 hub is node {hub} with {topo.degree(hub)} neighbours")
for e in topo.out_edges(hub)[:3]:
    print(f"  edge {topo.edges[e]}: {topo.edge_length(e):.2f} m -> {euclidean_cost(topo, e):.1f} s")

###############################################################################
# Maps are plain text files with ``[nodes]``, ``[edges]`` and ``[zones]``
# sections, so a custom floor can be written by hand and loaded with
# ``load_map``.

from ttplan.topomap import format_map, parse_map

text = format_map(builtin_map("map1"))
print(text.splitlines()[:4])
assert parse_map(text, name="map1") == builtin_map("map1")
