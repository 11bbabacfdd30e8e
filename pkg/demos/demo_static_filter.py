"""
Static estimation from an offline table
=======================================

Each directed edge gets a scalar random-walk Kalman filter. The offline
table holds ``Y(edge, k)``, the observed time of the k-th traversal of an
edge driven repeatedly from full charge.
"""

from ttplan import kf_static as kf
from ttplan.topomap import builtin_map, euclidean_cost
from ttplan.worldsim import SimWorld, build_offline_table

###############################################################################
# One hand-computed step: prior 10 s with variance 1, process noise 0.5,
# observation noise 1, observation 12 s.

state = kf.init(10.0, 1.0, 0.5, 1.0)
print("gain", kf.gain(state), "->", kf.update(state, 12.0))

###############################################################################
# On a real table the filter starts from the heuristic cost and is pulled
# towards the rough edge's true travel time within a few traversals.

topo = builtin_map("map2")
table = build_offline_table(SimWorld(topo, seed=3), 30)
edge = min(topo.zone("rough").edges)
bank = kf.StaticFilterBank(table, [euclidean_cost(topo, e) for e in range(topo.edge_count)])
print(f"edge {topo.edges[edge]} heuristic {euclidean_cost(topo, edge):.2f} s")
for k in (1, 2, 3, 5, 10, 20, 30):
    print(f"  k={k:2d}  Y={table.lookup(edge, k)[0]:6.2f}  estimate={bank.estimate(edge, k):6.2f}")
