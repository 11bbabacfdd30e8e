"""
Travel time under battery drain and rough floors
================================================

The simulator multiplies the nominal travel time of an edge by the floor
roughness and by a battery factor that is flat over most of the charge and
rises sharply near empty.
"""

import numpy as np

from ttplan.topomap import builtin_map
from ttplan.worldsim import BatteryExhausted, SimWorld, battery_factor, traverse

for soc in (1.0, 0.8, 0.5, 0.2, 0.1, 0.05):
    print(f"soc {soc:4.2f}: battery factor {battery_factor(soc):.3f}")

###############################################################################
# Drive one smooth and one rough edge of map1 back and forth until the
# battery runs out, and watch the observed times.

topo = builtin_map("map1")
rough = min(topo.zone("rough").edges)
smooth = next(e for e in range(topo.edge_count) if topo.roughness(e) == 1.0)

for label, edge in (("smooth", smooth), ("rough", rough)):
    world = SimWorld(topo, seed=1)
    times = []
    while True:
        try:
            times.append(traverse(world, edge).observed_time)
        except BatteryExhausted:
            break
    times = np.array(times)
    q = len(times) // 4
    print(f"{label} edge {topo.edges[edge]}: {len(times)} traversals, "
          f"first quarter mean {times[:q].mean():.2f} s, last quarter mean {times[-q:].mean():.2f} s, "
          f"final {times[-1]:.2f} s")
