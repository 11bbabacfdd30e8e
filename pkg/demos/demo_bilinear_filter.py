"""
Dynamic estimation with the bilinear model
==========================================

The travel time of the m-th edge of a path depends on the previous
``regression_no`` travel times along that path through a bilinear model.
Its state vector holds a constant, a window of exploration terms and a
window of travel times.
"""

import numpy as np

from ttplan import kf_dynamic as kd

rng = np.random.default_rng(0)
params = kd.BilinearParams.draw(2, rng)
print("phi", params.phi, "b", params.b.round(3))
print("c", params.c.round(3).tolist())

###############################################################################
# The transition matrix is state dependent: its last row carries the
# running mean, the psi terms (which depend on the travel-time window) and
# the AR coefficients.

state = kd.with_window(params, kd.init_state(params, 6.0), [5.0, 7.0])
np.set_printoptions(precision=3, suppress=True)
print(kd.build_F(params, state))

###############################################################################
# Estimating an edge: until ``regression_no`` in-path travel times are
# known the running mean is returned; afterwards the filter predicts and
# corrects with the edge's latest observation.

state = kd.init_state(params, 6.0)
for window, y in [((), 6.4), ((5.0,), 6.1), ((5.0, 7.0), 6.3), ((5.0, 7.0), 6.2), ((4.0, 8.0), None)]:
    cost, state = kd.estimate_edge(params, state, y_obs=y, window=window)
    print(f"window {window!s:12} y={y!s:5} -> {cost:.3f} s (m={state.m})")
