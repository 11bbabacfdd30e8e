"""Scalar random-walk Kalman filter for per-edge travel times.

Model, with k counting traversals of one edge::

    X(k) = X(k-1) + w(k),   w ~ N(0, sigma2_omega)
    Y(k) = X(k) + v(k),     v ~ N(0, sigma2_eta)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

EPS_TIME = 1e-3  # s, lower clamp on estimates so edge weights stay positive

DEFAULT_SIGMA2_OMEGA = 0.04
DEFAULT_SIGMA2_ETA = 0.04
DEFAULT_P0 = 1.0


@dataclass(frozen=True)
class ScalarFilterState:
    x_hat: float
    p: float
    k: int
    sigma2_omega: float
    sigma2_eta: float
    degenerate: bool = False


def init(x0_mean, p0=DEFAULT_P0, sigma2_omega=DEFAULT_SIGMA2_OMEGA, sigma2_eta=DEFAULT_SIGMA2_ETA):
    """Filter state before any observation, ``X(0) = x0_mean`` with variance ``p0``."""
    if not x0_mean > 0:
        raise ValueError(f"x0_mean must be positive, got {x0_mean}")
    for name, value in (("p0", p0), ("sigma2_omega", sigma2_omega), ("sigma2_eta", sigma2_eta)):
        if not value >= 0:
            raise ValueError(f"{name} must be non-negative, got {value}")
    return ScalarFilterState(float(x0_mean), float(p0), 0, float(sigma2_omega), float(sigma2_eta))


def predict(state):
    """A-priori estimate and variance for the next traversal. Does not advance ``state``."""
    return state.x_hat, state.p + state.sigma2_omega


def gain(state):
    _, p_prior = predict(state)
    denom = p_prior + state.sigma2_eta
    return p_prior / denom if denom > 0 else math.nan


def update(state, y):
    """Correct the prediction with observation ``y`` and advance k by one.

    If both the prior variance and the observation noise are zero the gain
    is undefined; the estimate is kept and the returned state has
    ``degenerate=True``.
    """
    if not math.isfinite(y):
        raise ValueError(f"observation must be finite, got {y}")
    x_prior, p_prior = predict(state)
    denom = p_prior + state.sigma2_eta
    if denom == 0:
        return replace(state, k=state.k + 1, degenerate=True)
    k_gain = p_prior / denom
    x_new = x_prior + k_gain * (y - x_prior)
    p_new = p_prior - p_prior * p_prior / denom
    return replace(
        state, x_hat=max(x_new, EPS_TIME), p=max(p_new, 0.0), k=state.k + 1, degenerate=False
    )


class StaticFilterBank:
    """One scalar filter per directed edge, fed from an offline observation table.

    ``estimate(edge, k)`` returns the filtered travel time after the filter
    has consumed ``Y(edge, 1..k)``. Trajectories are memoised, so asking for
    a smaller ``k`` later returns the historic estimate rather than
    rewinding the filter.
    """

    def __init__(self, table, x0, p0=DEFAULT_P0, sigma2_omega=DEFAULT_SIGMA2_OMEGA,
                 sigma2_eta=DEFAULT_SIGMA2_ETA):
        self.table = table
        self.states = [[init(x, p0, sigma2_omega, sigma2_eta)] for x in x0]
        self.clipped = 0

    def estimate(self, edge, k):
        traj = self.states[edge]
        while len(traj) <= k:
            y, clipped = self.table.lookup(edge, len(traj))
            self.clipped += clipped
            traj.append(update(traj[-1], y))
        return traj[k].x_hat

    def current(self, edge):
        return self.states[edge][-1]

    def snapshot(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["edge", "k", "x_hat", "p"])
            for e, traj in enumerate(self.states):
                s = traj[-1]
                w.writerow([e, s.k, repr(s.x_hat), repr(s.p)])
