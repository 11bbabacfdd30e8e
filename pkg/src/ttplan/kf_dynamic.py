r"""Bilinear state-dependent travel-time model and its Kalman filter.

Travel time of the m-th edge of a path is modelled from the previous
``j`` travel times and ``l`` exploration terms ``xi``::

    X(m) + a_1 X(m-1) + ... + a_j X(m-j)
        = xi(m) + b_1 xi(m-1) + ... + b_l xi(m-l)
          + sum_r sum_z c_rz xi(m-r) X(m-z) + w(m-1)

Here ``j == l == regression_no``. The state vector has ``n = 2*j + 1``
entries laid out as::

    s = (1, xi(m-l+1), ..., xi(m), X(m-j+1), ..., X(m))

and evolves as ``s(m+1) = F(s) s + V xi(m+1) + G w(m)``. ``F`` keeps the
constant, shifts both windows by one and puts the model in its last row::

    (mu, psi_l, ..., psi_1, -phi_j, ..., -phi_1),
    psi_r = b_r + sum_z c_rz X(m+1-z)

where ``mu`` is the running mean of the edge's travel time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .kf_static import EPS_TIME

DEFAULT_PHI = 0.2
DEFAULT_COEF_MEAN = 0.1
DEFAULT_COEF_STD = 0.1
DEFAULT_XI_MEAN = 0.1
DEFAULT_XI_STD = 0.1
DEFAULT_Q_STD = 1.0
DEFAULT_R_STD = 0.2
DEFAULT_X_VAR = 1.0


@dataclass(frozen=True)
class BilinearParams:
    """Coefficients of the bilinear model.

    ``phi[i-1]`` is the AR coefficient of ``X(m-i)``, ``b[r-1]`` the weight
    of ``xi(m-r)`` and ``c[r-1, z-1]`` the weight of ``xi(m-r) X(m-z)``.
    """

    regression_no: int
    phi: np.ndarray
    b: np.ndarray
    c: np.ndarray
    xi_mean: float = DEFAULT_XI_MEAN
    xi_std: float = DEFAULT_XI_STD
    q_std: float = DEFAULT_Q_STD
    r_std: float = DEFAULT_R_STD

    def __post_init__(self):
        j = self.regression_no
        if j < 1:
            raise ValueError("regression_no must be >= 1")
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float).reshape(-1))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if self.phi.shape != (j,) or self.b.shape != (j,) or self.c.shape != (j, j):
            raise ValueError(
                f"coefficient shapes {self.phi.shape}, {self.b.shape}, {self.c.shape} "
                f"do not match regression_no={j}"
            )
        if self.q_std < 0 or self.r_std < 0 or self.xi_std < 0:
            raise ValueError("noise standard deviations must be non-negative")

    @property
    def n(self):
        return 2 * self.regression_no + 1

    @classmethod
    def draw(cls, regression_no, rng, phi=DEFAULT_PHI, coef_mean=DEFAULT_COEF_MEAN,
             coef_std=DEFAULT_COEF_STD, **kwargs):
        """Constant ``phi`` with ``b`` and ``c`` drawn from N(coef_mean, coef_std)."""
        j = regression_no
        return cls(
            regression_no=j,
            phi=np.full(j, float(phi)),
            b=rng.normal(coef_mean, coef_std, size=j),
            c=rng.normal(coef_mean, coef_std, size=(j, j)),
            **kwargs,
        )

    def to_dict(self):
        return {
            "regression_no": self.regression_no,
            "phi": self.phi.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "xi_mean": self.xi_mean,
            "xi_std": self.xi_std,
            "q_std": self.q_std,
            "r_std": self.r_std,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class BilinearState:
    s: np.ndarray
    p_mat: np.ndarray
    m: int = 0
    mu: float = 0.0
    n_mean: int = 0
    last_innovation: float = 0.0
    n_hist: int = 0
    degenerate: bool = field(default=False, compare=False)

    @property
    def x(self):
        """Newest travel time in the state."""
        return float(self.s[-1])

    def window(self, j):
        return self.s[j + 1:]


def init_state(params, x0, x_var=DEFAULT_X_VAR):
    """Initial state: constant 1, xi window at its mean, X window at ``x0``.

    The covariance is diagonal with zero variance on the constant.
    """
    j = params.regression_no
    s = np.empty(params.n)
    s[0] = 1.0
    s[1:j + 1] = params.xi_mean
    s[j + 1:] = x0
    p = np.diag(np.r_[0.0, np.full(j, params.xi_std ** 2), np.full(j, float(x_var))])
    return BilinearState(s=s, p_mat=p, mu=float(x0))


def psi(params, x_window):
    """psi_r for r = 1..l given X window ordered oldest first."""
    lagged = np.asarray(x_window, dtype=float)[::-1]  # lagged[z-1] = X(m+1-z)
    return params.b + params.c @ lagged


def build_F(params, state):
    j = params.regression_no
    n = params.n
    F = np.zeros((n, n))
    F[0, 0] = 1.0
    for i in range(1, j):
        F[i, i + 1] = 1.0
    for i in range(j + 1, 2 * j):
        F[i, i + 1] = 1.0
    F[-1, 0] = state.mu
    F[-1, 1:j + 1] = psi(params, state.window(j))[::-1]
    F[-1, j + 1:] = -params.phi[::-1]
    return F


def build_V(params):
    v = np.zeros(params.n)
    v[params.regression_no] = 1.0
    v[-1] = 1.0
    return v


def build_G(params):
    g = np.zeros(params.n)
    g[-1] = 1.0
    return g


def build_H(params):
    return build_G(params)


def predict(params, state, xi=None):
    """A-priori state and covariance for the next step.

    ``xi`` is the exploration input; its mean is used when omitted.
    """
    xi_in = params.xi_mean if xi is None else float(xi)
    F = build_F(params, state)
    G = build_G(params)
    assert state.s.shape == (params.n,) and state.p_mat.shape == (params.n, params.n)
    s_prior = F @ state.s + build_V(params) * xi_in + G * state.last_innovation
    p_prior = F @ state.p_mat @ F.T + params.q_std ** 2 * np.outer(G, G)
    return s_prior, p_prior


def update(params, state, y, prior=None):
    """Correct the prediction with observed travel time ``y``."""
    if not np.isfinite(y):
        raise ValueError(f"observation must be finite, got {y}")
    s_prior, p_prior = predict(params, state) if prior is None else prior
    innov = float(y - s_prior[-1])
    s_var = p_prior[-1, -1] + params.r_std ** 2
    if s_var == 0:
        return replace(state, s=s_prior, p_mat=p_prior, m=state.m + 1, degenerate=True)
    gain = p_prior[:, -1] / s_var
    s_new = s_prior + gain * innov
    p_new = p_prior - np.outer(gain, p_prior[-1, :])
    p_new = 0.5 * (p_new + p_new.T)
    s_new[0] = 1.0
    s_new[-1] = max(s_new[-1], EPS_TIME)
    x = s_new[-1]
    return replace(
        state,
        s=s_new,
        p_mat=p_new,
        m=state.m + 1,
        mu=state.mu + (x - state.mu) / (state.n_mean + 1),
        n_mean=state.n_mean + 1,
        last_innovation=innov,
        degenerate=False,
    )


def with_window(params, state, window):
    """Replace the X window with known in-path travel times (oldest first).

    Shorter windows are left-padded with zeros; ``n_hist`` records how many
    values were actually known.
    """
    j = params.regression_no
    w = np.asarray(window, dtype=float)[-j:]
    s = state.s.copy()
    s[j + 1:] = 0.0
    if len(w):
        s[-len(w):] = w
    return replace(state, s=s, n_hist=len(window))


def estimate_edge(params, state, y_obs=None, window=None, xi=None):
    """Travel-time estimate for one edge and the filter state after it.

    Until ``regression_no`` travel times are known the state cannot be
    formed and the running mean is returned instead (the heuristic cost
    when the state was initialised from it and nothing has been observed).
    Otherwise the model predicts and, when ``y_obs`` is given, corrects.
    """
    if window is not None:
        state = with_window(params, state, window)
    if state.n_hist < params.regression_no:
        if y_obs is not None:
            state = replace(
                state,
                mu=state.mu + (y_obs - state.mu) / (state.n_mean + 1),
                n_mean=state.n_mean + 1,
            )
        return max(state.mu, EPS_TIME), state
    prior = predict(params, state, xi)
    if y_obs is None:
        s_prior, p_prior = prior
        s_prior = s_prior.copy()
        s_prior[-1] = max(s_prior[-1], EPS_TIME)
        new = replace(state, s=s_prior, p_mat=p_prior, m=state.m + 1, last_innovation=0.0)
        return float(s_prior[-1]), new
    new = update(params, state, y_obs, prior)
    return max(new.x, EPS_TIME), new


class DynamicFilterBank:
    """One bilinear filter per directed edge."""

    def __init__(self, params, x0, x_var=DEFAULT_X_VAR, rng=None):
        self.params = params
        self.states = [init_state(params, x, x_var) for x in x0]
        self.rng = rng

    def estimate(self, edge, window, y_obs=None):
        xi = None
        if self.rng is not None:
            xi = self.rng.normal(self.params.xi_mean, self.params.xi_std)
        cost, self.states[edge] = estimate_edge(
            self.params, self.states[edge], y_obs=y_obs, window=window, xi=xi
        )
        return cost

    def snapshot(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["edge", "m", "mu", "x", "p_x"])
            for e, st in enumerate(self.states):
                w.writerow([e, st.m, repr(st.mu), repr(st.x), repr(float(st.p_mat[-1, -1]))])
