import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ttplan import kf_static as kf
from ttplan.topomap import TopologyMap
from ttplan.worldsim import ObservationTable


def test_init():
    s = kf.init(10.0, 1.0, 0.5, 1.0)
    assert (s.x_hat, s.p, s.k) == (10.0, 1.0, 0)
    assert kf.init(10.0, 0.0).p == 0.0


@pytest.mark.parametrize("args", [(10.0, 1.0, 0.5, -1.0), (10.0, -1.0), (0.0,), (-3.0,), (10.0, 1.0, -0.1)])
def test_init_domain_errors(args):
    with pytest.raises(ValueError):
        kf.init(*args)


def test_predict_is_pure():
    s = kf.init(10.0, 1.0, 0.5, 1.0)
    assert kf.predict(s) == (10.0, 1.5)
    assert kf.predict(s) == kf.predict(s)
    assert kf.predict(kf.init(10.0, 1.0, 0.0, 1.0)) == (10.0, 1.0)


def test_worked_example():
    s = kf.init(10.0, 1.0, 0.5, 1.0)
    assert abs(kf.gain(s) - 0.6) < 1e-12
    u = kf.update(s, 12.0)
    assert abs(u.x_hat - 11.2) < 1e-12
    assert abs(u.p - 0.6) < 1e-12
    assert u.k == 1 and not u.degenerate


def test_exact_observation_is_trusted():
    u = kf.update(kf.init(10.0, 1.0, 0.5, 0.0), 12.5)
    assert u.x_hat == 12.5
    assert u.p == 0.0


def test_certain_state_ignores_observation():
    s = kf.init(10.0, 0.0, 0.0, 1.0)
    assert kf.gain(s) == 0.0
    assert kf.update(s, 50.0).x_hat == 10.0


def test_degenerate_both_zero():
    u = kf.update(kf.init(10.0, 0.0, 0.0, 0.0), 12.0)
    assert u.degenerate
    assert u.x_hat == 10.0 and u.k == 1
    assert math.isnan(kf.gain(kf.init(10.0, 0.0, 0.0, 0.0)))


def test_non_finite_observation():
    with pytest.raises(ValueError):
        kf.update(kf.init(10.0), float("nan"))


def test_estimate_is_clamped_positive():
    u = kf.update(kf.init(1.0, 10.0, 0.0, 0.0), -5.0)
    assert u.x_hat == kf.EPS_TIME


positive = st.floats(1e-3, 1e3)
variance = st.floats(0.0, 1e2)


@given(positive, variance, variance, variance, st.floats(-1e3, 1e3))
def test_update_invariants(x0, p0, s2w, s2e, y):
    s = kf.init(x0, p0, s2w, s2e)
    x_prior, p_prior = kf.predict(s)
    assume(p_prior + s2e > 0)
    k_gain = kf.gain(s)
    u = kf.update(s, y)
    assert 0.0 <= k_gain <= 1.0
    assert 0.0 <= u.p <= p_prior
    assert abs(u.p - (1.0 - k_gain) * p_prior) <= 1e-12 * max(1.0, p_prior)
    assert u.x_hat >= kf.EPS_TIME
    # unclamped estimate sits between prior and observation
    raw = x_prior + k_gain * (y - x_prior)
    if raw >= kf.EPS_TIME:
        assert u.x_hat == raw
        assert min(x_prior, y) - 1e-9 <= u.x_hat <= max(x_prior, y) + 1e-9


@given(positive, variance, variance, variance, st.lists(st.floats(0.0, 100.0), max_size=30))
def test_replay_is_deterministic(x0, p0, s2w, s2e, ys):
    a = b = kf.init(x0, p0, s2w, s2e)
    for y in ys:
        a = kf.update(a, y)
    for y in ys:
        b = kf.update(b, y)
    assert a == b
    assert a.k == len(ys)


def test_constant_input_closed_form():
    # with no process noise the filter is a recursive weighted mean:
    # x_k - c = (x0 - c) * s2e / (s2e + k * p0)
    x0, c, p0, s2e = 7.0, 3.0, 1.0, 0.04
    s = kf.init(x0, p0, 0.0, s2e)
    for k in range(1, 201):
        s = kf.update(s, c)
        expected = c + (x0 - c) * s2e / (s2e + k * p0)
        assert s.x_hat == pytest.approx(expected, rel=1e-12)
        assert s.p == pytest.approx(p0 * s2e / (s2e + k * p0), rel=1e-12)


@given(st.floats(0.1, 100.0), st.floats(0.1, 10.0))
def test_convergence_within_200_updates(c, ratio):
    # diffuse initial variance; see the closed form above for the default P0
    s = kf.init(ratio * c, 1e6, 0.0, kf.DEFAULT_SIGMA2_ETA)
    for _ in range(200):
        s = kf.update(s, c)
    assert abs(s.x_hat - c) < 1e-6


def _table(values):
    topo = TopologyMap(((0, 0), (1, 0)), ((0, 1), (1, 0)))
    return ObservationTable(topo, np.asarray(values, dtype=float))


def test_bank_consumes_table_in_order():
    table = _table([[11.0, 12.0, 13.0], [5.0, 5.0, 5.0]])
    bank = kf.StaticFilterBank(table, [10.0, 10.0], p0=1.0, sigma2_omega=0.5, sigma2_eta=1.0)
    expected = kf.init(10.0, 1.0, 0.5, 1.0)
    for k, y in enumerate([11.0, 12.0, 13.0], start=1):
        expected = kf.update(expected, y)
        assert bank.estimate(0, k) == expected.x_hat
    assert bank.current(0) == expected
    # earlier steps are remembered, not recomputed
    assert bank.estimate(0, 1) == kf.update(kf.init(10.0, 1.0, 0.5, 1.0), 11.0).x_hat
    assert bank.estimate(1, 0) == 10.0
    assert bank.clipped == 0
    bank.estimate(1, 5)
    assert bank.clipped == 2


def test_bank_snapshot(tmp_path):
    bank = kf.StaticFilterBank(_table([[11.0], [9.0]]), [10.0, 10.0])
    bank.estimate(0, 1)
    bank.snapshot(tmp_path / "snap.csv")
    rows = (tmp_path / "snap.csv").read_text().splitlines()
    assert rows[0] == "edge,k,x_hat,p"
    assert rows[1].startswith("0,1,") and rows[2] == "1,0,10.0,1.0"
