import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ttplan.topomap import RoughnessZone, TopologyMap, builtin_map
from ttplan.worldsim import (
    BatteryExhausted,
    ObservationTable,
    SimWorld,
    WorldParams,
    battery_factor,
    build_offline_table,
    ground_truth_time,
    save_log,
    traverse,
)


@pytest.fixture
def line():
    """Three collinear nodes 1 m apart; edges 0,1 are smooth, 2,3 lie in zone 'r'."""
    coords = ((0.0, 0.0), (1.0, 0.0), (2.0, 0.0))
    edges = ((0, 1), (1, 0), (1, 2), (2, 1))
    return TopologyMap(coords, edges, (RoughnessZone("r", frozenset({2, 3}), 1.5),))


def test_full_charge_smooth_is_base_time(line):
    w = SimWorld(line)
    assert ground_truth_time(w, 0) == w.base_time(0) == 10.0


def test_roughness_ratio_is_exact(line):
    w = SimWorld(line, soc=0.4)
    # same length, same charge: only the roughness factor differs
    assert ground_truth_time(w, 2) / ground_truth_time(w, 0) == pytest.approx(1.5, rel=1e-15)
    w.set_zone_factor("r", 1.0)
    smooth = ground_truth_time(w, 2)
    w.set_zone_factor("r", 1.5)
    assert ground_truth_time(w, 2) / smooth == pytest.approx(1.5, rel=1e-15)


def test_low_charge_is_slower(line):
    w = SimWorld(line)
    assert ground_truth_time(w, 0, soc=0.05) > ground_truth_time(w, 0, soc=0.9)


def test_battery_factor_values():
    assert battery_factor(1.0) == 1.0
    assert battery_factor(0.5) == pytest.approx(1.05)
    # below the knee: 1 + 0.1 * 0.95 + 40 * 0.1 ** 2
    assert battery_factor(0.05) == pytest.approx(1.495)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_battery_factor_non_increasing_in_soc(a, b):
    lo, hi = min(a, b), max(a, b)
    assert battery_factor(lo) >= battery_factor(hi) >= 1.0


def test_discharge_of_one_meter_edge(line):
    w = SimWorld(line, WorldParams(discharge_per_meter=0.01))
    rec = traverse(w, 0)
    assert w.soc == 1.0 - 0.01
    assert rec.soc == 1.0
    assert rec.k == 1 and rec.m == 1


def test_rough_edges_drain_more(line):
    w = SimWorld(line, WorldParams(discharge_per_meter=0.01))
    traverse(w, 2)
    assert w.soc == pytest.approx(1.0 - 0.015)


def test_zero_noise_observation_is_exact(line):
    w = SimWorld(line, WorldParams(noise_std=0.0), soc=0.7)
    rec = traverse(w, 3)
    assert rec.observed_time == rec.true_time == ground_truth_time(w, 3, soc=0.7)


def test_same_seed_same_log(line):
    seq = [0, 2, 3, 1, 0, 0, 2]
    a, b = SimWorld(line, seed=5), SimWorld(line, seed=5)
    for e in seq:
        traverse(a, e)
        traverse(b, e)
    assert a.log == b.log
    c = SimWorld(line, seed=6)
    for e in seq:
        traverse(c, e)
    assert c.log != a.log


def test_counters_and_positions(line):
    w = SimWorld(line)
    traverse(w, 0, path_position=1)
    traverse(w, 2, path_position=2)
    w.begin_path()
    rec = traverse(w, 0)
    assert rec.k == 2 and rec.m == 1
    assert w.counts == [2, 0, 1, 0]
    assert w.latest[0] is rec


def test_soc_is_non_increasing_over_log(line):
    w = SimWorld(line)
    for i in range(20):
        traverse(w, i % 4)
    socs = [r.soc for r in w.log]
    assert all(a >= b for a, b in zip(socs, socs[1:]))


def test_exhaustion_leaves_world_untouched(line):
    w = SimWorld(line, WorldParams(discharge_per_meter=0.3))
    for _ in range(3):
        traverse(w, 0)
    soc, n = w.soc, len(w.log)
    with pytest.raises(BatteryExhausted):
        traverse(w, 0)
    assert w.soc == soc and len(w.log) == n
    w.recharge()
    traverse(w, 0)


def test_zone_override(line):
    w = SimWorld(line)
    w.set_zone_factor("r", 2.0)
    assert w.roughness(2) == 2.0
    # the map itself is unchanged
    assert line.roughness(2) == 1.5
    with pytest.raises(KeyError):
        w.set_zone_factor("missing", 2.0)
    with pytest.raises(ValueError):
        w.set_zone_factor("r", 0.9)


def test_clone_is_independent(line):
    w = SimWorld(line, seed=3)
    c = w.clone()
    traverse(c, 0)
    assert w.log == [] and w.soc == 1.0
    assert traverse(w, 0) == c.log[0]


@pytest.mark.parametrize("bad", [dict(nominal_speed=0), dict(noise_std=-1), dict(soc_knee=2)])
def test_invalid_params(bad):
    with pytest.raises(ValueError):
        WorldParams(**bad)


def test_table_single_row_per_edge(line):
    t = build_offline_table(SimWorld(line), 1)
    assert t.values.shape == (line.edge_count, 1)


def test_table_complete_and_reproducible(line):
    a = build_offline_table(SimWorld(line, seed=1), 40)
    b = build_offline_table(SimWorld(line, seed=1), 40)
    np.testing.assert_array_equal(a.values, b.values)
    for e in range(line.edge_count):
        for k in range(1, 41):
            v, clipped = a.lookup(e, k)
            assert v > 0 and not clipped
    v, clipped = a.lookup(0, 41)
    assert clipped and v == a.values[0, -1]
    with pytest.raises(ValueError):
        a.lookup(0, 0)


def test_table_does_not_touch_world(line):
    w = SimWorld(line, seed=1)
    build_offline_table(w, 10)
    assert w.log == [] and w.soc == 1.0


def test_zero_noise_table_replays_ground_truth(line):
    params = WorldParams(noise_std=0.0, discharge_per_meter=0.05)
    t = build_offline_table(SimWorld(line, params), 30)
    # replay: one episode per edge from full charge, recharge on exhaustion
    for e in range(line.edge_count):
        replay = SimWorld(line, params)
        soc = 1.0
        expected = []
        for _ in range(30):
            drain = replay.discharge(e)
            if soc - drain <= 0:
                soc = 1.0
            expected.append(ground_truth_time(replay, e, soc=soc))
            soc -= drain
        np.testing.assert_array_equal(t.values[e], expected)
        # non-decreasing within the first episode (19 traversals of a 1 m edge fit)
        first = t.values[e, :19] if line.roughness(e) == 1.0 else t.values[e, :13]
        assert np.all(np.diff(first) >= 0)


def test_terminal_rise_of_progressive_mean():
    topo = builtin_map("map2")
    w = SimWorld(topo, seed=11)
    times = []
    while True:
        try:
            times.append(traverse(w, 0).observed_time)
        except BatteryExhausted:
            break
    running = np.cumsum(times) / np.arange(1, len(times) + 1)
    tail = running[-len(times) // 10:]
    assert np.all(np.diff(tail) > 0)
    assert running[-1] > running[len(times) // 2]


def test_table_csv_round_trip(line, tmp_path):
    t = build_offline_table(SimWorld(line, seed=2), 5)
    t.to_csv(tmp_path / "t.csv")
    back = ObservationTable.from_csv(line, tmp_path / "t.csv")
    np.testing.assert_array_equal(back.values, t.values)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "edge_from,edge_to,k,observed_time"
    assert len(lines) == 1 + line.edge_count * 5


def test_table_csv_missing_row(line, tmp_path):
    t = build_offline_table(SimWorld(line, seed=2), 2)
    t.to_csv(tmp_path / "t.csv")
    rows = (tmp_path / "t.csv").read_text().splitlines()
    (tmp_path / "bad.csv").write_text("\n".join(rows[:-1]) + "\n")
    with pytest.raises(ValueError, match="missing"):
        ObservationTable.from_csv(line, tmp_path / "bad.csv")


def test_save_log(line, tmp_path):
    w = SimWorld(line)
    traverse(w, 0)
    save_log(w, tmp_path / "log.csv")
    rows = (tmp_path / "log.csv").read_text().splitlines()
    assert rows[0] == "edge,k,m,true_time,observed_time,soc"
    assert len(rows) == 2
