import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nrmobility.config import RrmConfig
from nrmobility.rrm import (UeRrm, build_report, consolidate_cell_quality, l1_filter, l3_coefficient,
                            l3_filter, ue_measured_beams)


def brute_consolidate(levels, threshold, n):
    """Reference: loop-filter by threshold, repeated-max selection, mean in mW."""
    pool = [(v, i) for i, v in enumerate(levels) if v >= threshold]
    chosen = []
    while pool and len(chosen) < n:
        best = max(pool, key=lambda e: (e[0], -e[1]))
        chosen.append(best)
        pool.remove(best)
    if not chosen:
        chosen = [max(((v, i) for i, v in enumerate(levels)), key=lambda e: (e[0], -e[1]))]
    total = 0.0
    for v, _ in chosen:
        total += 10 ** (v / 10)
    return total / len(chosen), sorted(i for _, i in chosen)


def test_l1_examples():
    assert l1_filter([-80.0], 5) == pytest.approx(-80.0, abs=1e-12)
    assert l1_filter([-80.0] * 3, 3) == pytest.approx(-80.0, abs=1e-12)
    # mean of 1e-8 and 1e-9 mW is 5.5e-9 mW
    assert l1_filter([-80.0, -90.0], 2) == pytest.approx(10 * math.log10(5.5e-9), abs=1e-12)
    assert l1_filter([-80.0, -90.0], 2) == pytest.approx(-82.60, abs=0.005)


def test_l1_window_uses_latest():
    assert l1_filter([-50.0, -80.0, -80.0], 2) == pytest.approx(-80.0)


def test_l1_empty():
    with pytest.raises(ValueError):
        l1_filter([], 3)


def test_consolidation_worked_example():
    cq = consolidate_cell_quality([(0, -80.0), (1, -85.0), (2, -90.0)],
                                  RrmConfig(n_best_beams=2, abs_threshold=-88.0), cell_id=7)
    assert cq.consolidated_rsrp == pytest.approx(-81.82, abs=0.005)
    assert cq.contributing_beams == (0, 1)
    assert cq.cell_id == 7 and not cq.fallback


def test_consolidation_fallback():
    cq = consolidate_cell_quality([(0, -100.0), (1, -105.0)], RrmConfig(abs_threshold=-88.0))
    assert cq.consolidated_rsrp == pytest.approx(-100.0)
    assert cq.contributing_beams == (0,) and cq.fallback


def test_consolidation_empty():
    with pytest.raises(ValueError):
        consolidate_cell_quality([], RrmConfig())


beam_sets = st.lists(st.floats(-140, -40), min_size=1, max_size=64)


@given(beam_sets, st.floats(-130, -60))
def test_n_equals_one_is_best_beam(levels, thr):
    cq = consolidate_cell_quality(enumerate(levels), RrmConfig(n_best_beams=1, report_max_beams=1,
                                                                abs_threshold=thr))
    assert cq.consolidated_rsrp == pytest.approx(max(levels), abs=1e-9)


@given(beam_sets, st.floats(-130, -60), st.integers(1, 8))
def test_consolidation_matches_brute_force(levels, thr, n):
    cfg = RrmConfig(n_best_beams=n, report_max_beams=min(n, 4), abs_threshold=thr)
    cq = consolidate_cell_quality(enumerate(levels), cfg)
    mw, used = brute_consolidate(levels, thr, n)
    assert 10 ** (cq.consolidated_rsrp / 10) == pytest.approx(mw, rel=1e-12)
    assert sorted(cq.contributing_beams) == used


@given(beam_sets, st.floats(-130, -60), st.integers(1, 8))
def test_consolidation_bounds(levels, thr, n):
    cfg = RrmConfig(n_best_beams=n, report_max_beams=min(n, 4), abs_threshold=thr)
    cq = consolidate_cell_quality(enumerate(levels), cfg)
    best = max(levels[i] for i in cq.contributing_beams)
    assert 1 <= len(cq.contributing_beams) <= n
    assert cq.consolidated_rsrp <= best + 1e-9
    assert cq.consolidated_rsrp >= best - 10 * math.log10(n) - 1e-9
    if not cq.fallback:
        assert all(levels[i] >= thr for i in cq.contributing_beams)


@given(beam_sets, st.floats(-130, -60), st.integers(1, 8), st.data())
def test_raising_a_beam_never_lowers_quality_when_set_is_full(levels, thr, n, data):
    # holds whenever the raised beam cannot enlarge a short contributing set
    cfg = RrmConfig(n_best_beams=n, report_max_beams=min(n, 4), abs_threshold=thr)
    i = data.draw(st.integers(0, len(levels) - 1))
    up = data.draw(st.floats(0, 30))
    before = consolidate_cell_quality(enumerate(levels), cfg)
    n_above = sum(v >= thr for v in levels)
    raised = list(levels)
    raised[i] += up
    if n_above < n and levels[i] < thr <= raised[i]:
        return
    after = consolidate_cell_quality(enumerate(raised), cfg)
    assert after.consolidated_rsrp >= before.consolidated_rsrp - 1e-9


def test_raising_a_beam_over_threshold_can_lower_quality():
    cfg = RrmConfig(n_best_beams=2, abs_threshold=-88.0)
    before = consolidate_cell_quality([(0, -80.0), (1, -100.0)], cfg)
    after = consolidate_cell_quality([(0, -80.0), (1, -87.0)], cfg)
    assert after.consolidated_rsrp < before.consolidated_rsrp


def test_l3_examples():
    assert l3_filter(-70.0, -90.0, 0) == -90.0
    assert l3_filter(-80.0, -90.0, 4) == pytest.approx(-85.0)
    assert l3_filter(None, -93.0, 4) == -93.0
    f = None
    for _ in range(1000):
        f = l3_filter(f, -77.25, 4)
    assert f == -77.25
    with pytest.raises(ValueError):
        l3_filter(-80, -80, -1)


@given(st.integers(0, 19), st.floats(-140, -40), st.floats(-140, -40), st.integers(1, 200))
def test_l3_closed_form(k, f0, m, n):
    f = f0
    for _ in range(n):
        f = l3_filter(f, m, k)
    closed = m + (1 - l3_coefficient(k)) ** n * (f0 - m)
    assert f == pytest.approx(closed, rel=1e-9)


def _sweep_cfg(**kw):
    base = dict(n_best_beams=4, report_max_beams=4, ue_detectable_threshold=-120.0, sweep_period=0.02,
                abs_threshold=-110.0, l1_window=1)
    base.update(kw)
    return RrmConfig(**base)


def test_sweep_retains_n_strongest():
    true = np.array([[-70.0 - 2 * i for i in range(10)] + [-130.0] * 6])
    state = UeRrm(1, 16, _sweep_cfg())
    got = ue_measured_beams(true, state, 0.0)
    assert sorted(m.beam_id for m in got) == [0, 1, 2, 3]


def test_new_beam_invisible_until_next_sweep():
    cfg = _sweep_cfg(sweep_period=0.5)
    state = UeRrm(1, 8, cfg)
    true = np.array([[-70.0, -72.0, -74.0, -76.0, -90.0, -90.0, -90.0, -90.0]])
    ue_measured_beams(true, state, 0.0, serving=(0, 0))
    true2 = true.copy()
    true2[0, 7] = -60.0
    mid = ue_measured_beams(true2, state, 0.1, serving=(0, 0))
    assert 7 not in {m.beam_id for m in mid}
    later = ue_measured_beams(true2, state, 0.5, serving=(0, 0))
    assert 7 in {m.beam_id for m in later}


def test_between_sweeps_only_serving_beam_refreshes():
    cfg = _sweep_cfg(sweep_period=1.0)
    state = UeRrm(1, 4, cfg)
    ue_measured_beams(np.array([[-70.0, -75.0, -80.0, -85.0]]), state, 0.0, serving=(0, 1))
    got = {m.beam_id: m for m in ue_measured_beams(np.array([[-60.0, -65.0, -80.0, -85.0]]), state, 0.1,
                                                    serving=(0, 1))}
    assert got[1].raw_rsrp == -65.0 and got[1].last_seen == 0.1
    assert got[0].raw_rsrp == -70.0 and got[0].last_seen == 0.0


def test_degenerate_config_tracks_network():
    rng = np.random.default_rng(3)
    cfg = _sweep_cfg(n_best_beams=16, report_max_beams=4, ue_detectable_threshold=-np.inf, sweep_period=1e-3)
    state = UeRrm(3, 16, cfg)
    for step in range(20):
        true = rng.uniform(-140, -60, (3, 16))
        got = ue_measured_beams(true, state, step * 0.1)
        assert len(got) == 48


@given(st.integers(0, 2**31), st.integers(1, 6), st.floats(0.01, 0.5))
def test_measured_set_subset_of_last_sweep_detected(seed, n, period):
    rng = np.random.default_rng(seed)
    cfg = _sweep_cfg(n_best_beams=n, report_max_beams=min(n, 4), sweep_period=period)
    state = UeRrm(2, 8, cfg)
    detected = None
    for step in range(15):
        now = step * 0.1
        true = rng.uniform(-135, -70, (2, 8))
        sweep = state.is_sweep(now)
        if sweep:
            detected = true >= cfg.ue_detectable_threshold
        ue_measured_beams(true, state, now)
        assert not np.any(state.retained & ~detected)
        assert np.all(state.retained.sum(axis=1) <= n)


def _cells_for_report():
    cfg = RrmConfig(n_best_beams=2, report_max_beams=2, abs_threshold=-120.0)
    a = consolidate_cell_quality([(0, -80.0), (1, -82.0), (2, -95.0)], cfg, cell_id=0)
    b = consolidate_cell_quality([(4, -90.0), (5, -84.0)], cfg, cell_id=3)
    beam_l3 = {(0, 0): -81.0, (0, 1): -80.5, (0, 2): -95.0, (3, 4): -90.0, (3, 5): -84.0}
    return cfg, [a, b], beam_l3


def test_report_structure():
    cfg, cells, beam_l3 = _cells_for_report()
    rep = build_report(9, 1.0, 0, cells, beam_l3, cfg)
    assert rep.serving == (0, cells[0].l3_cell_rsrp)
    assert [c for c, _ in rep.neighbors] == [3]
    assert sum(len(v) for v in rep.beams.values()) <= 4
    for cell, entries in rep.beams.items():
        vals = [v for _, v in entries]
        assert vals == sorted(vals, reverse=True)
    assert rep.beams[0] == ((1, -80.5), (0, -81.0))


def test_report_beams_are_contributing_beams():
    cfg, cells, beam_l3 = _cells_for_report()
    rep = build_report(9, 1.0, 3, cells, beam_l3, cfg)
    for c in cells:
        assert sorted(b for b, _ in rep.beams[c.cell_id]) == sorted(c.contributing_beams)


def test_report_without_beams():
    cfg, cells, beam_l3 = _cells_for_report()
    rep = build_report(9, 1.0, 0, cells, beam_l3, RrmConfig(n_best_beams=2, report_max_beams=0))
    assert rep.beams == {}
    assert [r[3] for r in rep.rows()] == ["cell", "cell"]


def test_report_needs_serving_cell():
    cfg, cells, beam_l3 = _cells_for_report()
    with pytest.raises(ValueError):
        build_report(9, 1.0, 5, cells, beam_l3, cfg)
