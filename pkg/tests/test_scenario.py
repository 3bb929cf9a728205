import itertools

import numpy as np
import pytest

from nrmobility.config import ScenarioConfig
from nrmobility.scenario import build_deployment, deployment_region, place_ues, site_positions


def _site_distances(sectors):
    pos = sorted({s.site_id: s.position for s in sectors}.items())
    return [np.hypot(a[1][0] - b[1][0], a[1][1] - b[1][1]) for a, b in itertools.combinations(pos, 2)]


def test_default_deployment():
    sectors = build_deployment(ScenarioConfig())
    assert len(sectors) == 9
    assert len({s.position for s in sectors}) == 3
    assert _site_distances(sectors) == pytest.approx([500.0] * 3, abs=1e-9)
    assert [s.sector_id for s in sectors] == list(range(9))


def test_single_site():
    sectors = build_deployment(ScenarioConfig(num_sites=1))
    assert len(sectors) == 3
    assert len({s.position for s in sectors}) == 1
    assert [s.bearing for s in sectors] == [0.0, 120.0, 240.0]


def test_isd_200():
    sectors = build_deployment(ScenarioConfig(inter_site_distance=200.0))
    assert _site_distances(sectors) == pytest.approx([200.0] * 3, abs=1e-9)


def test_bearings_120_apart_per_site():
    for site, group in itertools.groupby(build_deployment(ScenarioConfig()), key=lambda s: s.site_id):
        bearings = sorted(s.bearing for s in group)
        assert np.diff(bearings) == pytest.approx([120.0, 120.0])


@pytest.mark.parametrize("n", [4, 7])
def test_larger_layouts_keep_nearest_neighbour_isd(n):
    pts = site_positions(n, 300.0)
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    assert d.min() == pytest.approx(300.0)
    assert len(pts) == n


def test_array_follows_element_count():
    s = build_deployment(ScenarioConfig(antenna_elements=128))[0]
    assert (s.array.rows, s.array.cols) == (8, 16)


def _placement(cfg, seed):
    return place_ues(cfg, np.random.default_rng(seed))


def test_placement_is_deterministic():
    cfg = ScenarioConfig()
    a, b = _placement(cfg, 11), _placement(cfg, 11)
    for u, v in zip(a, b):
        assert np.array_equal(u.position, v.position)
        assert np.array_equal(u.velocity, v.velocity)
        assert (u.speed, u.indoor, u.indoor_depth) == (v.speed, v.indoor, v.indoor_depth)


def test_placement_count_region_and_speeds():
    cfg = ScenarioConfig(num_ues=200)
    region = deployment_region(cfg)
    ues = _placement(cfg, 3)
    assert len(ues) == 200
    assert all(region.contains(u.position) for u in ues)
    speeds = np.array([u.speed for u in ues])
    assert speeds.min() >= 3 / 3.6 and speeds.max() <= 30 / 3.6
    assert np.allclose(np.hypot(*np.array([u.velocity for u in ues]).T), speeds)


def test_all_indoor():
    ues = _placement(ScenarioConfig(indoor_fraction=1.0), 0)
    assert all(u.indoor for u in ues)
    assert all(0 <= u.indoor_depth <= 25 for u in ues)
    assert not any(u.indoor for u in _placement(ScenarioConfig(indoor_fraction=0.0), 0))


def test_fixed_speed_unit_conversion():
    ues = _placement(ScenarioConfig(ue_speed_range=(3.0, 3.0)), 5)
    assert all(u.speed == pytest.approx(0.8333, abs=1e-4) for u in ues)
    assert all(u.speed == 3 / 3.6 for u in ues)
