import math
from collections import Counter

import numpy as np
import pytest

from fedsched import (
    ConstellationConfig,
    SatelliteElement,
    build_snapshot,
    build_temporal_graph,
    make_site,
    propagate,
    visible,
    walker_delta,
)
from fedsched.constellation import (
    EARTH_RADIUS_KM,
    EARTH_ROTATION_DEG_S,
    elevation_deg,
    keyed_uniform,
    orbital_period,
    positions_ecef,
)

SITES = (make_site("Singapore", 1.35, 103.82, "server"), make_site("Tokyo", 35.68, 139.69),
         make_site("London", 51.51, -0.13))


def equatorial(phase=0.0, alt=550.0):
    return SatelliteElement("sat-x", alt, 0.0, 0, 0, 0.0, phase)


def test_epoch_zero_on_equator_at_orbit_radius():
    (_, pos), = propagate([equatorial()], 0.0)
    assert pos[2] == pytest.approx(0.0, abs=1e-9)
    assert np.linalg.norm(pos) == pytest.approx(EARTH_RADIUS_KM + 550.0)
    assert pos[0] == pytest.approx(EARTH_RADIUS_KM + 550.0)


def test_one_period_returns_to_same_inertial_point():
    el = SatelliteElement("sat-y", 550.0, 53.0, 0, 0, 40.0, 17.0)
    period = 2 * math.pi * math.sqrt((6371.0 + 550.0) ** 3 / 398600.4418)
    assert orbital_period(550.0) == pytest.approx(period)
    p0 = positions_ecef([el], 0.0)[0]
    p1 = positions_ecef([el], period)[0]
    # undo the Earth rotation accumulated over one period
    th = math.radians(EARTH_ROTATION_DEG_S * period)
    inertial = np.array([math.cos(th) * p1[0] - math.sin(th) * p1[1],
                         math.sin(th) * p1[0] + math.cos(th) * p1[1], p1[2]])
    np.testing.assert_allclose(inertial, p0, atol=1e-6)
    assert np.linalg.norm(p1 - p0) > 1.0


def test_full_shell_radius():
    pos = positions_ecef(walker_delta(ConstellationConfig()), 1234.5)
    assert pos.shape == (1000, 3)
    norms = np.linalg.norm(pos, axis=1)
    assert np.all(np.abs(norms - 6921.0) <= 0.1)


def test_zenith_visible_and_antipode_not():
    site = make_site("Quito", 0.0, -78.5)
    up = site.position_km / EARTH_RADIUS_KM
    assert visible(up * 6921.0, site, 25.0)
    assert elevation_deg(up * 6921.0, site) == pytest.approx(90.0)
    assert not visible(-up * 6921.0, site, 25.0)


def spherical_elevation(altitude_km, ground_range_km, radius=6371.0):
    # elevation from the central angle between the site and the sub-satellite point
    gamma = ground_range_km / radius
    r = radius + altitude_km
    return math.degrees(math.atan2(r * math.cos(gamma) - radius, r * math.sin(gamma)))


def test_ground_range_1000km_below_mask():
    site = make_site("Origin", 0.0, 0.0)
    lon = math.degrees(1000.0 / EARTH_RADIUS_KM)
    sat = 6921.0 * np.array([math.cos(math.radians(lon)), math.sin(math.radians(lon)), 0.0])
    expected = spherical_elevation(550.0, 1000.0)
    assert elevation_deg(sat, site) == pytest.approx(expected, abs=1e-9)
    assert 20.0 < expected < 25.0
    assert not visible(sat, site, 25.0)
    assert visible(sat, site, 20.0)


def test_adjacent_in_plane_pair_has_isl():
    cfg = ConstellationConfig(num_satellites=10, num_planes=1)
    snap = build_snapshot(cfg, None, (), 0, 10.0)
    assert snap.edge_between("sat-0000", "sat-0001") is not None
    assert len(snap.edges) == 10


def test_isl_blocked_by_earth():
    # two satellites half an orbit apart: the chord passes through the Earth
    cfg = ConstellationConfig(num_satellites=2, num_planes=1)
    snap = build_snapshot(cfg, None, (), 0, 10.0)
    assert snap.edges == ()


def test_snapshot_deterministic():
    cfg = ConstellationConfig(rng_seed=42)
    a = build_snapshot(cfg, None, SITES, 3, 10.0)
    b = build_snapshot(cfg, walker_delta(cfg), SITES, 3, 10.0)
    assert a.edges == b.edges
    assert a.vertices == b.vertices


def test_grid_plus_degree_and_vertices():
    cfg = ConstellationConfig()
    snap = build_snapshot(cfg, None, SITES, 0, 10.0)
    assert len(snap.vertices) == 1000 + len(SITES)
    deg = Counter()
    for e in snap.edges:
        if e.u.startswith("sat-") and e.v.startswith("sat-"):
            deg[e.u] += 1
            deg[e.v] += 1
    assert max(deg.values()) <= 4
    assert sum(deg.values()) > 3000


def test_bandwidths_in_range_and_seed_dependent():
    cfg = ConstellationConfig(min_mbps=10.0, max_mbps=30.0, rng_seed=7)
    a = build_snapshot(cfg, None, SITES, 5, 10.0)
    b = build_snapshot(cfg.with_seed(8), None, SITES, 5, 10.0)
    bws = np.array([e.bandwidth_mbps for e in a.edges])
    assert bws.min() >= 10.0 and bws.max() <= 30.0
    assert [(e.u, e.v) for e in a.edges] == [(e.u, e.v) for e in b.edges]
    assert any(x.bandwidth_mbps != y.bandwidth_mbps for x, y in zip(a.edges, b.edges))


def test_ground_links_respect_mask():
    cfg = ConstellationConfig()
    snap = build_snapshot(cfg, None, SITES, 2, 10.0)
    pos = dict(propagate(walker_delta(cfg), 20.0))
    by_id = {s.id: s for s in SITES}
    ground = [e for e in snap.edges if e.v in by_id]
    assert ground
    for e in ground:
        assert elevation_deg(pos[e.u], by_id[e.v]) >= 25.0
    linked = {(e.u, e.v) for e in ground}
    for sid, site in by_id.items():
        for sat, p in pos.items():
            if elevation_deg(p, site) >= 25.0 + 1e-9:
                assert (sat, sid) in linked


def test_keyed_draws_ignore_edge_order():
    a = np.array([3, 9, 1, 500])
    b = np.array([7, 2, 400, 6])
    fwd = keyed_uniform(11, 4, a, b)
    rev = keyed_uniform(11, 4, b[::-1], a[::-1])[::-1]
    np.testing.assert_array_equal(fwd, rev)
    assert np.all((fwd >= 0) & (fwd < 1))


def test_lazy_matches_eager():
    cfg = ConstellationConfig(rng_seed=3)
    lazy = build_temporal_graph(cfg, SITES, 10.0, 3)
    eager = build_temporal_graph(cfg, SITES, 10.0, 3, lazy=False)
    for i in range(3):
        assert lazy[i].edges == eager[i].edges


@pytest.mark.parametrize("kwargs", [dict(num_satellites=1001), dict(min_mbps=0.0), dict(min_mbps=40.0),
                                    dict(isl_pattern="ring")])
def test_config_invariants(kwargs):
    with pytest.raises(ValueError):
        ConstellationConfig(**kwargs)
