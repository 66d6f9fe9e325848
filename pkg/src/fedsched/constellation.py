"""Walker-delta LEO shell, ground sites and per-window connectivity."""
from __future__ import annotations

import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .temporal_graph import Edge, SnapshotGraph, TemporalGraph

EARTH_RADIUS_KM = 6371.0
MU_EARTH_KM3_S2 = 398600.4418
EARTH_ROTATION_DEG_S = 360.0 / 86164.0
SPEED_OF_LIGHT_KM_S = 299792.458


@dataclass(frozen=True)
class SatelliteElement:
    id: str
    altitude_km: float
    inclination_deg: float
    plane_index: int
    slot_index: int
    raan_deg: float
    phase_deg: float

    def __post_init__(self):
        if not 300.0 <= self.altitude_km <= 2000.0:
            raise ValueError(f"{self.id}: altitude {self.altitude_km} km outside the LEO band")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError(f"{self.id}: inclination out of range")
        if not (0.0 <= self.raan_deg < 360.0 and 0.0 <= self.phase_deg < 360.0):
            raise ValueError(f"{self.id}: raan/phase must lie in [0, 360)")

    @property
    def radius_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km

    @property
    def period_s(self) -> float:
        return orbital_period(self.altitude_km)


def orbital_period(altitude_km: float) -> float:
    a = EARTH_RADIUS_KM + altitude_km
    return 2.0 * math.pi * math.sqrt(a ** 3 / MU_EARTH_KM3_S2)


@dataclass(frozen=True)
class GroundSite:
    id: str
    name: str
    latitude_deg: float
    longitude_deg: float
    role: str = "client"

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"site {self.name!r}: latitude out of range")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"site {self.name!r}: longitude out of range")
        if self.role not in ("server", "client"):
            raise ValueError(f"site {self.name!r}: role must be 'server' or 'client'")

    @property
    def position_km(self) -> np.ndarray:
        lat = math.radians(self.latitude_deg)
        lon = math.radians(self.longitude_deg)
        return EARTH_RADIUS_KM * np.array(
            [math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)]
        )


def site_id(name: str) -> str:
    return "gs-" + re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def make_site(name: str, lat: float, lon: float, role: str = "client") -> GroundSite:
    return GroundSite(site_id(name), name, float(lat), float(lon), role)


@dataclass(frozen=True)
class ConstellationConfig:
    num_satellites: int = 1000
    num_planes: int = 25
    altitude_km: float = 550.0
    inclination_deg: float = 53.0
    isl_pattern: str = "grid_plus"
    elevation_mask_deg: float = 25.0
    min_mbps: float = 10.0
    max_mbps: float = 30.0
    rng_seed: int = 0
    phase_factor: int = 1

    def __post_init__(self):
        if self.num_planes < 1 or self.num_satellites < 1:
            raise ValueError("num_satellites and num_planes must be positive")
        if self.num_satellites % self.num_planes:
            raise ValueError("num_satellites must be divisible by num_planes")
        if not 0 < self.min_mbps <= self.max_mbps:
            raise ValueError("bandwidth bounds need 0 < min_mbps <= max_mbps")
        if self.isl_pattern != "grid_plus":
            raise ValueError(f"unsupported isl_pattern {self.isl_pattern!r}")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ValueError("rng_seed must fit in an unsigned 64-bit integer")

    @property
    def sats_per_plane(self) -> int:
        return self.num_satellites // self.num_planes

    def with_seed(self, seed: int) -> ConstellationConfig:
        return replace(self, rng_seed=int(seed))


def walker_delta(config: ConstellationConfig) -> list[SatelliteElement]:
    """Elements of a Walker-delta shell ``i: N/P/F``."""
    n, p, f = config.num_satellites, config.num_planes, config.phase_factor
    s = config.sats_per_plane
    width = max(4, len(str(n - 1)))
    out = []
    for plane in range(p):
        raan = (360.0 * plane / p) % 360.0
        for slot in range(s):
            phase = (360.0 * slot / s + 360.0 * f * plane / n) % 360.0
            out.append(SatelliteElement(
                id=f"sat-{plane * s + slot:0{width}d}",
                altitude_km=config.altitude_km,
                inclination_deg=config.inclination_deg,
                plane_index=plane,
                slot_index=slot,
                raan_deg=raan,
                phase_deg=phase,
            ))
    return out


def _element_arrays(elements):
    radius = np.array([e.radius_km for e in elements])
    inc = np.radians([e.inclination_deg for e in elements])
    raan = np.radians([e.raan_deg for e in elements])
    phase = np.radians([e.phase_deg for e in elements])
    return radius, inc, raan, phase


def positions_ecef(elements: Sequence[SatelliteElement], epoch_s: float) -> np.ndarray:
    """(N, 3) array of Earth-fixed positions in km on circular orbits."""
    if epoch_s < 0:
        raise ValueError("epoch_s must be non-negative")
    if not elements:
        return np.zeros((0, 3))
    radius, inc, raan, phase = _element_arrays(elements)
    mean_motion = np.sqrt(MU_EARTH_KM3_S2 / radius ** 3)
    u = phase + mean_motion * epoch_s
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    ci, si = np.cos(inc), np.sin(inc)
    x = radius * (co * cu - so * su * ci)
    y = radius * (so * cu + co * su * ci)
    z = radius * (su * si)
    theta = math.radians(EARTH_ROTATION_DEG_S * epoch_s)
    ct, st = math.cos(theta), math.sin(theta)
    return np.column_stack([ct * x + st * y, -st * x + ct * y, z])


def propagate(elements: Sequence[SatelliteElement], epoch_s: float) -> list[tuple[str, np.ndarray]]:
    pos = positions_ecef(elements, epoch_s)
    return [(e.id, pos[i]) for i, e in enumerate(elements)]


def elevation_deg(sat_pos, site: GroundSite) -> float:
    ground = site.position_km
    los = np.asarray(sat_pos, dtype=float) - ground
    rng = float(np.linalg.norm(los))
    if rng == 0.0:
        return 90.0
    up = ground / EARTH_RADIUS_KM
    return math.degrees(math.asin(max(-1.0, min(1.0, float(los @ up) / rng))))


def visible(sat_pos, site: GroundSite, elevation_mask_deg: float) -> bool:
    return elevation_deg(sat_pos, site) >= elevation_mask_deg


def _elevations(sat_pos: np.ndarray, site_pos: np.ndarray) -> np.ndarray:
    """(num_sats, num_sites) elevation angles in degrees."""
    los = sat_pos[:, None, :] - site_pos[None, :, :]
    rng = np.linalg.norm(los, axis=2)
    up = site_pos / EARTH_RADIUS_KM
    sin_el = np.einsum("ijk,jk->ij", los, up) / rng
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def _segment_clears_earth(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """True where the straight segment a->b stays above the Earth's surface."""
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.clip(-np.einsum("ij,ij->i", a, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    closest = a + t[:, None] * d
    return np.linalg.norm(closest, axis=1) > EARTH_RADIUS_KM


def grid_plus_pairs(config: ConstellationConfig) -> np.ndarray:
    """Candidate ISL index pairs (i < j): ring within each plane plus same slot in the next plane."""
    p, s = config.num_planes, config.sats_per_plane
    pairs = set()
    for plane in range(p):
        for slot in range(s):
            i = plane * s + slot
            if s > 1:
                j = plane * s + (slot + 1) % s
                if i != j:
                    pairs.add((min(i, j), max(i, j)))
            if p > 1:
                j = ((plane + 1) % p) * s + slot
                if i != j:
                    pairs.add((min(i, j), max(i, j)))
    return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)


_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser; uint64 arithmetic wraps modulo 2**64
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, window_index: int, a, b) -> np.ndarray:
    """Uniform [0, 1) draws keyed by (seed, window, unordered endpoint pair).

    Each draw depends only on its own key, so edge enumeration order cannot
    change any sampled value.
    """
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    with np.errstate(over="ignore"):
        h = _mix64(np.full(lo.shape, seed, dtype=np.uint64))
        h = _mix64(h ^ np.uint64(window_index))
        h = _mix64(h ^ lo)
        h = _mix64(h ^ hi)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 2 ** 53)


@dataclass(frozen=True)
class _WindowGeometry:
    pairs: np.ndarray  # (E, 2) node indices, i < j
    distance_km: np.ndarray


@lru_cache(maxsize=4096)
def _window_geometry(geo_key, sites, epoch_s) -> _WindowGeometry:
    elements, isl = _shell(geo_key)
    sat = positions_ecef(elements, epoch_s)
    n = len(elements)

    if len(isl):
        ok = _segment_clears_earth(sat[isl[:, 0]], sat[isl[:, 1]])
        isl = isl[ok]
    isl_dist = np.linalg.norm(sat[isl[:, 0]] - sat[isl[:, 1]], axis=1) if len(isl) else np.zeros(0)

    if sites:
        site_pos = np.array([s.position_km for s in sites])
        elev = _elevations(sat, site_pos)
        si, gj = np.nonzero(elev >= dict(geo_key)["elevation_mask_deg"])
        ground = np.column_stack([si, n + gj]).astype(np.int64)
        ground_dist = np.linalg.norm(sat[si] - site_pos[gj], axis=1)
    else:
        ground = np.zeros((0, 2), dtype=np.int64)
        ground_dist = np.zeros(0)

    pairs = np.vstack([isl.reshape(-1, 2), ground])
    dist = np.concatenate([isl_dist, ground_dist])
    return _WindowGeometry(pairs, dist)


@lru_cache(maxsize=64)
def _shell(geo_key):
    """Elements and candidate ISL pairs of a shell; both are independent of time and seed."""
    config = ConstellationConfig(**dict(geo_key))
    pairs = grid_plus_pairs(config)
    pairs.setflags(write=False)
    return tuple(walker_delta(config)), pairs


def _geometry_key(config: ConstellationConfig):
    # everything except the seed and bandwidth bounds fixes the geometry
    return tuple(sorted(
        (k, v) for k, v in vars(config).items() if k not in ("rng_seed", "min_mbps", "max_mbps")
    ))


def node_ids(config: ConstellationConfig, sites: Sequence[GroundSite]) -> list[str]:
    return [e.id for e in walker_delta(config)] + [s.id for s in sites]


def build_snapshot(
    config: ConstellationConfig,
    elements: Sequence[SatelliteElement] | None,
    sites: Sequence[GroundSite],
    window_index: int,
    window_length_s: float,
) -> SnapshotGraph:
    """Connectivity at the start of window ``window_index``.

    ``elements`` must be ``walker_delta(config)`` (or None to derive it);
    the geometry is cached per window and shared across seeds.
    """
    if window_index < 0:
        raise ValueError("window_index must be non-negative")
    sites = tuple(sites)
    geo_key = _geometry_key(config)
    shell = _shell(geo_key)[0]
    if elements is not None and [e.id for e in elements] != [e.id for e in shell]:
        raise ValueError("elements do not match the configured Walker shell")
    ids = [e.id for e in shell] + [s.id for s in sites]
    if len(set(ids)) != len(ids):
        raise ValueError("node identifiers must be unique")

    epoch = window_index * window_length_s
    geo = _window_geometry(geo_key, sites, epoch)
    draws = keyed_uniform(config.rng_seed, window_index, geo.pairs[:, 0], geo.pairs[:, 1])
    bw = config.min_mbps + (config.max_mbps - config.min_mbps) * draws
    delay_ms = geo.distance_km / SPEED_OF_LIGHT_KM_S * 1e3
    edges = tuple(
        Edge(ids[i], ids[j], float(b), float(d))
        for (i, j), b, d in zip(geo.pairs.tolist(), bw.tolist(), delay_ms.tolist())
    )
    return SnapshotGraph(
        window_index=window_index,
        window_start_s=epoch,
        window_length_s=window_length_s,
        vertices=frozenset(ids),
        edges=edges,
    )


@dataclass(eq=False)
class LazySnapshots(Sequence):
    """Snapshots built on first access and memoised."""

    config: ConstellationConfig
    sites: tuple
    window_length_s: float
    num_windows: int
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return self.num_windows

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(self.num_windows))]
        if index < 0:
            index += self.num_windows
        if not 0 <= index < self.num_windows:
            raise IndexError(index)
        snap = self._cache.get(index)
        if snap is None:
            snap = build_snapshot(self.config, None, self.sites, index, self.window_length_s)
            self._cache[index] = snap
        return snap


def build_temporal_graph(
    config: ConstellationConfig,
    sites: Sequence[GroundSite],
    window_length_s: float = 10.0,
    num_windows: int = 1,
    lazy: bool = True,
) -> TemporalGraph:
    if num_windows < 1:
        raise ValueError("num_windows must be >= 1")
    snaps = LazySnapshots(config, tuple(sites), float(window_length_s), int(num_windows))
    if not lazy:
        snaps = [snaps[i] for i in range(num_windows)]
    return TemporalGraph(snaps, float(window_length_s))
