"""Deployment geometry and UE population."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from shapely.geometry import MultiPoint, Point

from .antenna import ArrayGeometry
from .config import ScenarioConfig
from .mobility import aim

KMH_PER_MS = 3.6


@dataclass(frozen=True)
class SectorSite:
    site_id: int
    sector_id: int
    position: tuple[float, float]
    bearing: float
    downtilt: float
    array: ArrayGeometry


def site_positions(num_sites: int, isd: float) -> np.ndarray:
    """Site centres: 1 at origin, 2 on a segment, 3 on an equilateral triangle of side ``isd``.

    Larger counts take the lattice points of a triangular grid nearest the origin.
    """
    if num_sites == 1:
        return np.zeros((1, 2))
    if num_sites == 2:
        return np.array([[-isd / 2, 0.0], [isd / 2, 0.0]])
    if num_sites == 3:
        r = isd / np.sqrt(3.0)
        ang = np.deg2rad([90.0, 210.0, 330.0])
        return np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    k = int(np.ceil(np.sqrt(num_sites))) + 2
    i, j = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1))
    pts = np.column_stack([(i + 0.5 * j).ravel() * isd, (j * np.sqrt(3) / 2).ravel() * isd])
    order = np.lexsort((pts[:, 0], pts[:, 1], np.round(np.hypot(*pts.T), 6)))
    return pts[order[:num_sites]]


def build_deployment(cfg: ScenarioConfig, elements: int | None = None) -> list[SectorSite]:
    elements = cfg.antenna_elements if elements is None else elements
    geom = _geometry(cfg, elements)
    sectors = []
    for site_id, pos in enumerate(site_positions(cfg.num_sites, cfg.inter_site_distance)):
        for k in range(cfg.sectors_per_site):
            sectors.append(SectorSite(
                site_id=site_id,
                sector_id=len(sectors),
                position=(float(pos[0]), float(pos[1])),
                bearing=360.0 * k / cfg.sectors_per_site,
                downtilt=cfg.antenna.downtilt,
                array=geom,
            ))
    return sectors


def _geometry(cfg: ScenarioConfig, elements: int) -> ArrayGeometry:
    sv, sh = cfg.antenna.element_spacing
    if elements == 1:
        return ArrayGeometry(1, 1, sv, sh)
    return ArrayGeometry.for_elements(elements, cfg.antenna.array_shapes, spacing_v=sv, spacing_h=sh)


class Region:
    """Convex hull of the sites grown by ``margin``; UEs live and move inside it."""

    def __init__(self, sites: np.ndarray, margin: float, keepout: float = 0.0):
        self.sites = np.asarray(sites, dtype=float)
        self.shape = MultiPoint([tuple(p) for p in self.sites]).convex_hull.buffer(margin, quad_segs=32)
        self.keepout = keepout
        self.bounds = self.shape.bounds

    def contains(self, p) -> bool:
        return bool(self.shape.covers(Point(float(p[0]), float(p[1]))))

    def sample(self, rng: np.random.Generator, respect_keepout: bool = True) -> np.ndarray:
        xmin, ymin, xmax, ymax = self.bounds
        while True:
            p = np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
            if not self.contains(p):
                continue
            if respect_keepout and self.keepout > 0 and np.min(np.hypot(*(self.sites - p).T)) < self.keepout:
                continue
            return p


def deployment_region(cfg: ScenarioConfig) -> Region:
    return Region(site_positions(cfg.num_sites, cfg.inter_site_distance),
                  cfg.inter_site_distance / 2, cfg.channel.min_distance)


@dataclass
class UeState:
    ue_id: int
    position: np.ndarray
    velocity: np.ndarray
    speed: float
    indoor: bool
    indoor_depth: float = 0.0
    waypoint: np.ndarray | None = None
    serving_cell: int | None = None
    serving_beam: int | None = None
    rrm_state: Any = None
    traffic_state: Any = None
    rng: np.random.Generator | None = field(default=None, repr=False)


def place_ues(cfg: ScenarioConfig, rng: np.random.Generator, region: Region | None = None) -> list[UeState]:
    """Draw the UE population.

    Each UE gets its own child generator (for mobility) so UEs can be stepped
    independently. Serving cell/beam are left unset; the engine attaches each
    UE to its strongest beam once links exist.
    """
    region = deployment_region(cfg) if region is None else region
    lo, hi = cfg.ue_speed_range
    children = np.random.SeedSequence(int(rng.integers(2**63))).spawn(cfg.num_ues)
    ues = []
    for i in range(cfg.num_ues):
        pos = region.sample(rng)
        speed = (float(rng.uniform(lo, hi)) if hi > lo else lo) / KMH_PER_MS
        indoor = bool(rng.random() < cfg.indoor_fraction)
        depth = float(rng.uniform(0.0, cfg.channel.max_indoor_depth)) if indoor else 0.0
        ue = UeState(i, pos, np.zeros(2), speed, indoor, depth, rng=np.random.default_rng(children[i]))
        if speed > 0:
            aim(ue, region)
        ues.append(ue)
    return ues
