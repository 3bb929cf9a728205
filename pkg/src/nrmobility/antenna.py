"""Sector antenna: parabolic element pattern, uniform planar array, grid of beams.

Angles are in degrees in the sector-local frame: azimuth 0 is the sector
boresight, zenith 90 is the horizon and grows towards the ground.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# rows x cols per total element count
DEFAULT_ARRAY_SHAPES: dict[int, tuple[int, int]] = {
    1: (1, 1),
    16: (2, 8),
    32: (4, 8),
    64: (8, 8),
    128: (8, 16),
}


@dataclass(frozen=True)
class ElementPattern:
    max_gain: float = 8.0
    theta_3db: float = 65.0
    phi_3db: float = 65.0
    max_attenuation: float = 30.0
    sla_v: float = 30.0


@dataclass(frozen=True)
class ArrayGeometry:
    rows: int
    cols: int
    spacing_v: float = 0.5
    spacing_h: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"array needs rows >= 1 and cols >= 1, got {self.rows}x{self.cols}")
        if self.spacing_v <= 0 or self.spacing_h <= 0:
            raise ValueError("element spacing must be > 0")

    @property
    def total_elements(self) -> int:
        return self.rows * self.cols

    @classmethod
    def for_elements(cls, n: int, shapes: dict[int, tuple[int, int]] | None = None, **kw) -> "ArrayGeometry":
        shapes = DEFAULT_ARRAY_SHAPES if shapes is None else shapes
        if n not in shapes:
            raise ValueError(f"no array shape configured for {n} elements")
        rows, cols = shapes[n]
        return cls(rows, cols, **kw)


@dataclass(frozen=True)
class Beam:
    beam_id: int
    steer_azimuth: float
    steer_zenith: float
    weights: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class GridOfBeams:
    geometry: ArrayGeometry
    beams: tuple[Beam, ...]
    pattern: ElementPattern = ElementPattern()

    def __len__(self):
        return len(self.beams)

    @property
    def weight_matrix(self) -> np.ndarray:
        """(n_beams, n_elements) stacked weight vectors."""
        return np.stack([b.weights for b in self.beams])

    def gains(self, azimuth, zenith) -> np.ndarray:
        """Gain in dBi of every beam towards each direction, shape (..., n_beams)."""
        az = np.asarray(azimuth, dtype=float)
        zen = np.asarray(zenith, dtype=float)
        a = steering_vector(self.geometry, az, zen)
        af = np.abs(a @ self.weight_matrix.conj().T) ** 2
        with np.errstate(divide="ignore"):
            af_db = 10.0 * np.log10(np.maximum(af, 1e-30))
        return element_gain(az, zen, self.pattern)[..., None] + af_db


def _check_angles(azimuth, zenith):
    az = np.asarray(azimuth, dtype=float)
    zen = np.asarray(zenith, dtype=float)
    if np.any(np.abs(az) > 180.0) or np.any(zen < 0.0) or np.any(zen > 180.0):
        raise ValueError("azimuth must lie in [-180, 180] and zenith in [0, 180] degrees")
    return az, zen


def element_gain(azimuth, zenith, pattern: ElementPattern = ElementPattern()):
    """Parabolic 3-dB-beamwidth element pattern in dBi."""
    az, zen = _check_angles(azimuth, zenith)
    a_v = -np.minimum(12.0 * ((zen - 90.0) / pattern.theta_3db) ** 2, pattern.sla_v)
    a_h = -np.minimum(12.0 * (az / pattern.phi_3db) ** 2, pattern.max_attenuation)
    g = pattern.max_gain - np.minimum(-(a_v + a_h), pattern.max_attenuation)
    return float(g) if g.ndim == 0 else g


def steering_vector(geom: ArrayGeometry, azimuth, zenith) -> np.ndarray:
    """Planar-array response, unit-magnitude entries ordered row-major (m, n).

    Broadcasts over the angle arguments; the element axis is last.
    """
    az = np.deg2rad(np.asarray(azimuth, dtype=float))[..., None]
    zen = np.deg2rad(np.asarray(zenith, dtype=float))[..., None]
    m = np.repeat(np.arange(geom.rows), geom.cols)
    n = np.tile(np.arange(geom.cols), geom.rows)
    phase = 2.0 * np.pi * (
        geom.spacing_h * n * np.sin(zen) * np.sin(az) + geom.spacing_v * m * np.cos(zen)
    )
    return np.exp(1j * phase)


def matched_beam(beam_id: int, geom: ArrayGeometry, azimuth: float, zenith: float) -> Beam:
    """Beam whose weights are the normalized steering vector of its own direction.

    The Hermitian product in :func:`beam_gain` supplies the conjugation, so the
    array term peaks at exactly ``total_elements`` towards the steering direction.
    """
    w = steering_vector(geom, azimuth, zenith)
    return Beam(beam_id, float(azimuth), float(zenith), w / np.linalg.norm(w))


def array_factor(beam: Beam, geom: ArrayGeometry, azimuth, zenith):
    """Linear power array term |w^H a|^2."""
    a = steering_vector(geom, azimuth, zenith)
    return np.abs(a @ beam.weights.conj()) ** 2


def beam_gain(beam: Beam, geom: ArrayGeometry, azimuth, zenith, pattern: ElementPattern = ElementPattern()):
    af = array_factor(beam, geom, azimuth, zenith)
    g = element_gain(azimuth, zenith, pattern) + 10.0 * np.log10(np.maximum(af, 1e-30))
    return float(g) if np.ndim(g) == 0 else g


def _centers(lo: float, hi: float, count: int) -> np.ndarray:
    width = (hi - lo) / count
    return lo + width * (np.arange(count) + 0.5)


def build_grid(
    geom: ArrayGeometry,
    azimuth_span: tuple[float, float] = (-60.0, 60.0),
    zenith_span: tuple[float, float] = (90.0, 102.0),
    zenith_beams: int | None = None,
    oversampling: int = 1,
    azimuth_layout: str = "sine",
    pattern: ElementPattern = ElementPattern(),
) -> GridOfBeams:
    """Grid of beams covering the sector.

    ``cols * oversampling`` azimuth steerings partition ``azimuth_span`` into equal
    slots, either in angle (``azimuth_layout="angle"``) or in sin(azimuth)
    (``"sine"``, the DFT-style spacing whose crossover loss stays under 3 dB).
    ``zenith_beams`` (default: ``rows``) zenith steerings partition ``zenith_span``
    in angle. A single-element array yields one boresight beam.
    """
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    if azimuth_layout not in ("angle", "sine"):
        raise ValueError(f"unknown azimuth layout {azimuth_layout!r}")
    n_az = geom.cols * oversampling if geom.cols > 1 else 1
    n_zen = geom.rows if zenith_beams is None else min(zenith_beams, geom.rows)
    n_zen = max(n_zen, 1) * (oversampling if geom.rows > 1 else 1)
    if n_az == 1:
        az_c = np.array([0.0])
    elif azimuth_layout == "angle":
        az_c = _centers(*azimuth_span, n_az)
    else:
        u_lo, u_hi = np.sin(np.deg2rad(azimuth_span))
        az_c = np.rad2deg(np.arcsin(_centers(u_lo, u_hi, n_az)))
    if n_zen > 1:
        zen_c = _centers(*zenith_span, n_zen)
    elif geom.total_elements > 1:
        zen_c = np.array([0.5 * (zenith_span[0] + zenith_span[1])])
    else:
        zen_c = np.array([90.0])
    beams = []
    for zen in zen_c:
        for az in az_c:
            beams.append(matched_beam(len(beams), geom, az, zen))
    return GridOfBeams(geom, tuple(beams), pattern)
