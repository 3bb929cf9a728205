"""Large-scale channel: UMa pathloss, LOS probability, correlated shadowing, O2I loss."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .antenna import Beam, ArrayGeometry, ElementPattern, beam_gain
from .config import ChannelConfig

# NR transmission bandwidth configuration (PRBs) per SCS [kHz] and channel bandwidth [MHz]
N_PRB = {
    15: {5: 25, 10: 52, 15: 79, 20: 106, 25: 133, 30: 160, 40: 216, 50: 270},
    30: {5: 11, 10: 24, 15: 38, 20: 51, 25: 65, 30: 78, 40: 106, 50: 133, 60: 162,
         70: 189, 80: 217, 90: 245, 100: 273},
    60: {10: 11, 15: 18, 20: 24, 25: 31, 30: 38, 40: 51, 50: 65, 60: 79, 70: 93,
         80: 107, 90: 121, 100: 135},
    120: {50: 32, 100: 66, 200: 132, 400: 264},
}


def n_prb(bandwidth_mhz: float, scs_khz: float) -> int:
    try:
        return N_PRB[int(scs_khz)][int(bandwidth_mhz)]
    except KeyError:
        raise ValueError(f"no PRB allocation for {bandwidth_mhz} MHz at {scs_khz} kHz SCS") from None


def re_power(tx_power_dbm: float, prb: int) -> float:
    """Per-resource-element transmit power in dBm (total power spread over 12 * prb REs)."""
    return tx_power_dbm - 10.0 * np.log10(12 * prb)


def pathloss(d3d, fc_ghz: float, los, ue_height: float = 1.5):
    """UMa pathloss in dB, below-breakpoint LOS branch and the clamped NLOS branch."""
    d3d = np.asarray(d3d, dtype=float)
    if np.any(d3d < 1.0):
        raise ValueError("pathloss model valid for d3d >= 1 m")
    if fc_ghz <= 0:
        raise ValueError("carrier frequency must be > 0")
    pl_los = 28.0 + 22.0 * np.log10(d3d) + 20.0 * np.log10(fc_ghz)
    pl_nlos = 13.54 + 39.08 * np.log10(d3d) + 20.0 * np.log10(fc_ghz) - 0.6 * (ue_height - 1.5)
    pl = np.where(los, pl_los, np.maximum(pl_los, pl_nlos))
    return float(pl) if pl.ndim == 0 else pl


def los_probability(d2d):
    d2d = np.asarray(d2d, dtype=float)
    if np.any(d2d < 0):
        raise ValueError("d2d must be >= 0")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        far = 18.0 / d2d + np.exp(-d2d / 63.0) * (1.0 - 18.0 / d2d)
    p = np.where(d2d <= 18.0, 1.0, far)
    return float(p) if p.ndim == 0 else p


def penetration_loss(indoor: bool, depth: float, wall_loss: float = 20.0, depth_loss: float = 0.5) -> float:
    """Outdoor-to-indoor loss: fixed wall term plus a linear in-building term."""
    if depth < 0:
        raise ValueError("indoor depth must be >= 0")
    return wall_loss + depth_loss * depth if indoor else 0.0


def shadow_params(los: bool, ch: ChannelConfig) -> tuple[float, float]:
    """(std dB, decorrelation distance m) for the LOS state."""
    if los:
        return ch.shadow_std_los, ch.decorrelation_los
    return ch.shadow_std_nlos, ch.decorrelation_nlos


@dataclass(frozen=True)
class LinkState:
    """Large-scale state between one UE and one site (shared by the site's sectors)."""
    ue_id: int
    site_id: int
    d2d: float
    d3d: float
    los: bool
    shadow_db: float
    penetration_db: float
    last_update_position: tuple[float, float]
    los_anchor_d2d: float = 0.0
    rng: np.random.Generator | None = field(default=None, repr=False, compare=False)


def _distances(site_xy, ue_xy, bs_height: float, ue_height: float) -> tuple[float, float]:
    d2d = float(np.hypot(ue_xy[0] - site_xy[0], ue_xy[1] - site_xy[1]))
    return d2d, float(np.hypot(d2d, bs_height - ue_height))


def _draw_los(d2d: float, ch: ChannelConfig, rng) -> bool:
    if ch.los_mode == "los":
        return True
    if ch.los_mode == "nlos":
        return False
    return bool(rng.random() < los_probability(d2d))


def new_link(ue, site_id: int, site_xy, cfg, rng: np.random.Generator) -> LinkState:
    ch = cfg.channel
    d2d, d3d = _distances(site_xy, ue.position, cfg.bs_height, cfg.ue_height)
    los = _draw_los(d2d, ch, rng)
    std, _ = shadow_params(los, ch)
    shadow = float(rng.normal(0.0, std)) if ch.shadowing else 0.0
    pen = penetration_loss(ue.indoor, ue.indoor_depth, ch.wall_loss, ch.depth_loss)
    return LinkState(ue.ue_id, site_id, d2d, d3d, los, shadow, pen,
                     (float(ue.position[0]), float(ue.position[1])), d2d, rng)


def update_shadow(link: LinkState, new_position, rng, ch: ChannelConfig = ChannelConfig()) -> LinkState:
    """Gauss-Markov step of the shadowing driven by the distance moved since the last update."""
    p0 = link.last_update_position
    moved = float(np.hypot(new_position[0] - p0[0], new_position[1] - p0[1]))
    pos = (float(new_position[0]), float(new_position[1]))
    if not ch.shadowing:
        return dataclasses.replace(link, shadow_db=0.0, last_update_position=pos)
    std, dcor = shadow_params(link.los, ch)
    rho = np.exp(-moved / dcor)
    if rho == 1.0:
        return dataclasses.replace(link, last_update_position=pos)
    s = rho * link.shadow_db + np.sqrt(1.0 - rho * rho) * rng.normal(0.0, std)
    return dataclasses.replace(link, shadow_db=float(s), last_update_position=pos)


def update_link(link: LinkState, ue, site_xy, cfg) -> LinkState:
    """Move a link to the UE's current position: geometry, LOS re-draw, shadow step."""
    ch = cfg.channel
    d2d, d3d = _distances(site_xy, ue.position, cfg.bs_height, cfg.ue_height)
    los, anchor = link.los, link.los_anchor_d2d
    _, dcor = shadow_params(los, ch)
    if abs(d2d - anchor) > dcor:
        los, anchor = _draw_los(d2d, ch, link.rng), d2d
    link = dataclasses.replace(link, d2d=d2d, d3d=d3d, los=los, los_anchor_d2d=anchor)
    return update_shadow(link, ue.position, link.rng, ch)


def link_loss(link: LinkState, fc_ghz: float, ue_height: float) -> float:
    """Everything subtracted from transmit power besides antenna gain."""
    return pathloss(max(link.d3d, 1.0), fc_ghz, link.los, ue_height) + link.shadow_db + link.penetration_db


def beam_rsrp(link: LinkState, beam: Beam, geom: ArrayGeometry, azimuth: float, zenith: float,
              p_re: float, fc_ghz: float, ue_height: float = 1.5,
              pattern: ElementPattern = ElementPattern()) -> float:
    """RSRP in dBm of one beam towards a UE seen at (azimuth, zenith) in the sector frame."""
    return p_re + beam_gain(beam, geom, azimuth, zenith, pattern) - link_loss(link, fc_ghz, ue_height)


def sector_angles(site_xy, bearing: float, ue_xy, bs_height: float, ue_height: float):
    """Sector-local (azimuth, zenith) in degrees of UE positions; broadcasts over ``ue_xy[..., 2]``."""
    ue_xy = np.asarray(ue_xy, dtype=float)
    dx = ue_xy[..., 0] - site_xy[0]
    dy = ue_xy[..., 1] - site_xy[1]
    az = np.rad2deg(np.arctan2(dy, dx)) - bearing
    az = (az + 180.0) % 360.0 - 180.0
    d2d = np.hypot(dx, dy)
    zen = 90.0 + np.rad2deg(np.arctan2(bs_height - ue_height, d2d))
    return az, zen
