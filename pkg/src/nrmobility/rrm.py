"""RRM measurement model: per-beam L1 filtering, N-best-beam cell consolidation, L3 filtering.

Beam-level L1 and cell consolidation average in linear power (mW); the L3
filter runs on dB values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RrmConfig


def to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def to_dbm(mw):
    return 10.0 * np.log10(mw)


def l1_filter(samples, window: int) -> float:
    """Linear-domain moving average of the last ``window`` samples, in dBm."""
    samples = list(samples)
    if not samples:
        raise ValueError("l1_filter needs at least one sample")
    if window < 1:
        raise ValueError("window must be >= 1")
    return float(to_dbm(np.mean(to_mw(samples[-window:]))))


def l3_coefficient(k: int) -> float:
    return 1.0 / 2.0 ** (k / 4.0)


def l3_filter(prev, meas: float, k: int) -> float:
    """One step of F_n = (1 - a) F_{n-1} + a M_n; ``prev=None`` initializes to ``meas``."""
    if k < 0:
        raise ValueError("filter coefficient index k must be >= 0")
    if prev is None or np.isnan(prev):
        return float(meas)
    a = l3_coefficient(k)
    return float((1.0 - a) * prev + a * meas)


@dataclass(frozen=True)
class BeamMeasurement:
    cell_id: int
    beam_id: int
    raw_rsrp: float
    l1_rsrp: float
    l3_rsrp: float
    last_seen: float


@dataclass(frozen=True)
class CellQuality:
    cell_id: int
    consolidated_rsrp: float
    l3_cell_rsrp: float
    contributing_beams: tuple[int, ...]
    fallback: bool = False


def consolidate_cell_quality(beams, cfg: RrmConfig, cell_id: int = -1, prev_l3=None) -> CellQuality:
    """Cell quality from (beam_id, l1_rsrp) pairs.

    Averages (in mW) the up-to-N strongest beams at or above the absolute
    threshold; if none clears it, the best single beam is used. The L3 cell
    value is filtered from ``prev_l3``.
    """
    beams = list(beams)
    if not beams:
        raise ValueError("consolidation needs at least one beam")
    ranked = sorted(beams, key=lambda b: (-b[1], b[0]))
    above = [b for b in ranked if b[1] >= cfg.abs_threshold][: cfg.n_best_beams]
    fallback = not above
    used = ranked[:1] if fallback else above
    value = float(to_dbm(np.mean(to_mw([b[1] for b in used]))))
    return CellQuality(cell_id, value, l3_filter(prev_l3, value, cfg.l3_k),
                       tuple(int(b[0]) for b in used), fallback)


@dataclass(frozen=True)
class MeasurementReport:
    time: float
    ue_id: int
    serving: tuple[int, float]
    neighbors: tuple[tuple[int, float], ...]
    beams: dict = field(default_factory=dict)

    def rows(self):
        """Flat (time, ue_id, cell, kind, beam_id, rsrp) rows, serving cell first."""
        for cell, q in (self.serving, *self.neighbors):
            yield (self.time, self.ue_id, cell, "cell", -1, q)
            for beam_id, v in self.beams.get(cell, ()):
                yield (self.time, self.ue_id, cell, "beam", beam_id, v)


def build_report(ue_id: int, now: float, serving_cell: int, cells, beam_l3: dict, cfg: RrmConfig) -> MeasurementReport:
    """Serving and neighbour L3 cell qualities plus the best contributing beams per cell.

    ``beam_l3`` maps (cell, beam) to the L3 beam RSRP.
    """
    by_cell = {c.cell_id: c for c in cells}
    if serving_cell not in by_cell:
        raise ValueError("serving cell missing from the measured cells")
    beams = {}
    if cfg.report_max_beams > 0:
        for c in cells:
            entries = sorted(((b, beam_l3[(c.cell_id, b)]) for b in c.contributing_beams),
                             key=lambda e: (-e[1], e[0]))
            beams[c.cell_id] = tuple(entries[: cfg.report_max_beams])
    serving = (serving_cell, by_cell[serving_cell].l3_cell_rsrp)
    neighbors = tuple(sorted(((c.cell_id, c.l3_cell_rsrp) for c in cells if c.cell_id != serving_cell),
                             key=lambda e: (-e[1], e[0])))
    return MeasurementReport(now, ue_id, serving, neighbors, beams)


class UeRrm:
    """Per-UE measurement state over every (cell, beam) of the deployment.

    Sample histories for L1 live in a ring buffer of linear powers. At sweep
    instants the UE measures all beams above ``ue_detectable_threshold`` and
    keeps the ``n_best_beams`` strongest (by L1) of each cell; between sweeps
    only the serving beam receives new samples and no new beam is found.
    """

    def __init__(self, n_cells: int, n_beams: int, cfg: RrmConfig):
        self.cfg = cfg
        w = cfg.l1_window
        self.hist = np.full((w, n_cells, n_beams), np.nan)
        self.head = np.zeros((n_cells, n_beams), dtype=int)
        self.raw = np.full((n_cells, n_beams), np.nan)
        self.l1 = np.full((n_cells, n_beams), np.nan)
        self.l3 = np.full((n_cells, n_beams), np.nan)
        self.last_seen = np.full((n_cells, n_beams), np.nan)
        self.retained = np.zeros((n_cells, n_beams), dtype=bool)
        self.cell_l3 = np.full(n_cells, np.nan)
        self.last_sweep: float | None = None

    def _record(self, mask: np.ndarray, true_rsrp: np.ndarray, now: float):
        cs, bs = np.nonzero(mask)
        self.hist[self.head[cs, bs], cs, bs] = to_mw(true_rsrp[cs, bs])
        self.head[cs, bs] = (self.head[cs, bs] + 1) % self.cfg.l1_window
        self.raw[cs, bs] = true_rsrp[cs, bs]
        self.last_seen[cs, bs] = now
        self.l1[cs, bs] = to_dbm(np.nanmean(self.hist[:, cs, bs], axis=0))

    def _forget(self, mask: np.ndarray):
        self.hist[:, mask] = np.nan
        self.head[mask] = 0
        self.l1[mask] = np.nan
        self.raw[mask] = np.nan

    def is_sweep(self, now: float) -> bool:
        return self.last_sweep is None or now - self.last_sweep >= self.cfg.sweep_period - 1e-9

    def measure(self, true_rsrp: np.ndarray, now: float, serving: tuple[int, int] | None = None) -> bool:
        """Take this step's samples; returns True when it was a sweep instant."""
        sweep = self.is_sweep(now)
        if sweep:
            self.last_sweep = now
            detected = true_rsrp >= self.cfg.ue_detectable_threshold
            if serving is not None:
                detected[serving] = True
            self._forget(~detected)
            self._record(detected, true_rsrp, now)
            rank = np.where(detected, self.l1, -np.inf)
            n = min(self.cfg.n_best_beams, rank.shape[1])
            # stable: ties resolved towards lower beam ids
            top = np.argsort(-rank, axis=1, kind="stable")[:, :n]
            keep = np.zeros_like(self.retained)
            np.put_along_axis(keep, top, True, axis=1)
            keep &= detected
            if serving is not None:
                keep[serving] = True
            self.l3[~keep] = np.nan
            self.retained = keep
        elif serving is not None:
            mask = np.zeros_like(self.retained)
            mask[serving] = True
            self.retained[serving] = True
            self._record(mask, true_rsrp, now)
        updated = self.last_seen == now
        a = l3_coefficient(self.cfg.l3_k)
        upd = updated & self.retained
        fresh = upd & np.isnan(self.l3)
        self.l3[upd] = (1.0 - a) * self.l3[upd] + a * self.l1[upd]
        self.l3[fresh] = self.l1[fresh]
        return sweep

    def measured_beams(self) -> list[BeamMeasurement]:
        cs, bs = np.nonzero(self.retained)
        return [BeamMeasurement(int(c), int(b), float(self.raw[c, b]), float(self.l1[c, b]),
                                float(self.l3[c, b]), float(self.last_seen[c, b])) for c, b in zip(cs, bs)]

    def measured_cells(self) -> list[int]:
        return [int(c) for c in np.nonzero(self.retained.any(axis=1))[0]]

    def cell_qualities(self) -> list[CellQuality]:
        """Consolidate and L3-filter every cell that has retained beams."""
        out = []
        for c in self.measured_cells():
            bs = np.nonzero(self.retained[c])[0]
            q = consolidate_cell_quality(zip(bs.tolist(), self.l1[c, bs].tolist()), self.cfg, c,
                                         None if np.isnan(self.cell_l3[c]) else self.cell_l3[c])
            self.cell_l3[c] = q.l3_cell_rsrp
            out.append(q)
        return out

    def best_beam(self, cell: int) -> int | None:
        row = np.where(self.retained[cell], self.l1[cell], -np.inf)
        if not np.isfinite(row).any():
            return None
        return int(np.argmax(row))

    def best_l1(self) -> float:
        return float(np.max(np.where(self.retained, self.l1, -np.inf)))


def ue_measured_beams(true_rsrp: np.ndarray, state: UeRrm, now: float,
                      serving: tuple[int, int] | None = None) -> list[BeamMeasurement]:
    """Advance ``state`` with this step's true per-beam RSRP and return the UE's beam set."""
    state.measure(true_rsrp, now, serving)
    return state.measured_beams()
