"""Time-stepped simulation loop, RSRP metrics, coverage maps and CSV output."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .antenna import ElementPattern, GridOfBeams, build_grid
from .channel import (link_loss, los_probability, n_prb, new_link, pathloss, re_power,
                      sector_angles, update_link)
from .config import ScenarioConfig, config_hash, config_to_dict
from .handover import (HandoverEvent, HandoverState, evaluate_trigger, execute_handover,
                       schedule_handover)
from .mobility import MBIT, new_session, step_position, step_traffic
from .rrm import MeasurementReport, UeRrm, build_report, to_mw
from .scenario import Region, SectorSite, UeState, build_deployment, deployment_region, place_ues

log = logging.getLogger(__name__)

METRICS_HEADER = ("time,ue_id,serving_cell,serving_beam,indoor,serving_rsrp_dbm,"
                  "best_rsrp_dbm,delta_rsrp_db,l3_serving_dbm,sinr_db")
EVENTS_HEADER = "time,ue_id,source,target,outcome"
REPORTS_HEADER = "time,ue_id,cell,kind,beam_id,rsrp_dbm"

_EPS = 1e-9


@dataclass(frozen=True)
class MetricsSample:
    time: float
    ue_id: int
    serving_cell: int
    serving_beam: int
    indoor: bool
    serving_rsrp: float
    best_rsrp: float
    delta_rsrp: float
    l3_serving: float
    sinr: float | None = None


@dataclass
class MetricsLog:
    samples: list[MetricsSample] = field(default_factory=list)
    events: list[HandoverEvent] = field(default_factory=list)
    reports: list[MeasurementReport] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str, indoor: bool | None = None) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples if indoor is None or s.indoor == indoor])

    def outcome_counts(self) -> dict[str, int]:
        counts = {"success": 0, "pingpong": 0, "failure": 0}
        for e in self.events:
            counts[e.outcome] += 1
        return counts


def sample_metrics(time: float, ue: UeState, network_rsrp: np.ndarray, rrm: UeRrm,
                   sinr: float | None = None) -> MetricsSample:
    """Serving / Best / Delta RSRP for one UE at one instant.

    Serving and Best come from the UE's L1-filtered beam set. Delta compares the
    network's best beam over the whole deployment with the best beam of the UE's
    (possibly stale) set, both at their current true RSRP, floored at 0.
    """
    c, b = ue.serving_cell, ue.serving_beam
    serving = float(rrm.l1[c, b])
    best = rrm.best_l1()
    ue_best_true = float(np.max(np.where(rrm.retained, network_rsrp, -np.inf)))
    delta = max(float(np.max(network_rsrp)) - ue_best_true, 0.0)
    if not best >= serving or not delta >= 0.0:
        raise RuntimeError(f"metric invariant violated for UE {ue.ue_id} at t={time}")
    return MetricsSample(time, ue.ue_id, c, b, ue.indoor, serving, best, delta,
                         float(rrm.cell_l3[c]), sinr)


def cdf(values) -> list[tuple[float, float]]:
    v = np.sort(np.asarray(list(values), dtype=float))
    if v.size == 0:
        raise ValueError("cdf of an empty sample")
    n = v.size
    return [(float(x), (i + 1) / n) for i, x in enumerate(v)]


def sector_grid(cfg: ScenarioConfig, sector: SectorSite) -> GridOfBeams:
    a = cfg.antenna
    half = 180.0 / cfg.sectors_per_site if cfg.sectors_per_site > 1 else 60.0
    centre = 90.0 + sector.downtilt
    return build_grid(
        sector.array,
        azimuth_span=(-half, half),
        zenith_span=(centre - a.zenith_span / 2, centre + a.zenith_span / 2),
        zenith_beams=a.zenith_beams or None,
        oversampling=a.oversampling,
        azimuth_layout=a.azimuth_layout,
        pattern=ElementPattern(a.max_gain, a.beamwidth_3db, a.beamwidth_3db, a.max_attenuation, a.max_attenuation),
    )


def _noise_dbm_per_re(cfg: ScenarioConfig) -> float:
    return -174.0 + 10.0 * np.log10(cfg.subcarrier_spacing * 1e3) + cfg.channel.noise_figure


class Simulation:
    """One run of the scenario for a single antenna element count."""

    def __init__(self, cfg: ScenarioConfig, elements: int | None = None,
                 ues: list[UeState] | None = None):
        self.cfg = cfg.validate()
        self.elements = cfg.antenna_elements if elements is None else elements
        self.sectors = build_deployment(cfg, self.elements)
        # every sector shares one array geometry, so one sector-local grid serves all
        self.grid = sector_grid(cfg, self.sectors[0])
        self.p_re = re_power(cfg.bs_tx_power, n_prb(cfg.bandwidth, cfg.subcarrier_spacing))
        self.noise_mw = to_mw(_noise_dbm_per_re(cfg))
        self.region: Region = deployment_region(cfg)
        self.site_xy = np.array([p for _, p in sorted({s.site_id: s.position for s in self.sectors}.items())])
        self.sector_site = np.array([s.site_id for s in self.sectors])

        root = np.random.SeedSequence(cfg.rng_seed)
        place_seq, link_seq, traffic_seq = root.spawn(3)
        self.ues = place_ues(cfg, np.random.default_rng(place_seq), self.region) if ues is None else ues
        link_seeds = link_seq.spawn(len(self.ues) * len(self.site_xy))
        self.links = [
            [new_link(ue, j, self.site_xy[j], cfg, np.random.default_rng(link_seeds[i * len(self.site_xy) + j]))
             for j in range(len(self.site_xy))]
            for i, ue in enumerate(self.ues)
        ]
        trng = np.random.default_rng(traffic_seq)
        starts = trng.uniform(0.0, cfg.traffic.start_spread, len(self.ues)) if cfg.traffic.start_spread > 0 \
            else np.zeros(len(self.ues))
        n_cells, n_beams = len(self.sectors), len(self.grid)
        self.ho = [HandoverState() for _ in self.ues]
        for ue, t0 in zip(self.ues, starts):
            ue.rrm_state = UeRrm(n_cells, n_beams, cfg.rrm)
            ue.traffic_state = new_session(cfg.traffic, float(t0))
        rsrp = self.true_rsrp()
        for u, ue in enumerate(self.ues):
            if ue.serving_cell is None:
                c, b = np.unravel_index(np.argmax(rsrp[u]), rsrp[u].shape)
                ue.serving_cell, ue.serving_beam = int(c), int(b)

    def true_rsrp(self) -> np.ndarray:
        """Per-beam RSRP in dBm at the current instant, shape (ues, sectors, beams)."""
        cfg = self.cfg
        pos = np.array([ue.position for ue in self.ues], dtype=float).reshape(-1, 2)
        az = np.empty((len(self.ues), len(self.sectors)))
        zen = np.empty_like(az)
        for s, sec in enumerate(self.sectors):
            az[:, s], zen[:, s] = sector_angles(sec.position, sec.bearing, pos, cfg.bs_height, cfg.ue_height)
        loss = np.array([[link_loss(self.links[u][self.sector_site[s]], cfg.carrier_frequency, cfg.ue_height)
                          for s in range(len(self.sectors))] for u in range(len(self.ues))])
        return self.p_re + self.grid.gains(az, zen) - loss.reshape(len(self.ues), len(self.sectors))[..., None]

    def _sinr(self, rsrp: np.ndarray) -> np.ndarray:
        """Serving-beam SINR per UE, interference from other sectors' beams serving active UEs."""
        active: dict[int, set[int]] = {}
        for ue in self.ues:
            if ue.traffic_state.active:
                active.setdefault(ue.serving_cell, set()).add(ue.serving_beam)
        out = np.empty(len(self.ues))
        for u, ue in enumerate(self.ues):
            interf = 0.0
            for cell, beams in active.items():
                if cell == ue.serving_cell:
                    continue
                share = 1.0 / len(beams)
                interf += share * float(np.sum(to_mw(rsrp[u, cell, sorted(beams)])))
            sig = to_mw(rsrp[u, ue.serving_cell, ue.serving_beam])
            out[u] = 10.0 * np.log10(sig / (interf + self.noise_mw))
        return out

    def run(self) -> MetricsLog:
        cfg = self.cfg
        dt = cfg.time_step
        n_steps = int(np.floor(cfg.sim_duration / dt + _EPS))
        mlog = MetricsLog(metadata=run_metadata(cfg, self.elements))
        last_report = [None] * len(self.ues)
        for k in range(n_steps):
            now = k * dt
            if k > 0:
                for u, ue in enumerate(self.ues):
                    step_position(ue, dt, self.region)
                    for j in range(len(self.site_xy)):
                        self.links[u][j] = update_link(self.links[u][j], ue, self.site_xy[j], cfg)
            rsrp = self.true_rsrp()
            sinr = self._sinr(rsrp)
            step_events = []
            for u, ue in enumerate(self.ues):
                rrm: UeRrm = ue.rrm_state
                rrm.measure(rsrp[u], now, (ue.serving_cell, ue.serving_beam))
                cells = rrm.cell_qualities()
                best = rrm.best_beam(ue.serving_cell)
                if best is not None:
                    ue.serving_beam = best
                mlog.samples.append(sample_metrics(now, ue, rsrp[u], rrm, float(sinr[u])))
                if last_report[u] is None or now - last_report[u] >= cfg.rrm.report_period - _EPS:
                    beam_l3 = {(c, b): float(rrm.l3[c, b]) for c, b in zip(*np.nonzero(rrm.retained))}
                    mlog.reports.append(build_report(ue.ue_id, now, ue.serving_cell, cells, beam_l3, cfg.rrm))
                    last_report[u] = now
                step_events.extend(self._handover(u, ue, rsrp[u], now))
                self._traffic(u, ue, sinr[u], now)
            mlog.events.extend(sorted(step_events, key=lambda e: (e.time, e.ue_id)))
        log.debug("run E=%d: %d samples, %d events", self.elements, len(mlog.samples), len(mlog.events))
        return mlog

    def _handover(self, u: int, ue: UeState, rsrp: np.ndarray, now: float) -> list[HandoverEvent]:
        cfg, st, rrm = self.cfg.handover, self.ho[u], ue.rrm_state
        events = []
        if st.pending_target is None:
            serving_l3 = float(rrm.cell_l3[ue.serving_cell])
            neighbors = [(c, float(rrm.cell_l3[c])) for c in rrm.measured_cells() if c != ue.serving_cell]
            target = evaluate_trigger(serving_l3, neighbors, cfg, st, now)
            if target is not None:
                schedule_handover(st, target, now, cfg)
        if st.pending_target is not None and now >= st.pending_time - _EPS:
            target = st.pending_target
            beam = rrm.best_beam(target)
            if beam is None:
                beam = int(np.argmax(rsrp[target]))
            _, ev = execute_handover(ue, target, beam, float(rrm.cell_l3[ue.serving_cell]), cfg, st,
                                     round(st.pending_time, 9))
            events.append(ev)
        return events

    def _traffic(self, u: int, ue: UeState, sinr_db: float, now: float):
        cfg = self.cfg
        ts = ue.traffic_state
        bits = 0.0
        if ts.active:
            blocked = min(max(self.ho[u].interrupted_until - now, 0.0), cfg.time_step)
            se = min(np.log2(1.0 + 10.0 ** (sinr_db / 10.0)), cfg.traffic.max_spectral_efficiency)
            bits = se * cfg.bandwidth * 1e6 * (cfg.time_step - blocked)
        ue.traffic_state = step_traffic(ts, now, bits, cfg.traffic)


def run(cfg: ScenarioConfig, elements: int | None = None, ues: list[UeState] | None = None) -> MetricsLog:
    return Simulation(cfg, elements, ues).run()


def run_metadata(cfg: ScenarioConfig, elements: int) -> dict:
    return {
        "artifact_version": __version__,
        "seed": cfg.rng_seed,
        "antenna_elements": elements,
        "config_hash": config_hash(cfg),
        "config": config_to_dict(cfg),
    }


@dataclass
class CoverageMap:
    x: np.ndarray
    y: np.ndarray
    columns: dict[str, np.ndarray]

    def __len__(self):
        return len(self.x)


def coverage_positions(cfg: ScenarioConfig, n_positions: int | None = None, bounds=None,
                       resolution: float | None = None) -> np.ndarray:
    """Either ``n_positions`` seeded uniform draws over the deployment area or a regular grid."""
    if n_positions is not None:
        rng = np.random.default_rng(cfg.rng_seed)
        region = deployment_region(cfg)
        return np.array([region.sample(rng) for _ in range(n_positions)]).reshape(-1, 2)
    if bounds is None or resolution is None or resolution <= 0:
        raise ValueError("coverage grid needs n_positions, or bounds and a resolution > 0")
    xmin, ymin, xmax, ymax = bounds
    xs = np.arange(xmin, xmax + _EPS, resolution)
    ys = np.arange(ymin, ymax + _EPS, resolution)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def coverage_map(cfg: ScenarioConfig, n_positions: int | None = 1000, frequency: float = 28.0,
                 elements=None, bounds=None, resolution: float | None = None) -> CoverageMap:
    """Best-beam RSRP per position for each element count plus the single-element baseline.

    The field is deterministic: no shadowing, outdoor UEs, and a position is LOS
    when its LOS probability is at least one half (unless the scenario forces LOS/NLOS).
    """
    elements = tuple(cfg.element_sweep if elements is None else elements)
    pts = coverage_positions(cfg, n_positions, bounds, resolution)
    p_re = re_power(cfg.bs_tx_power, n_prb(cfg.bandwidth, cfg.subcarrier_spacing))
    columns = {}
    for e in (*elements, 1):
        sectors = build_deployment(cfg, e)
        grid = sector_grid(cfg, sectors[0])
        best = np.full(len(pts), -np.inf)
        for sec in sectors:
            az, zen = sector_angles(sec.position, sec.bearing, pts, cfg.bs_height, cfg.ue_height)
            d2d = np.hypot(pts[:, 0] - sec.position[0], pts[:, 1] - sec.position[1])
            d3d = np.hypot(d2d, cfg.bs_height - cfg.ue_height)
            if cfg.channel.los_mode == "random":
                los = los_probability(d2d) >= 0.5
            else:
                los = np.full(len(pts), cfg.channel.los_mode == "los")
            pl = pathloss(d3d, frequency, los, cfg.ue_height)
            rx = p_re + grid.gains(az, zen).max(axis=-1) - pl
            best = np.maximum(best, rx)
        columns["rsrp_nbf_dbm" if e == 1 else f"rsrp_e{e}_dbm"] = best
    return CoverageMap(pts[:, 0], pts[:, 1], columns)


def _f2(x) -> str:
    return "" if x is None else f"{x:.2f}"


def write_metrics_csv(mlog: MetricsLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(METRICS_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for s in mlog.samples:
            w.writerow([_f2(s.time), s.ue_id, s.serving_cell, s.serving_beam, int(s.indoor),
                        _f2(s.serving_rsrp), _f2(s.best_rsrp), _f2(s.delta_rsrp), _f2(s.l3_serving),
                        _f2(s.sinr)])


def write_events_csv(mlog: MetricsLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(EVENTS_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for e in mlog.events:
            w.writerow([f"{e.time:.3f}", e.ue_id, e.source_cell, e.target_cell, e.outcome])


def write_reports_csv(mlog: MetricsLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(REPORTS_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for rep in mlog.reports:
            for t, ue_id, cell, kind, beam_id, v in rep.rows():
                w.writerow([_f2(t), ue_id, cell, kind, beam_id, _f2(v)])


def write_coverage_csv(cmap: CoverageMap, path) -> None:
    names = list(cmap.columns)
    ordered = sorted((n for n in names if n != "rsrp_nbf_dbm"), key=lambda n: int(n[6:-4])) + ["rsrp_nbf_dbm"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_m", "y_m", *ordered])
        for i in range(len(cmap)):
            w.writerow([_f2(cmap.x[i]), _f2(cmap.y[i]), *(_f2(cmap.columns[n][i]) for n in ordered)])


def write_metadata(meta: dict, path) -> None:
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
