"""Scenario configuration: dataclasses, JSON scenario files, validation.

Scenario files are JSON objects whose keys are exactly the dataclass field
names below; omitted keys take the defaults, unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import types
import typing
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Scenario violates an invariant or has an unknown/mistyped key."""


class ConfigSyntaxError(ConfigError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"syntax error at line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class RrmConfig:
    n_best_beams: int = 4
    abs_threshold: float = -110.0
    l1_window: int = 5
    l3_k: int = 4
    report_max_beams: int = 4
    ue_detectable_threshold: float = -120.0
    sweep_period: float = 0.02
    report_period: float = 1.0

    def validate(self):
        _require(self.n_best_beams >= 1, "n_best_beams >= 1")
        _require(0 <= self.report_max_beams <= self.n_best_beams, "0 <= report_max_beams <= n_best_beams")
        _require(self.l1_window >= 1, "l1_window >= 1")
        _require(self.l3_k >= 0, "l3_k >= 0")
        _require(self.sweep_period > 0, "sweep_period > 0")
        _require(self.report_period > 0, "report_period > 0")


@dataclass(frozen=True)
class HandoverConfig:
    hysteresis: float = 3.0
    time_to_trigger: float = 0.16
    prep_delay: float = 0.05
    exec_interruption: float = 0.03
    pingpong_window: float = 1.0
    fail_rsrp_threshold: float = -120.0

    def validate(self):
        _require(self.hysteresis >= 0, "hysteresis >= 0")
        _require(self.time_to_trigger >= 0, "time_to_trigger >= 0")
        _require(self.prep_delay >= 0, "prep_delay >= 0")
        _require(self.exec_interruption >= 0, "exec_interruption >= 0")
        _require(self.pingpong_window > 0, "pingpong_window > 0")


@dataclass(frozen=True)
class TrafficConfig:
    file_size: float = 200.0
    num_chunks: int = 10
    chunk_size: float = 20.0
    chunk_interval: float = 1.5
    start_spread: float = 1.5
    max_spectral_efficiency: float = 8.0

    def validate(self):
        _require(self.num_chunks >= 1, "num_chunks >= 1")
        _require(self.chunk_size > 0, "chunk_size > 0")
        _require(abs(self.num_chunks * self.chunk_size - self.file_size) <= 1e-9 * self.file_size,
                 "num_chunks * chunk_size == file_size")
        _require(self.chunk_interval > 0, "chunk_interval > 0")
        _require(self.start_spread >= 0, "start_spread >= 0")
        _require(self.max_spectral_efficiency > 0, "max_spectral_efficiency > 0")


@dataclass(frozen=True)
class AntennaConfig:
    array_shapes: dict = field(default_factory=lambda: {16: (2, 8), 32: (4, 8), 64: (8, 8), 128: (8, 16)})
    element_spacing: tuple = (0.5, 0.5)
    downtilt: float = 6.0
    zenith_span: float = 40.0
    zenith_beams: int = 0
    oversampling: int = 1
    azimuth_layout: str = "sine"
    max_gain: float = 8.0
    beamwidth_3db: float = 65.0
    max_attenuation: float = 30.0

    def validate(self):
        for n, (rows, cols) in self.array_shapes.items():
            _require(rows >= 1 and cols >= 1 and rows * cols == n, "array_shapes rows * cols == elements")
        _require(len(self.element_spacing) == 2 and min(self.element_spacing) > 0, "element_spacing > 0")
        _require(0 <= self.zenith_span < 90, "0 <= zenith_span < 90")
        _require(self.zenith_beams >= 0, "zenith_beams >= 0")
        _require(self.oversampling >= 1, "oversampling >= 1")
        _require(self.azimuth_layout in ("angle", "sine"), "azimuth_layout in {angle, sine}")
        _require(self.beamwidth_3db > 0 and self.max_attenuation > 0, "element pattern constants > 0")


@dataclass(frozen=True)
class ChannelConfig:
    shadowing: bool = True
    shadow_std_los: float = 4.0
    shadow_std_nlos: float = 6.0
    decorrelation_los: float = 37.0
    decorrelation_nlos: float = 50.0
    los_mode: str = "random"
    wall_loss: float = 20.0
    depth_loss: float = 0.5
    max_indoor_depth: float = 25.0
    min_distance: float = 35.0
    noise_figure: float = 7.0

    def validate(self):
        _require(self.shadow_std_los >= 0 and self.shadow_std_nlos >= 0, "shadow std >= 0")
        _require(self.decorrelation_los > 0 and self.decorrelation_nlos > 0, "decorrelation distance > 0")
        _require(self.los_mode in ("random", "los", "nlos"), "los_mode in {random, los, nlos}")
        _require(self.wall_loss >= 0 and self.depth_loss >= 0 and self.max_indoor_depth >= 0,
                 "penetration loss parameters >= 0")
        _require(self.min_distance >= 0, "min_distance >= 0")


@dataclass(frozen=True)
class ScenarioConfig:
    num_sites: int = 3
    sectors_per_site: int = 3
    inter_site_distance: float = 500.0
    bs_height: float = 25.0
    ue_height: float = 1.5
    bs_tx_power: float = 43.0
    ue_tx_power: float = 23.0
    carrier_frequency: float = 3.5
    bandwidth: float = 40.0
    subcarrier_spacing: float = 30.0
    antenna_elements: int = 64
    element_sweep: tuple = (16, 32, 64, 128)
    num_ues: int = 15
    ue_speed_range: tuple = (3.0, 30.0)
    indoor_fraction: float = 0.5
    sim_duration: float = 60.0
    time_step: float = 0.1
    rng_seed: int = 0
    rrm: RrmConfig = RrmConfig()
    handover: HandoverConfig = HandoverConfig()
    traffic: TrafficConfig = TrafficConfig()
    antenna: AntennaConfig = AntennaConfig()
    channel: ChannelConfig = ChannelConfig()

    def validate(self) -> "ScenarioConfig":
        _require(self.num_sites >= 1, "num_sites >= 1")
        _require(self.sectors_per_site >= 1, "sectors_per_site >= 1")
        _require(self.inter_site_distance > 0, "inter_site_distance > 0")
        _require(self.time_step > 0, "time_step > 0")
        _require(self.sim_duration >= 0, "sim_duration >= 0")
        _require(len(self.ue_speed_range) == 2, "ue_speed_range has two entries")
        lo, hi = self.ue_speed_range
        _require(lo >= 0 and hi >= 0, "ue_speed_range >= 0")
        _require(lo <= hi, "ue_speed_range min <= max")
        _require(0 <= self.indoor_fraction <= 1, "indoor_fraction in [0, 1]")
        _require(self.antenna_elements in self.element_sweep, "antenna_elements in element_sweep")
        _require(self.bs_height > self.ue_height > 0, "bs_height > ue_height > 0")
        _require(self.carrier_frequency > 0, "carrier_frequency > 0")
        _require(self.bandwidth > 0 and self.subcarrier_spacing > 0, "bandwidth, subcarrier_spacing > 0")
        _require(self.num_ues >= 0, "num_ues >= 0")
        for n in self.element_sweep:
            _require(n == 1 or n in self.antenna.array_shapes, "every element_sweep entry has an array shape")
        for sub in (self.rrm, self.handover, self.traffic, self.antenna, self.channel):
            sub.validate()
        return self

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes).validate()

    def with_section(self, name: str, **changes) -> "ScenarioConfig":
        section = dataclasses.replace(getattr(self, name), **changes)
        return dataclasses.replace(self, **{name: section}).validate()


def _require(cond: bool, invariant: str):
    if not cond:
        raise ConfigError(f"invalid scenario: {invariant}")


def _coerce(tp, value, path: str):
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        return _build(tp, value, path + ".")
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
        return value
    if tp is tuple or origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list")
        return tuple(float(v) if isinstance(v, float) else v for v in value)
    if tp is dict or origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        try:
            return {int(k): tuple(v) for k, v in value.items()}
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: expected element-count keys mapping to [rows, cols]") from None
    if origin in (typing.Union, types.UnionType):
        return value
    raise ConfigError(f"{path}: unsupported field type {tp!r}")


def _build(cls, data: dict, prefix: str = ""):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key {prefix}{unknown[0]}")
    kwargs = {k: _coerce(hints[k], v, prefix + k) for k, v in data.items()}
    return cls(**kwargs)


def _tuple_floats(cfg: ScenarioConfig) -> ScenarioConfig:
    # speed range is numeric; keep int/float distinction out of equality
    lo, hi = cfg.ue_speed_range
    return dataclasses.replace(cfg, ue_speed_range=(float(lo), float(hi)),
                               element_sweep=tuple(int(e) for e in cfg.element_sweep))


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("scenario document must be an object")
    cfg = _build(ScenarioConfig, data)
    try:
        cfg = _tuple_floats(cfg)
    except (TypeError, ValueError):
        raise ConfigError("invalid scenario: ue_speed_range / element_sweep must be numeric lists") from None
    return cfg.validate()


def parse_config(text: str) -> ScenarioConfig:
    """Parse a JSON scenario document; an empty document yields the defaults."""
    if not text.strip():
        return ScenarioConfig().validate()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigSyntaxError(e.msg, e.lineno, e.colno) from None
    return config_from_dict(data)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg: ScenarioConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["antenna"]["array_shapes"] = {str(k): list(v) for k, v in sorted(cfg.antenna.array_shapes.items())}

    def lists(x):
        if isinstance(x, dict):
            return {k: lists(v) for k, v in x.items()}
        if isinstance(x, tuple):
            return [lists(v) for v in x]
        return x

    return lists(d)


def dump_config(cfg: ScenarioConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def config_hash(cfg: ScenarioConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
