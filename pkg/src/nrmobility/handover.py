"""A3-style handover triggering, delayed execution and outcome classification."""
from __future__ import annotations

from dataclasses import dataclass, field

from .config import HandoverConfig

SUCCESS = "success"
PINGPONG = "pingpong"
FAILURE = "failure"

_EPS = 1e-9


@dataclass(frozen=True)
class HandoverEvent:
    time: float
    ue_id: int
    source_cell: int
    target_cell: int
    outcome: str


@dataclass
class HandoverState:
    """Per-UE trigger timers, the in-flight handover and the last successful one."""
    entered: dict[int, float] = field(default_factory=dict)
    pending_target: int | None = None
    pending_time: float | None = None
    last_success: HandoverEvent | None = None
    interrupted_until: float = float("-inf")


def evaluate_trigger(serving_l3: float, neighbors, cfg: HandoverConfig, state: HandoverState, now: float):
    """Return the neighbour whose entering condition has held for time-to-trigger, else None.

    The condition is ``neighbor_l3 > serving_l3 + hysteresis``; a neighbour whose
    condition lapses loses its timer. Among neighbours past time-to-trigger the
    strongest wins, ties going to the lowest cell id.
    """
    qualifying = {c: q for c, q in neighbors if q > serving_l3 + cfg.hysteresis}
    for c in list(state.entered):
        if c not in qualifying:
            del state.entered[c]
    for c in qualifying:
        state.entered.setdefault(c, now)
    ready = [(q, c) for c, q in qualifying.items() if now - state.entered[c] >= cfg.time_to_trigger - _EPS]
    if not ready:
        return None
    return min(ready, key=lambda e: (-e[0], e[1]))[1]


def classify(source: int, target: int, serving_l3: float, now: float,
             cfg: HandoverConfig, state: HandoverState) -> str:
    if serving_l3 < cfg.fail_rsrp_threshold:
        return FAILURE
    last = state.last_success
    if (last is not None and last.source_cell == target and last.target_cell == source
            and now - last.time <= cfg.pingpong_window + _EPS):
        return PINGPONG
    return SUCCESS


def schedule_handover(state: HandoverState, target: int, now: float, cfg: HandoverConfig) -> float:
    """Start preparation towards ``target``; returns the instant the switch takes effect."""
    state.pending_target = target
    state.pending_time = now + cfg.prep_delay
    state.entered.clear()
    return state.pending_time


def execute_handover(ue, target: int, target_beam: int, serving_l3: float,
                     cfg: HandoverConfig, state: HandoverState, now: float):
    """Switch ``ue`` to ``target`` at ``now`` and log the outcome.

    L3 measurement state is left alone; trigger timers are reset and the UE is
    unable to receive data until ``now + exec_interruption``.
    """
    source = ue.serving_cell
    if target == source:
        raise ValueError("handover target equals serving cell")
    outcome = classify(source, target, serving_l3, now, cfg, state)
    event = HandoverEvent(now, ue.ue_id, source, target, outcome)
    ue.serving_cell = target
    ue.serving_beam = target_beam
    state.entered.clear()
    state.pending_target = None
    state.pending_time = None
    state.interrupted_until = now + cfg.exec_interruption
    if outcome == SUCCESS:
        state.last_success = event
    return ue, event


def audit_pingpongs(events, window: float) -> list[HandoverEvent]:
    """Ping-pong events lacking a prior success target->source within ``window`` (should be empty)."""
    bad = []
    for i, e in enumerate(events):
        if e.outcome != PINGPONG:
            continue
        ok = any(p.ue_id == e.ue_id and p.outcome == SUCCESS and p.source_cell == e.target_cell
                 and p.target_cell == e.source_cell and 0 <= e.time - p.time <= window + _EPS
                 for p in events[:i])
        if not ok:
            bad.append(e)
    return bad
