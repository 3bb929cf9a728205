"""Random-waypoint movement and the chunked FTP download session."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import TrafficConfig

MBIT = 1e6


def aim(ue, region) -> None:
    """Draw a fresh waypoint from the UE's own stream and point the velocity at it."""
    while True:
        wp = region.sample(ue.rng, respect_keepout=False)
        d = wp - ue.position
        dist = float(np.hypot(*d))
        if dist > 1e-9:
            break
    ue.waypoint = wp
    ue.velocity = ue.speed * d / dist


def step_position(ue, dt: float, region):
    """Advance ``ue`` by ``dt`` seconds along its current leg (in place; returns ``ue``).

    A UE that would pass its waypoint stops on it and turns towards a new one, so
    the step never leaves the (convex) region.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if ue.speed == 0:
        return ue
    to_wp = ue.waypoint - ue.position
    if float(np.hypot(*to_wp)) <= ue.speed * dt:
        ue.position = ue.waypoint.copy()
        aim(ue, region)
    else:
        ue.position = ue.position + ue.velocity * dt
    return ue


@dataclass(frozen=True)
class TrafficState:
    chunks_remaining: int
    next_chunk_time: float
    active: bool = False
    chunk_bits: float = 0.0
    delivered_bits: float = 0.0


def new_session(cfg: TrafficConfig, start: float = 0.0) -> TrafficState:
    return TrafficState(cfg.num_chunks, start)


def step_traffic(ts: TrafficState, now: float, served_bits: float,
                 cfg: TrafficConfig = TrafficConfig()) -> TrafficState:
    """Advance the download session to ``now``.

    A pending chunk starts once ``now`` reaches ``next_chunk_time``; bits served
    while a chunk is in flight count towards it, and the next chunk is scheduled
    ``chunk_interval`` after a completion. Bits beyond the chunk are discarded.
    """
    if not ts.active:
        if ts.chunks_remaining == 0 or now < ts.next_chunk_time:
            return ts
        ts = dataclasses.replace(ts, active=True, chunk_bits=0.0)
    chunk = cfg.chunk_size * MBIT
    taken = min(max(served_bits, 0.0), chunk - ts.chunk_bits)
    got = ts.chunk_bits + taken
    if got >= chunk:
        return TrafficState(ts.chunks_remaining - 1, now + cfg.chunk_interval, False, 0.0,
                            ts.delivered_bits + taken)
    return dataclasses.replace(ts, chunk_bits=got, delivered_bits=ts.delivered_bits + taken)
