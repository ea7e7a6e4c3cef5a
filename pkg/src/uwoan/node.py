"""Underwater-node protocol behavior.

A node is acoustically mute: it listens to the downward broadcast,
matches the advertised depth codes against its own depth, and answers
only with narrow-beam optical emissions along the angles it was given.
Depth conflicts are resolved by random vertical movement until the
node's quantized depth is unique; after access the node returns to its
original depth and may serve as an optical relay for one neighbor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from random import Random

from .frame import FrameIndex, MovementMarker, SlotPayload, SlotStage, SuperFrame
from .geometry import Bearing, DepthModel

__all__ = [
    "Lifecycle",
    "UwnParams",
    "RelayDuty",
    "Emission",
    "UwnState",
    "slot_bearing",
    "on_trigger",
    "match_frame",
    "match_frame_indexed",
    "draw_movement",
    "on_access",
    "on_movement_expiry",
    "forward_beam",
]


class Lifecycle(Enum):
    DORMANT = "dormant"
    ACTIVATED = "activated"
    MATCHING = "matching"
    CONFLICT_MOVING = "conflict_moving"
    EMITTING = "emitting"
    ACCESSED = "accessed"
    FAILED = "failed"


@dataclass(frozen=True)
class UwnParams:
    """Movement and matching knobs of the node state machine."""

    v_min: float = 0.05
    v_max: float = 0.5
    move_duration_min: float = 1.0
    move_duration_max: float = 3.0
    v_return: float = 0.5
    return_tolerance: float = 0.1
    match_on_motion_marker: bool = True
    region_depth: float = 200.0


@dataclass(frozen=True)
class RelayDuty:
    partner_id: int
    receiver_bearing: Bearing


@dataclass(frozen=True)
class Emission:
    """An optical beam leaving a node: direction, claimed ID, relay flag."""

    bearing: Bearing
    claimed_id: int
    relayed: bool = False


@dataclass
class UwnState:
    """Mutable per-node protocol state.

    `own_depth` is the node's exact self-knowledge and is synced from the
    kinematics before every handler call; `movement_epoch` increments on
    every velocity change so stale movement timers can be discarded.
    """

    node: int
    original_depth: float
    own_depth: float = field(default=-1.0)
    lifecycle: Lifecycle = Lifecycle.DORMANT
    matched_id: int | None = None
    emission_bearing: Bearing | None = None
    relay_duty: RelayDuty | None = None
    vertical_velocity: float = 0.0
    movement_deadline: float | None = None
    movement_epoch: int = 0
    last_reset_bit: int = 0
    conflict_entered_at: float | None = None
    total_conflict_time: float = 0.0
    access_time: float | None = None

    def __post_init__(self) -> None:
        if self.own_depth < 0.0:
            self.own_depth = self.original_depth


def slot_bearing(slot: SlotPayload) -> Bearing:
    """Decode a slot's centidegree angles into a Bearing."""
    azimuth = (slot.azimuth_centideg / 100.0) % 360.0
    elevation = slot.elevation_centideg / 100.0 - 90.0
    return Bearing(azimuth, elevation)


def on_trigger(state: UwnState) -> None:
    """Wake a dormant node; idempotent in every other lifecycle."""
    if state.lifecycle is Lifecycle.DORMANT:
        state.lifecycle = Lifecycle.ACTIVATED


def _own_marker(state: UwnState) -> MovementMarker:
    if state.vertical_velocity > 0.0:
        return MovementMarker.DIVING
    if state.vertical_velocity < 0.0:
        return MovementMarker.RISING
    return MovementMarker.NONE


def draw_movement(rng: Random, params: UwnParams, depth: float,
                  keep_direction: float = 0.0) -> tuple[float, float]:
    """Draw a random vertical movement: (signed velocity, duration).

    Positive velocity dives.  Direction is uniform over {dive, rise} but
    clipped to the feasible side near the surface or the region floor,
    judging feasibility by the worst-case excursion v_max*duration_max.
    A nonzero `keep_direction` carries the sign of the current velocity
    forward so the node continues its dive or climb with a fresh speed:
    separation stays ballistic instead of degrading into a random walk,
    and directions reshuffle only on an explicit reset.  Exactly three
    rng draws are consumed regardless of clipping or direction keeping.
    """
    dive = rng.random() < 0.5
    if keep_direction != 0.0:
        dive = keep_direction > 0.0
    speed = rng.uniform(params.v_min, params.v_max)
    duration = rng.uniform(params.move_duration_min, params.move_duration_max)
    bound = params.v_max * params.move_duration_max
    can_dive = depth + bound <= params.region_depth
    can_rise = depth - bound >= 0.0
    if dive and not can_dive and can_rise:
        dive = False
    elif not dive and not can_rise and can_dive:
        dive = True
    elif not can_dive and not can_rise:
        # degenerate shallow region: move toward the larger headroom, capped
        dive = (params.region_depth - depth) >= depth
        headroom = (params.region_depth - depth) if dive else depth
        speed = min(speed, max(headroom, 0.0) / duration)
    return (speed if dive else -speed), duration


def _start_movement(state: UwnState, params: UwnParams, rng: Random,
                    now: float, keep_direction: float = 0.0) -> None:
    velocity, duration = draw_movement(rng, params, state.own_depth,
                                       keep_direction)
    state.vertical_velocity = velocity
    state.movement_deadline = now + duration
    state.movement_epoch += 1


def _bind(state: UwnState, slot: SlotPayload, now: float) -> Emission:
    state.matched_id = slot.network_id
    state.emission_bearing = slot_bearing(slot)
    if state.lifecycle is Lifecycle.CONFLICT_MOVING:
        state.total_conflict_time += now - state.conflict_entered_at
        state.conflict_entered_at = None
        if state.vertical_velocity != 0.0:
            state.vertical_velocity = 0.0
            state.movement_deadline = None
            state.movement_epoch += 1
    state.lifecycle = Lifecycle.EMITTING
    return Emission(state.emission_bearing, state.matched_id)


def on_access(state: UwnState, now: float, params: UwnParams) -> None:
    """Confirmation received: mark accessed and head back to the original depth."""
    state.lifecycle = Lifecycle.ACCESSED
    state.access_time = now
    displacement = state.own_depth - state.original_depth
    if abs(displacement) > params.return_tolerance:
        state.vertical_velocity = -math.copysign(params.v_return, displacement)
        state.movement_deadline = now + abs(displacement) / params.v_return
    else:
        state.vertical_velocity = 0.0
        state.movement_deadline = None
    state.movement_epoch += 1


def on_movement_expiry(state: UwnState, params: UwnParams, rng: Random,
                       now: float) -> None:
    """A movement interval ended: continue while conflicted, stop otherwise.

    A still-conflicted node draws a fresh speed and interval but keeps its
    heading; only a reset command (or a region boundary) turns it around.
    """
    if state.lifecycle is Lifecycle.CONFLICT_MOVING:
        _start_movement(state, params, rng, now,
                        keep_direction=state.vertical_velocity)
    elif state.vertical_velocity != 0.0:
        state.vertical_velocity = 0.0
        state.movement_deadline = None
        state.movement_epoch += 1


def match_frame_indexed(state: UwnState, index: FrameIndex, model: DepthModel,
                        params: UwnParams, rng: Random,
                        now: float) -> list[Emission]:
    """Process one decoded superframe; returns the beams to emit."""
    if state.lifecycle in (Lifecycle.DORMANT, Lifecycle.FAILED):
        return []
    if state.lifecycle is Lifecycle.ACTIVATED:
        state.lifecycle = Lifecycle.MATCHING

    if state.matched_id is not None:
        slot = index.by_id.get(state.matched_id)
        if slot is None:
            return []
        if state.lifecycle is Lifecycle.EMITTING:
            if slot.stage is SlotStage.CONFIRM:
                on_access(state, now, params)
                return []
            if slot.stage in (SlotStage.ASSIGN, SlotStage.RELAY_TX):
                # refreshed angles; RELAY_TX retargets the beam at the relay
                state.emission_bearing = slot_bearing(slot)
                return [Emission(state.emission_bearing, state.matched_id)]
            return []
        if state.lifecycle is Lifecycle.ACCESSED \
                and slot.stage is SlotStage.RELAY_RX:
            state.relay_duty = RelayDuty(slot.partner_id, slot_bearing(slot))
        return []

    # unbound: match the advertised depth codes against our own depth
    bucket = model.bucket(state.own_depth)
    candidates = index.assign_by_code.get(bucket)
    if not candidates:
        return []
    if params.match_on_motion_marker:
        # only slots tracking our own motion state can be ours; this keeps
        # a drifting conflicted node from stealing a neighbor's assignment
        own = _own_marker(state)
        candidates = [s for s in candidates if s.movement_marker is own]
        if not candidates:
            return []
    if len(candidates) == 1 and not candidates[0].conflict_flag:
        return [_bind(state, candidates[0], now)]
    # ambiguous or explicitly conflicted: keep (or start, or resume) moving
    if state.lifecycle is not Lifecycle.CONFLICT_MOVING:
        state.lifecycle = Lifecycle.CONFLICT_MOVING
        state.conflict_entered_at = now
        _start_movement(state, params, rng, now)
    elif state.vertical_velocity == 0.0:
        _start_movement(state, params, rng, now)
    else:
        for slot in candidates:
            if slot.reset_bit != state.last_reset_bit:
                state.last_reset_bit = slot.reset_bit
                _start_movement(state, params, rng, now)
                break
    return []


def match_frame(state: UwnState, frame: SuperFrame, model: DepthModel,
                params: UwnParams, rng: Random, now: float) -> list[Emission]:
    """Convenience wrapper building the per-frame index on the fly."""
    return match_frame_indexed(state, FrameIndex(frame), model, params, rng, now)


def forward_beam(state: UwnState, claimed_id: int) -> Emission | None:
    """Relay a partner's beam toward the base station; drop anything else.

    The caller is responsible for receiver field-of-view and link
    feasibility checks; this only enforces the relay binding.
    """
    if state.lifecycle is not Lifecycle.ACCESSED or state.relay_duty is None:
        return None
    if claimed_id != state.relay_duty.partner_id:
        return None
    if state.emission_bearing is None:
        return None
    return Emission(state.emission_bearing, claimed_id, relayed=True)
