"""Base-station protocol: detect, allocate, broadcast, confirm, decompose, relay.

The base station drives the whole initialization: it sounds the water
column, assigns network IDs and TDMA slots keyed by quantized depth,
broadcasts emission angles, confirms optical arrivals, commands random
vertical movement for depth-conflicted nodes, and falls back to one
dual-hop relay attempt before declaring a node failed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Iterable, Sequence

from .frame import MovementMarker, SlotPayload, SlotStage, SuperFrame
from .geometry import (
    Bearing,
    DepthCode,
    DepthModel,
    GeometryError,
    Position,
    bearing_from_to,
    distance,
    quantize_depth,
)

__all__ = [
    "ProtocolError",
    "HandshakeStage",
    "BsParams",
    "Detection",
    "NodeRecord",
    "BsState",
    "nearest_eligible_relay",
    "MAX_NETWORK_ID",
]

MAX_NETWORK_ID = 1023


class HandshakeStage(Enum):
    ASSIGNED = "assigned"
    CONFLICTED = "conflicted"
    AWAITING_BEAM = "awaiting_beam"
    CONFIRMING = "confirming"
    ACCESSED = "accessed"
    RELAY_PENDING = "relay_pending"
    FAILED = "failed"

# sonar depth deltas smaller than this read as "not moving"
_MOTION_EPS = 0.01

# record stages whose slots are depth-matchable (stage ASSIGN on the wire);
# only these participate in depth-conflict bookkeeping
_DEPTH_MATCHABLE = (HandshakeStage.ASSIGNED, HandshakeStage.CONFLICTED,
                    HandshakeStage.AWAITING_BEAM)


class ProtocolError(RuntimeError):
    """Protocol bookkeeping violation (e.g. ID space exhausted)."""


@dataclass(frozen=True)
class BsParams:
    """Base-station knobs: sonar model, retry budget, reset cadence."""

    bs_position: Position
    depth_model: DepthModel = DepthModel()
    sonar_radius: float = 1000.0
    p_misdetect: float = 0.0
    depth_noise_std: float = 0.0
    direct_retries: int = 5
    relay_retries: int = 5
    conflict_reset_after: float = 5.0


@dataclass(frozen=True)
class Detection:
    """One sonar return: opaque track key, measured position, depth code."""

    track_key: int
    position: Position
    depth_code: DepthCode


@dataclass
class NodeRecord:
    network_id: int
    track_key: int
    sonar_position: Position
    depth_code: DepthCode
    stage: HandshakeStage
    retries_remaining: int
    conflict_flag: bool = False
    reset_bit: int = 0
    observed_motion: MovementMarker = MovementMarker.NONE
    relay_of: int | None = None
    relayed_by: int | None = None
    via_relay: bool = False
    access_time: float | None = None
    conflict_since: float | None = None
    last_reset_at: float | None = None
    # encoded emission angles toward the BS, invalidated on position updates
    bs_angles: tuple[int, int] | None = None


def _bearing_or_up(origin: Position, target: Position) -> Bearing:
    try:
        return bearing_from_to(origin, target)
    except GeometryError:
        return Bearing(0.0, 90.0)


def _to_centideg(bearing: Bearing) -> tuple[int, int]:
    az = round(bearing.azimuth * 100.0) % 36000
    el = min(18000, max(0, round((bearing.elevation + 90.0) * 100.0)))
    return az, el


def nearest_eligible_relay(records: Iterable[NodeRecord],
                           target: NodeRecord) -> NodeRecord | None:
    """Closest directly-accessed record with free relay capacity.

    Eligible means ACCESSED, not itself relayed (keeps chains at two hops),
    and not already relaying someone (fan-in one).  Ties break toward the
    lower network ID.
    """
    best: NodeRecord | None = None
    best_key: tuple[float, int] | None = None
    for rec in records:
        if rec.stage is not HandshakeStage.ACCESSED:
            continue
        if rec.relay_of is not None or rec.via_relay:
            continue
        if rec.network_id == target.network_id:
            continue
        key = (distance(rec.sonar_position, target.sonar_position),
               rec.network_id)
        if best_key is None or key < best_key:
            best, best_key = rec, key
    return best


class BsState:
    """The base-station half of the initialization protocol."""

    def __init__(self, params: BsParams) -> None:
        self.params = params
        self.registry: dict[int, NodeRecord] = {}
        self._by_track: dict[int, int] = {}
        self.next_network_id = 1
        self.next_frame_seq = 0
        self.unknown_beams = 0
        self.duplicate_beams = 0

    # -- discovery ---------------------------------------------------------

    def sonar_scan(self, snapshot: Sequence[tuple[int, Position]],
                   rng: Random) -> list[Detection]:
        """Sound the water column: every in-range node becomes a detection.

        Depth is measured (optionally with Gaussian noise) and quantized
        with the shared depth model; each return is independently dropped
        with probability p_misdetect.
        """
        p = self.params
        out: list[Detection] = []
        for track_key, pos in snapshot:
            if distance(p.bs_position, pos) > p.sonar_radius:
                continue
            if p.p_misdetect > 0.0 and rng.random() < p.p_misdetect:
                continue
            if p.depth_noise_std > 0.0:
                depth = max(0.0, pos.depth + rng.gauss(0.0, p.depth_noise_std))
                measured = Position(pos.east, pos.north, depth)
            else:
                depth, measured = pos.depth, pos
            out.append(Detection(track_key, measured,
                                 quantize_depth(depth, p.depth_model)))
        return out

    # -- allocation and decomposition --------------------------------------

    def allocate(self, detections: Sequence[Detection], now: float) -> list[int]:
        """Register unseen tracks under fresh sequential network IDs."""
        new_ids: list[int] = []
        for det in detections:
            if det.track_key in self._by_track:
                continue
            if self.next_network_id > MAX_NETWORK_ID:
                raise ProtocolError(
                    f"network ID space exhausted ({MAX_NETWORK_ID} IDs)")
            nid = self.next_network_id
            self.next_network_id += 1
            self.registry[nid] = NodeRecord(
                network_id=nid, track_key=det.track_key,
                sonar_position=det.position, depth_code=det.depth_code,
                stage=HandshakeStage.ASSIGNED,
                retries_remaining=self.params.direct_retries)
            self._by_track[det.track_key] = nid
            new_ids.append(nid)
        if new_ids:
            self._recompute_conflicts(now)
            self._assert_invariants()
        return new_ids

    def update_decomposition(self, detections: Sequence[Detection],
                             now: float) -> None:
        """Fold a fresh scan into the registry and resolve unique conflicts.

        Re-scans refresh every record's position estimate and observed
        motion; depth codes are refreshed only while the record is still
        depth-matchable.  Conflicted records whose code became unique are
        re-assigned; conflicts persisting past the reset period get their
        reset bit toggled so the nodes redraw their velocities.
        """
        for det in detections:
            nid = self._by_track.get(det.track_key)
            if nid is None:
                continue
            rec = self.registry[nid]
            old = rec.sonar_position
            new = det.position
            if new is not old:
                delta = new.depth - old.depth
                if delta > _MOTION_EPS:
                    rec.observed_motion = MovementMarker.DIVING
                elif delta < -_MOTION_EPS:
                    rec.observed_motion = MovementMarker.RISING
                else:
                    rec.observed_motion = MovementMarker.NONE
                if (new.east != old.east or new.north != old.north
                        or new.depth != old.depth):
                    rec.sonar_position = new
                    rec.bs_angles = None
            else:
                rec.observed_motion = MovementMarker.NONE
            if rec.stage in _DEPTH_MATCHABLE:
                rec.depth_code = det.depth_code
        self._recompute_conflicts(now)
        for rec in self.registry.values():
            if rec.stage is not HandshakeStage.CONFLICTED:
                continue
            anchor = rec.conflict_since if rec.last_reset_at is None \
                else rec.last_reset_at
            if now - anchor >= self.params.conflict_reset_after:
                rec.reset_bit ^= 1
                rec.last_reset_at = now
        self._assert_invariants()

    def _recompute_conflicts(self, now: float) -> None:
        counts: dict[int, int] = {}
        diving: set[int] = set()
        rising: set[int] = set()
        for rec in self.registry.values():
            if rec.stage in _DEPTH_MATCHABLE:
                counts[rec.depth_code.bucket] = \
                    counts.get(rec.depth_code.bucket, 0) + 1
                if rec.stage is HandshakeStage.CONFLICTED:
                    if rec.observed_motion is MovementMarker.DIVING:
                        diving.add(rec.depth_code.bucket)
                    elif rec.observed_motion is MovementMarker.RISING:
                        rising.add(rec.depth_code.bucket)
        for rec in self.registry.values():
            bucket = rec.depth_code.bucket
            if rec.stage is HandshakeStage.CONFLICTED:
                # directional guard band: a conflicted neighbor one code
                # away and moving toward this bucket could drift across the
                # boundary before the assignment lands and shadow the slot,
                # so resolution waits until it passes or turns away
                if counts[bucket] == 1 \
                        and bucket - 1 not in diving \
                        and bucket + 1 not in rising:
                    rec.stage = HandshakeStage.ASSIGNED
                    rec.conflict_flag = False
                    rec.conflict_since = None
                    rec.last_reset_at = None
                    rec.retries_remaining = self.params.direct_retries
            elif rec.stage in _DEPTH_MATCHABLE and counts[bucket] > 1:
                # a mover collided into this code: the slot is ambiguous
                # again, even if it was already broadcast conflict-free
                rec.stage = HandshakeStage.CONFLICTED
                rec.conflict_flag = True
                rec.conflict_since = now
                rec.last_reset_at = None

    # -- broadcasting -------------------------------------------------------

    def compose_superframe(self, now: float) -> SuperFrame:
        """Build the next TDMA frame: one slot per live record.

        Assignment slots carry the emission angles toward the base station
        and the conflict/movement/reset flags; confirmations complete the
        third handshake; relay pairs get reciprocal receive/transmit slots.
        Composing also advances stages: freshly assigned records start
        awaiting their beam, and confirmations mark the record accessed.
        """
        bs_pos = self.params.bs_position
        slots: list[SlotPayload] = []
        for rec in self.registry.values():
            stage = rec.stage
            if stage is HandshakeStage.FAILED:
                continue
            if rec.bs_angles is None:
                rec.bs_angles = _to_centideg(
                    _bearing_or_up(rec.sonar_position, bs_pos))
            if stage in _DEPTH_MATCHABLE:
                az, el = rec.bs_angles
                slots.append(SlotPayload(
                    rec.network_id, rec.depth_code.bucket, az, el,
                    SlotStage.ASSIGN, rec.conflict_flag,
                    rec.observed_motion, rec.reset_bit))
                if stage is HandshakeStage.ASSIGNED:
                    rec.stage = HandshakeStage.AWAITING_BEAM
            elif stage is HandshakeStage.CONFIRMING:
                az, el = rec.bs_angles
                slots.append(SlotPayload(
                    rec.network_id, rec.depth_code.bucket, az, el,
                    SlotStage.CONFIRM))
                rec.stage = HandshakeStage.ACCESSED
                rec.access_time = now
            elif stage is HandshakeStage.ACCESSED:
                if rec.relay_of is not None:
                    partner = self.registry[rec.relay_of]
                    az, el = _to_centideg(_bearing_or_up(
                        rec.sonar_position, partner.sonar_position))
                    slots.append(SlotPayload(
                        rec.network_id, rec.depth_code.bucket, az, el,
                        SlotStage.RELAY_RX, partner_id=partner.network_id))
                else:
                    az, el = rec.bs_angles
                    slots.append(SlotPayload(
                        rec.network_id, rec.depth_code.bucket, az, el,
                        SlotStage.CONFIRM))
            elif stage is HandshakeStage.RELAY_PENDING:
                relay = self.registry[rec.relayed_by]
                az, el = _to_centideg(_bearing_or_up(
                    rec.sonar_position, relay.sonar_position))
                slots.append(SlotPayload(
                    rec.network_id, rec.depth_code.bucket, az, el,
                    SlotStage.RELAY_TX, partner_id=relay.network_id))
        frame = SuperFrame(self.next_frame_seq, tuple(slots))
        self.next_frame_seq += 1
        return frame

    # -- uplink and timeouts -------------------------------------------------

    def on_optical_arrival(self, claimed_id: int, via_relay: bool,
                           now: float) -> None:
        """Second handshake: an optical beam claiming `claimed_id` arrived."""
        rec = self.registry.get(claimed_id)
        if rec is None:
            self.unknown_beams += 1
            return
        if rec.stage in (HandshakeStage.AWAITING_BEAM,
                         HandshakeStage.RELAY_PENDING):
            if rec.stage is HandshakeStage.RELAY_PENDING and not via_relay:
                # direct path recovered after all; release the relay
                self._release_relay(rec)
            rec.stage = HandshakeStage.CONFIRMING
            rec.via_relay = via_relay
            assert rec.relayed_by is None or \
                self.registry[rec.relayed_by].relay_of == rec.network_id
        elif rec.stage in (HandshakeStage.CONFIRMING, HandshakeStage.ACCESSED):
            self.duplicate_beams += 1
        else:
            self.unknown_beams += 1

    def handle_timeouts(self, now: float) -> None:
        """Burn one retry per broadcast-and-unanswered record.

        Exhausted direct attempts fall back to the nearest eligible relay;
        exhausted relay attempts (or no eligible relay at all) fail the
        node and release its slot.
        """
        for rec in list(self.registry.values()):
            if rec.stage is HandshakeStage.AWAITING_BEAM:
                rec.retries_remaining -= 1
                if rec.retries_remaining > 0:
                    continue
                relay = nearest_eligible_relay(self.registry.values(), rec)
                if relay is None:
                    self._fail(rec)
                else:
                    rec.stage = HandshakeStage.RELAY_PENDING
                    rec.retries_remaining = self.params.relay_retries
                    rec.relayed_by = relay.network_id
                    relay.relay_of = rec.network_id
            elif rec.stage is HandshakeStage.RELAY_PENDING:
                rec.retries_remaining -= 1
                if rec.retries_remaining <= 0:
                    self._release_relay(rec)
                    self._fail(rec)
        self._assert_invariants()

    def _release_relay(self, rec: NodeRecord) -> None:
        if rec.relayed_by is not None:
            relay = self.registry[rec.relayed_by]
            if relay.relay_of == rec.network_id:
                relay.relay_of = None
            rec.relayed_by = None

    def _fail(self, rec: NodeRecord) -> None:
        rec.stage = HandshakeStage.FAILED
        rec.conflict_flag = False
        rec.relayed_by = None

    # -- invariants -----------------------------------------------------------

    def _assert_invariants(self) -> None:
        seen_relays: set[int] = set()
        for nid, rec in self.registry.items():
            assert nid == rec.network_id
            assert self._by_track[rec.track_key] == nid
            if rec.stage is HandshakeStage.ACCESSED:
                assert rec.access_time is not None
            if rec.conflict_flag:
                assert rec.stage is HandshakeStage.CONFLICTED
            if rec.relay_of is not None:
                assert rec.relay_of not in seen_relays  # fan-in <= 1
                seen_relays.add(rec.relay_of)
                assert rec.stage is HandshakeStage.ACCESSED
                assert not rec.via_relay  # chains stay at two hops
                assert self.registry[rec.relay_of].relayed_by == nid
            if rec.relayed_by is not None:
                relay = self.registry[rec.relayed_by]
                assert relay.stage is HandshakeStage.ACCESSED
                assert relay.relay_of == nid
