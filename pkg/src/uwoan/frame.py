"""Bit-exact codec for the downward TDMA acoustic superframe.

Wire layout (all integers big-endian / most-significant-bit first):

    header   frame_seq   32 bits
             slot_count  16 bits
    slot     network_id          10 bits   0..1023
             depth_code          14 bits   0..16383 (depth bucket index)
             azimuth_centideg    16 bits   0..35999 (0.01 deg units)
             elevation_centideg  15 bits   0..18000 (0 encodes -90 deg)
             stage                2 bits   ASSIGN/CONFIRM/RELAY_RX/RELAY_TX
             conflict_flag        1 bit
             movement_marker      2 bits   NONE/DIVING/RISING
             reset_bit            1 bit
             partner_id          10 bits   relay partner, 0 when unused
             padding              1 bit    always 0

Each slot is exactly 9 bytes; a frame is 6 + 9*slot_count bytes.  Slot
network_ids are unique within a frame, and relay slots must name a
partner slot present in the same frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

__all__ = [
    "FrameError",
    "SlotStage",
    "MovementMarker",
    "SlotPayload",
    "SuperFrame",
    "FrameIndex",
    "encode",
    "decode",
    "HEADER_NBYTES",
    "SLOT_NBYTES",
]

HEADER_NBYTES = 6
SLOT_NBYTES = 9

MAX_NETWORK_ID = 1023
MAX_DEPTH_CODE = 16383
MAX_AZIMUTH_CD = 35999
MAX_ELEVATION_CD = 18000  # -90 deg .. +90 deg inclusive, 0.01 deg steps
MAX_FRAME_SEQ = 2**32 - 1


class FrameError(ValueError):
    """Malformed frame content or byte stream."""


class SlotStage(IntEnum):
    ASSIGN = 0
    CONFIRM = 1
    RELAY_RX = 2
    RELAY_TX = 3


class MovementMarker(IntEnum):
    NONE = 0
    DIVING = 1
    RISING = 2


@dataclass
class SlotPayload:
    """One TDMA slot of the downward broadcast."""

    network_id: int
    depth_code: int
    azimuth_centideg: int
    elevation_centideg: int
    stage: SlotStage = SlotStage.ASSIGN
    conflict_flag: bool = False
    movement_marker: MovementMarker = MovementMarker.NONE
    reset_bit: int = 0
    partner_id: int = 0

    def validate(self) -> None:
        if not 0 <= self.network_id <= MAX_NETWORK_ID:
            raise FrameError(
                f"network_id {self.network_id} outside 0..{MAX_NETWORK_ID}")
        if not 0 <= self.depth_code <= MAX_DEPTH_CODE:
            raise FrameError(
                f"depth_code {self.depth_code} outside 0..{MAX_DEPTH_CODE}")
        if not 0 <= self.azimuth_centideg <= MAX_AZIMUTH_CD:
            raise FrameError(
                f"azimuth_centideg {self.azimuth_centideg} outside "
                f"0..{MAX_AZIMUTH_CD}")
        if not 0 <= self.elevation_centideg <= MAX_ELEVATION_CD:
            raise FrameError(
                f"elevation_centideg {self.elevation_centideg} outside "
                f"0..{MAX_ELEVATION_CD}")
        if not 0 <= self.partner_id <= MAX_NETWORK_ID:
            raise FrameError(
                f"partner_id {self.partner_id} outside 0..{MAX_NETWORK_ID}")
        if not 0 <= self.stage <= 3:
            raise FrameError(f"stage {self.stage} outside 0..3")
        if not 0 <= self.movement_marker <= 2:
            raise FrameError(
                f"movement_marker {self.movement_marker} outside 0..2")
        if self.reset_bit != 0 and self.reset_bit != 1:
            raise FrameError(f"reset_bit {self.reset_bit} not a bit")
        if self.stage >= SlotStage.RELAY_RX:
            if self.partner_id == 0:
                raise FrameError(
                    f"relay slot {self.network_id} without a partner_id")
            if self.partner_id == self.network_id:
                raise FrameError(
                    f"relay slot {self.network_id} naming itself as partner")
        elif self.partner_id != 0:
            raise FrameError(
                f"slot {self.network_id} stage {SlotStage(self.stage).name} "
                f"carries unused partner_id {self.partner_id}")


@dataclass(frozen=True)
class SuperFrame:
    """One broadcast cycle: a sequence counter plus ordered slots."""

    frame_seq: int
    slots: tuple[SlotPayload, ...] = field(default_factory=tuple)

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def validate(self) -> None:
        if not 0 <= self.frame_seq <= MAX_FRAME_SEQ:
            raise FrameError(f"frame_seq {self.frame_seq} outside 32-bit range")
        if self.slot_count > 0xFFFF:
            raise FrameError(f"too many slots: {self.slot_count}")
        ids = set()
        for slot in self.slots:
            slot.validate()
            if slot.network_id in ids:
                raise FrameError(f"duplicate network_id {slot.network_id}")
            ids.add(slot.network_id)
        for slot in self.slots:
            if slot.stage in (SlotStage.RELAY_RX, SlotStage.RELAY_TX) \
                    and slot.partner_id not in ids:
                raise FrameError(
                    f"relay slot {slot.network_id} names absent partner "
                    f"{slot.partner_id}")


# (attribute, width) in wire order; the trailing pad bit is implicit
_FIELDS = (
    ("network_id", 10),
    ("depth_code", 14),
    ("azimuth_centideg", 16),
    ("elevation_centideg", 15),
    ("stage", 2),
    ("conflict_flag", 1),
    ("movement_marker", 2),
    ("reset_bit", 1),
    ("partner_id", 10),
)
_PAYLOAD_BITS = sum(w for _, w in _FIELDS)
assert _PAYLOAD_BITS + 1 == SLOT_NBYTES * 8

# unrolled shift positions (from the least significant bit); these are the
# cumulative widths of everything to the right of each field plus the pad bit
_SH_PARTNER = 1
_SH_RESET = 11
_SH_MARKER = 12
_SH_CONFLICT = 14
_SH_STAGE = 15
_SH_ELEVATION = 17
_SH_AZIMUTH = 32
_SH_DEPTH = 48
_SH_ID = 62


def _pack_slot(slot: SlotPayload) -> bytes:
    acc = ((slot.network_id << _SH_ID)
           | (slot.depth_code << _SH_DEPTH)
           | (slot.azimuth_centideg << _SH_AZIMUTH)
           | (slot.elevation_centideg << _SH_ELEVATION)
           | (slot.stage << _SH_STAGE)
           | ((1 << _SH_CONFLICT) if slot.conflict_flag else 0)
           | (slot.movement_marker << _SH_MARKER)
           | (slot.reset_bit << _SH_RESET)
           | (slot.partner_id << _SH_PARTNER))
    return acc.to_bytes(SLOT_NBYTES, "big")


def _unpack_slot(raw: bytes) -> SlotPayload:
    acc = int.from_bytes(raw, "big")
    if acc & 1:
        raise FrameError("nonzero padding bits in slot")
    marker = (acc >> _SH_MARKER) & 0x3
    if marker == 3:
        raise FrameError("movement_marker 3 has no meaning")
    return SlotPayload(
        (acc >> _SH_ID) & 0x3FF,
        (acc >> _SH_DEPTH) & 0x3FFF,
        (acc >> _SH_AZIMUTH) & 0xFFFF,
        (acc >> _SH_ELEVATION) & 0x7FFF,
        SlotStage((acc >> _SH_STAGE) & 0x3),
        bool((acc >> _SH_CONFLICT) & 0x1),
        MovementMarker(marker),
        (acc >> _SH_RESET) & 0x1,
        (acc >> _SH_PARTNER) & 0x3FF,
    )


def encode(frame: SuperFrame) -> bytes:
    """Serialize a superframe to its normative byte layout."""
    frame.validate()
    parts = [frame.frame_seq.to_bytes(4, "big"),
             frame.slot_count.to_bytes(2, "big")]
    parts.extend(_pack_slot(slot) for slot in frame.slots)
    return b"".join(parts)


def decode(data: bytes) -> SuperFrame:
    """Parse bytes back into a superframe; exact inverse of encode."""
    if len(data) < HEADER_NBYTES:
        raise FrameError(f"truncated frame: {len(data)} bytes, need at least "
                         f"{HEADER_NBYTES}")
    frame_seq = int.from_bytes(data[0:4], "big")
    slot_count = int.from_bytes(data[4:6], "big")
    expected = HEADER_NBYTES + SLOT_NBYTES * slot_count
    if len(data) < expected:
        raise FrameError(f"truncated frame: {len(data)} bytes, "
                         f"{slot_count} slots need {expected}")
    if len(data) > expected:
        raise FrameError(f"trailing bytes: {len(data) - expected} after "
                         f"{slot_count} slots")
    slots = tuple(
        _unpack_slot(data[HEADER_NBYTES + i * SLOT_NBYTES:
                          HEADER_NBYTES + (i + 1) * SLOT_NBYTES])
        for i in range(slot_count))
    frame = SuperFrame(frame_seq, slots)
    frame.validate()
    return frame


class FrameIndex:
    """Per-frame lookup tables so receivers match slots in O(1).

    `by_id` maps network_id to its slot; `assign_by_code` groups the
    depth-matchable (ASSIGN stage) slots by depth code.
    """

    __slots__ = ("frame", "by_id", "assign_by_code")

    def __init__(self, frame: SuperFrame) -> None:
        self.frame = frame
        self.by_id: dict[int, SlotPayload] = {}
        self.assign_by_code: dict[int, list[SlotPayload]] = {}
        for slot in frame.slots:
            self.by_id[slot.network_id] = slot
            if slot.stage == SlotStage.ASSIGN:
                self.assign_by_code.setdefault(slot.depth_code, []).append(slot)
