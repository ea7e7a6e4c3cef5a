"""Anatomy of one downward TDMA superframe.

Builds the kind of frame the base station broadcasts mid-initialization:
a fresh assignment, a conflicted node ordered to keep moving, a
confirmation, and a relay pair; then shows the exact bytes on the wire
and proves the round trip.
"""

from uwoan import MovementMarker, SlotPayload, SlotStage, SuperFrame, decode, encode

slots = (
    # new node: aim 12.5 deg east of north, 62 deg up, depth bucket 138
    SlotPayload(network_id=1, depth_code=138, azimuth_centideg=1250,
                elevation_centideg=15200),
    # conflicted diver: keep moving, reset bit armed
    SlotPayload(network_id=2, depth_code=138, azimuth_centideg=20000,
                elevation_centideg=14000, conflict_flag=True,
                movement_marker=MovementMarker.DIVING, reset_bit=1),
    # third handshake for node 3
    SlotPayload(network_id=3, depth_code=97, azimuth_centideg=31000,
                elevation_centideg=16000, stage=SlotStage.CONFIRM),
    # dual-hop pair: node 5 re-aims at relay 4, relay 4 turns to listen
    SlotPayload(network_id=5, depth_code=150, azimuth_centideg=9000,
                elevation_centideg=9900, stage=SlotStage.RELAY_TX,
                partner_id=4),
    SlotPayload(network_id=4, depth_code=120, azimuth_centideg=27000,
                elevation_centideg=8100, stage=SlotStage.RELAY_RX,
                partner_id=5),
)
frame = SuperFrame(frame_seq=42, slots=slots)
wire = encode(frame)

print(f"frame #{frame.frame_seq} with {frame.slot_count} slots -> "
      f"{len(wire)} bytes (6 header + 9 per slot)")
print()
print("wire bytes:")
print(f"  header {wire[:6].hex()}")
for i, slot in enumerate(slots):
    chunk = wire[6 + 9 * i: 6 + 9 * (i + 1)]
    print(f"  slot {slot.network_id}: {chunk.hex()}  "
          f"({slot.stage.name}"
          f"{', conflict' if slot.conflict_flag else ''}"
          f"{', partner ' + str(slot.partner_id) if slot.partner_id else ''})")
print()

back = decode(wire)
print(f"decode(encode(frame)) == frame: {back == frame}")
print()
print("a node listening at bucket 138 sees two matching assignment slots")
print("(ids 1 and 2) and slot 2 is conflict-flagged: it must keep moving.")
