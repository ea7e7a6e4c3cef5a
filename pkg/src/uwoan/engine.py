"""Deterministic discrete-event core driving one initialization run.

A single seeded random stream is consumed in strict event order, so a
(config, seed) pair fully determines the run.  The event queue pops in
(time, sequence) order; acoustic deliveries are delayed by exactly
distance/sound_speed evaluated at transmit time, optical propagation is
treated as instantaneous (sub-microsecond over link scales here) but
still sequenced through the queue so causality is explicit.

Per superframe period the base station re-scans (sonar ping), checks
timeouts, composes and broadcasts the TDMA frame; nodes react to every
arrival.  Emitted beams are delivered to any receiver that passes the
pointing, link-budget, and field-of-view checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from random import Random

from . import node as uwn
from .base_station import BsState, HandshakeStage
from .channel import optical_received_power
from .config import SimConfig
from .frame import FrameIndex, decode, encode
from .geometry import Position, angle_between, unit_vector
from .report import NodeOutcome, SimReport, TopologyEdge
from .world import World, deploy

__all__ = ["Simulation", "SimResult", "simulate", "run", "trace"]

SONAR_PING = "SONAR_PING"
SUPERFRAME_TX = "SUPERFRAME_TX"
ACOUSTIC_ARRIVAL = "ACOUSTIC_ARRIVAL"
OPTICAL_ARRIVAL = "OPTICAL_ARRIVAL"
MOVEMENT_EXPIRY = "MOVEMENT_EXPIRY"
TIMEOUT_CHECK = "TIMEOUT_CHECK"
SIM_END = "SIM_END"


@dataclass(frozen=True)
class SimResult:
    report: SimReport
    trace_lines: tuple[str, ...] = ()


class Simulation:
    """One run of the initialization protocol over a deployed world."""

    def __init__(self, config: SimConfig, seed: int | None = None,
                 world: World | None = None, collect_trace: bool = False) -> None:
        self.cfg = config
        self.seed = config.seed if seed is None else seed
        self.rng = Random(self.seed)
        self.world = world if world is not None else deploy(config, self.rng)
        self.profile = config.water_profile()
        self.budget = config.link_budget()
        self.model = config.depth_model()
        self.uwn_params = config.uwn_params()
        self.bs = BsState(config.bs_params())
        self.nodes = [
            uwn.UwnState(node=i, original_depth=self.world.bodies[i].depth_ref)
            for i in range(self.world.n)
        ]
        self.trace_lines: list[str] | None = [] if collect_trace else None
        self._heap: list = []
        self._seq = 0
        self._frames: dict[int, list] = {}  # frame_seq -> [payload, index|None]
        self._delay_sum = 0.0
        self._delay_count = 0
        self._duty_nodes: list[int] = []  # nodes that ever gained relay duty
        self._duty_boresight: dict[int, tuple] = {}  # node -> (duty, unit vec)
        # emissions repeat identically while nothing moves; cache delivery
        # verdicts keyed by the identities of the inputs that could change
        self._deliver_cache: dict[tuple, tuple] = {}
        self._unit_cache: dict[tuple[float, float], tuple] = {}
        self._next_tx = config.first_superframe_offset_s
        self._early_stop = False
        # once the network settles, the only observable tail activity is the
        # repeated per-frame delivery delays, which can be replayed exactly;
        # anything that makes the tail non-repetitive disables the shortcut
        self._may_fast_forward = (
            not collect_trace
            and not self.world.drifting
            and config.p_frame_loss == 0.0
            and (config.first_superframe_offset_s
                 + config.acoustic_range_m / self.profile.sound_speed
                 < config.superframe_period_s))
        self._finished = False

    # -- plumbing ------------------------------------------------------------

    def _push(self, t: float, kind: str, a=None, b=None) -> None:
        heappush(self._heap, (t, self._seq, kind, a, b))
        self._seq += 1

    def _trace(self, t: float, kind: str, subject: str, detail: str) -> None:
        if self.trace_lines is not None:
            self.trace_lines.append(f"{t!r} {kind} {subject} {detail}")

    # -- event handlers --------------------------------------------------------

    def _on_ping(self, t: float) -> None:
        snapshot = [(i, self.world.position_of(i, t))
                    for i in range(self.world.n)]
        detections = self.bs.sonar_scan(snapshot, self.rng)
        new_ids = self.bs.allocate(detections, t)
        self.bs.update_decomposition(detections, t)
        if self.trace_lines is not None:
            self._trace(t, SONAR_PING, "bs",
                        f"detected={len(detections)} new={len(new_ids)}")
        if self._may_fast_forward and self._quiescent():
            self._fast_forward_tail()
            self._early_stop = True
            return
        # the ping doubles as the wake-up trigger for dormant nodes
        reach = self.cfg.acoustic_range_m
        speed = self.profile.sound_speed
        for i, _pos in snapshot:
            if self.nodes[i].lifecycle is uwn.Lifecycle.DORMANT:
                d = self.world.bs_distance_of(i, t)
                if d <= reach:
                    delay = d / speed
                    self._push(t + delay, ACOUSTIC_ARRIVAL, i,
                               ("trigger", None, d, delay))
        self._push(t, TIMEOUT_CHECK)
        self._push(t + self.cfg.superframe_period_s, SONAR_PING)

    def _quiescent(self) -> bool:
        """True once no future event can change anything but delay tallies.

        Every record must be terminal (accessed or failed), every node
        settled with zero vertical velocity, and every acoustically
        reachable node already registered; nodes still emitting toward a
        live record, or with a confirmation in flight, keep the loop going.
        """
        for rec in self.bs.registry.values():
            if rec.stage is not HandshakeStage.FAILED \
                    and rec.stage is not HandshakeStage.ACCESSED:
                return False
        reach = self.cfg.acoustic_range_m
        registered = self.bs._by_track
        for i, state in enumerate(self.nodes):
            if self.world.bodies[i].v_down != 0.0:
                return False
            life = state.lifecycle
            if life is uwn.Lifecycle.ACCESSED:
                continue
            in_range = self.world.bs_distance_of(i, 0.0) <= reach
            if not in_range:
                continue
            if i not in registered:
                return False
            rec = self.bs.registry[registered[i]]
            if rec.stage is not HandshakeStage.FAILED:
                return False  # e.g. a confirmation still in flight
        return True

    def _fast_forward_tail(self) -> None:
        """Replay the settled tail's delivery delays in exact loop order."""
        if not self.bs.registry:
            return
        reach = self.cfg.acoustic_range_m
        speed = self.profile.sound_speed
        deliveries = sorted(
            self.world.bs_distance_of(i, 0.0) / speed
            for i in range(self.world.n)
            if self.world.bs_distance_of(i, 0.0) <= reach)
        t = self._next_tx
        t_max = self.cfg.t_max_s
        period = self.cfg.superframe_period_s
        while t < t_max:
            for delay in deliveries:
                if t + delay < t_max:  # the loop stops at SIM_END too
                    self._delay_sum += delay
                    self._delay_count += 1
            t += period

    def _on_timeout_check(self, t: float) -> None:
        self.bs.handle_timeouts(t)
        if self.trace_lines is not None:
            self._trace(t, TIMEOUT_CHECK, "bs", "")

    def _on_superframe_tx(self, t: float) -> None:
        if self.bs.registry:
            frame = self.bs.compose_superframe(t)
            payload = encode(frame)
            self._frames[frame.frame_seq] = [payload, None]
            reach = self.cfg.acoustic_range_m
            speed = self.profile.sound_speed
            p_loss = self.cfg.p_frame_loss
            for i in range(self.world.n):
                d = self.world.bs_distance_of(i, t)
                if d > reach:
                    continue
                if p_loss > 0.0 and self.rng.random() < p_loss:
                    continue
                delay = d / speed
                self._push(t + delay, ACOUSTIC_ARRIVAL, i,
                           ("frame", frame.frame_seq, d, delay))
            if self.trace_lines is not None:
                slots = ",".join(
                    f"{s.network_id}:{s.stage.name}:{s.depth_code}"
                    f"{':C' if s.conflict_flag else ''}"
                    for s in frame.slots)
                self._trace(t, SUPERFRAME_TX, "bs",
                            f"frame={frame.frame_seq} nbytes={len(payload)} "
                            f"slots={slots}")
        self._next_tx = t + self.cfg.superframe_period_s
        self._push(self._next_tx, SUPERFRAME_TX)

    def _sync_motion(self, i: int, t: float, epoch_before: int) -> None:
        state = self.nodes[i]
        if state.movement_epoch == epoch_before:
            return
        self.world.set_vertical_velocity(i, state.vertical_velocity, t)
        if state.movement_deadline is not None:
            self._push(state.movement_deadline, MOVEMENT_EXPIRY, i,
                       state.movement_epoch)

    def _on_acoustic_arrival(self, t: float, i: int, payload) -> None:
        what, frame_seq, d, delay = payload
        self._delay_sum += delay
        self._delay_count += 1
        if self.trace_lines is not None:
            self._trace(t, ACOUSTIC_ARRIVAL, f"u{i}",
                        f"src=bs what={what} frame={frame_seq} dist={d!r} "
                        f"delay={delay!r}")
        state = self.nodes[i]
        if what == "trigger":
            uwn.on_trigger(state)
            return
        entry = self._frames[frame_seq]
        if entry[1] is None:
            entry[1] = FrameIndex(decode(entry[0]))
        state.own_depth = self.world.depth_of(i, t)
        epoch_before = state.movement_epoch
        duty_before = state.relay_duty
        emissions = uwn.match_frame_indexed(state, entry[1], self.model,
                                            self.uwn_params, self.rng, t)
        self._sync_motion(i, t, epoch_before)
        if state.relay_duty is not None and duty_before is None:
            self._duty_nodes.append(i)
        for emission in emissions:
            self._emit(i, emission, t)

    def _on_movement_expiry(self, t: float, i: int, epoch: int) -> None:
        state = self.nodes[i]
        if epoch != state.movement_epoch:
            return  # superseded by a newer draw
        state.own_depth = self.world.depth_of(i, t)
        before = state.movement_epoch
        uwn.on_movement_expiry(state, self.uwn_params, self.rng, t)
        if self.trace_lines is not None:
            self._trace(t, MOVEMENT_EXPIRY, f"u{i}",
                        f"v={state.vertical_velocity!r}")
        self._sync_motion(i, t, before)

    def _unit(self, bearing) -> tuple:
        key = (bearing.azimuth, bearing.elevation)
        vec = self._unit_cache.get(key)
        if vec is None:
            vec = unit_vector(bearing)
            self._unit_cache[key] = vec
        return vec

    def _emit(self, src: int, emission: uwn.Emission, t: float) -> None:
        src_pos = self.world.position_of(src, t)
        beam_vec = self._unit(emission.bearing)
        self._try_deliver(src, emission, src_pos, beam_vec,
                          self.world.bs_position, "bs", (0.0, 0.0, 1.0),
                          math.pi / 2, t)
        for j in self._duty_nodes:
            state = self.nodes[j]
            if j == src or state.relay_duty is None:
                continue
            if state.lifecycle is not uwn.Lifecycle.ACCESSED:
                continue
            cached = self._duty_boresight.get(j)
            if cached is None or cached[0] is not state.relay_duty:
                cached = (state.relay_duty,
                          self._unit(state.relay_duty.receiver_bearing))
                self._duty_boresight[j] = cached
            self._try_deliver(src, emission, src_pos, beam_vec,
                              self.world.position_of(j, t), j,
                              cached[1], self.budget.rx_fov_half_angle, t)

    def _try_deliver(self, src: int, emission: uwn.Emission,
                     src_pos: Position, beam_vec, rx_pos: Position,
                     receiver, boresight, fov: float, t: float) -> None:
        # geometry and link outcome are pure in the inputs below; identical
        # repeats (retries while nothing moved) hit the cache
        key = (src, receiver)
        hit = self._deliver_cache.get(key)
        if hit is not None and hit[0] is src_pos and hit[1] is rx_pos \
                and hit[2] is beam_vec and hit[3] is boresight:
            power = hit[4]
        else:
            power = self._delivery_power(src_pos, beam_vec, rx_pos,
                                         boresight, fov)
            self._deliver_cache[key] = (src_pos, rx_pos, beam_vec,
                                        boresight, power)
        if power is None:
            return
        self._push(t, OPTICAL_ARRIVAL, receiver,
                   (src, emission.claimed_id, emission.relayed, power))

    def _delivery_power(self, src_pos: Position, beam_vec, rx_pos: Position,
                        boresight, fov: float) -> float | None:
        disp = (rx_pos.east - src_pos.east, rx_pos.north - src_pos.north,
                rx_pos.depth - src_pos.depth)
        if disp == (0.0, 0.0, 0.0):
            return None
        if angle_between(beam_vec, disp) > self.budget.divergence_half_angle:
            return None  # receiver outside the beam cone
        toward_source = (-disp[0], -disp[1], -disp[2])
        if angle_between(boresight, toward_source) > fov:
            return None  # outside the receiver's field of view
        power = optical_received_power(src_pos, rx_pos, self.budget,
                                       self.profile)
        if power < self.budget.rx_sensitivity:
            return None
        return power

    def _on_optical_arrival(self, t: float, receiver, beam) -> None:
        src, claimed_id, relayed, power = beam
        if self.trace_lines is not None:
            subject = "bs" if receiver == "bs" else f"u{receiver}"
            self._trace(t, OPTICAL_ARRIVAL, subject,
                        f"src=u{src} claim={claimed_id} relayed={int(relayed)} "
                        f"power={power!r}")
        if receiver == "bs":
            self.bs.on_optical_arrival(claimed_id, relayed, t)
            return
        state = self.nodes[receiver]
        state.own_depth = self.world.depth_of(receiver, t)
        forwarded = uwn.forward_beam(state, claimed_id)
        if forwarded is not None:
            self._emit(receiver, forwarded, t)

    # -- run loop ----------------------------------------------------------------

    def run(self) -> SimReport:
        if self._finished:
            raise RuntimeError("Simulation objects are single-use")
        self._finished = True
        t_max = self.cfg.t_max_s
        self._push(t_max, SIM_END)
        self._push(0.0, SONAR_PING)
        self._push(self.cfg.first_superframe_offset_s, SUPERFRAME_TX)
        while self._heap:
            t, _, kind, a, b = heappop(self._heap)
            if kind == SIM_END:
                if self.trace_lines is not None:
                    self._trace(t, SIM_END, "sim", "")
                break
            if kind == ACOUSTIC_ARRIVAL:
                self._on_acoustic_arrival(t, a, b)
            elif kind == OPTICAL_ARRIVAL:
                self._on_optical_arrival(t, a, b)
            elif kind == MOVEMENT_EXPIRY:
                self._on_movement_expiry(t, a, b)
            elif kind == SONAR_PING:
                self._on_ping(t)
                if self._early_stop:
                    break
            elif kind == TIMEOUT_CHECK:
                self._on_timeout_check(t)
            elif kind == SUPERFRAME_TX:
                self._on_superframe_tx(t)
        return self._build_report(t_max)

    def _build_report(self, t_max: float) -> SimReport:
        outcomes: list[NodeOutcome] = []
        edges: list[TopologyEdge] = []
        track_of = {nid: rec.track_key for nid, rec in self.bs.registry.items()}
        counts = {"accessed": 0, "failed": 0, "dormant": 0, "unresolved": 0}
        n_via = 0
        for i, state in enumerate(self.nodes):
            if state.lifecycle is uwn.Lifecycle.CONFLICT_MOVING \
                    and state.conflict_entered_at is not None:
                state.total_conflict_time += t_max - state.conflict_entered_at
                state.conflict_entered_at = None
            rec = None
            nid = self.bs._by_track.get(i)
            if nid is not None:
                rec = self.bs.registry[nid]
            via = False
            relay_name = None
            if state.lifecycle is uwn.Lifecycle.ACCESSED:
                outcome = "accessed"
                if rec is not None and rec.via_relay and rec.relayed_by is not None:
                    via = True
                    relay_name = f"u{track_of[rec.relayed_by]}"
                    n_via += 1
                    edges.append(TopologyEdge(f"u{i}", relay_name, 2))
                else:
                    edges.append(TopologyEdge(f"u{i}", "bs", 1))
            elif rec is not None and rec.stage is HandshakeStage.FAILED:
                outcome = "failed"
            elif state.lifecycle is uwn.Lifecycle.DORMANT:
                outcome = "dormant"
            else:
                outcome = "unresolved"
            counts[outcome] += 1
            body = self.world.bodies[i]
            outcomes.append(NodeOutcome(
                node=f"u{i}",
                network_id=nid,
                east=body.east0, north=body.north0,
                depth=state.original_depth,
                outcome=outcome,
                access_time=state.access_time,
                via_relay=via,
                relay=relay_name))
        n = self.world.n
        return SimReport(
            c0=self.cfg.c0,
            seed=self.seed,
            n_uwn=n,
            access_rate=(counts["accessed"] / n) if n else 1.0,
            dual_hop_rate=(n_via / n) if n else 0.0,
            avg_sound_delay_s=(self._delay_sum / self._delay_count
                               if self._delay_count else 0.0),
            max_decomp_delay_s=max(
                (s.total_conflict_time for s in self.nodes), default=0.0),
            n_accessed=counts["accessed"],
            n_failed=counts["failed"],
            n_dormant=counts["dormant"],
            n_unresolved=counts["unresolved"],
            nodes=tuple(outcomes),
            edges=tuple(edges),
            config=self.cfg.to_dict())


def simulate(config: SimConfig, seed: int | None = None,
             world: World | None = None,
             collect_trace: bool = False) -> SimResult:
    sim = Simulation(config, seed=seed, world=world, collect_trace=collect_trace)
    report = sim.run()
    lines = tuple(sim.trace_lines) if sim.trace_lines is not None else ()
    return SimResult(report, lines)


def run(config: SimConfig, seed: int | None = None) -> SimReport:
    """Simulate one run; identical (config, seed) give identical reports."""
    return simulate(config, seed=seed).report


def trace(config: SimConfig, seed: int | None = None) -> tuple[str, ...]:
    """Simulate one run and return the ordered event log."""
    return simulate(config, seed=seed, collect_trace=True).trace_lines
