"""Round-driven discrete-event loop shared by AMCTD and the baselines.

Each round is one logical second.  Every alive sensor emits one packet at the
start of the round and the round's event queue is drained before the next
round starts, so a packet's relay chain always finishes in its own round.

Forwarding model
----------------
A transmitting node pays tx energy and every alive sensor in range pays rx
energy.  The sender's ranked candidate list (hello-time table, possibly
stale) decides who holds the packet: the candidate at rank ``k`` fires at
``t_ref + holding_time + k * slot`` where ``slot`` is one payload airtime plus
the worst one-hop propagation delay.  A holder cancels when it overhears the
same packet before its own timer fires, or when a courier ACK reaches it.
Holders that miss the overheard copy forward a duplicate; only the first
copy to reach a sink or courier counts.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from . import channel
from .baselines import DbrRouter, EedbrRouter
from .courier import advance, courier_collect, courier_deliver, handoff, set_plan, tour_plan
from .model import (CourierNode, DataPacket, NeighborEntry, NetworkConfig, SensorNode, Sink,
                    generate_topology)
from .routing import AmctdRouter, CourierPhase, courier_ack_suppression

PROTOCOLS = ("amctd", "dbr", "eedbr")
DROP_REASONS = ("no_forwarder", "loss_draw", "hop_budget", "stale_neighbor", "energy_depleted")


class EventKind(IntEnum):
    """Queue entries are ``(time, kind, subject, seq, payload)`` tuples; the
    kind value doubles as the tie-break between simultaneous events."""

    PacketArrival = 0
    HoldingTimerFire = 1
    HelloBroadcast = 2
    CourierWaypoint = 3
    RoundBoundary = 4


@dataclass
class RoundRecord:
    round: int
    alive: int
    dead: int
    generated: int
    delivered: int
    collected: int
    dropped: int
    energy_consumed: float
    cumulative_delivered: int
    courier_delivered: int = 0
    courier_buffered: int = 0
    residual_std: float = 0.0
    drops: dict = field(default_factory=dict)

    @property
    def throughput(self) -> int:
        """Packets that reached a sink or a courier this round."""
        return self.delivered + self.collected


def make_router(protocol: str, config: NetworkConfig):
    routers = {"amctd": AmctdRouter, "dbr": DbrRouter, "eedbr": EedbrRouter}
    try:
        return routers[protocol.lower()](config)
    except KeyError:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}") from None


class _Flight:
    """Book-keeping for one packet and all of its in-flight copies."""

    __slots__ = ("packet", "active", "done", "seen", "pending", "last_reason")

    def __init__(self, packet: DataPacket, source: int):
        self.packet = packet
        self.active = 1
        self.done = False
        self.seen = {source}
        self.pending = {}
        self.last_reason = "no_forwarder"


class _Hold:
    __slots__ = ("flight", "node", "hops", "fire_time", "cancelled", "parent")

    def __init__(self, flight, node, hops, fire_time, parent):
        self.flight = flight
        self.node = node
        self.hops = hops
        self.fire_time = fire_time
        self.cancelled = False
        self.parent = parent


class Simulation:
    """One seeded run of a protocol over one topology."""

    def __init__(self, config: NetworkConfig, protocol: str = "amctd", seed: Optional[int] = None,
                 topology=None, trace: bool = False):
        self.config = config
        self.seed = config.rng_seed if seed is None else seed
        self.router = make_router(protocol, config)
        self.protocol = self.router.name
        if topology is None:
            topology = generate_topology(config, self.seed)
        self.nodes: list[SensorNode]
        self.sinks: list[Sink]
        self.couriers: list[CourierNode]
        self.nodes, self.sinks, self.couriers = topology
        if [n.id for n in self.nodes] != list(range(len(self.nodes))):
            raise ValueError("sensor ids must be 0..n-1 in order")
        loss_seed = np.random.SeedSequence([self.seed, 0x10557]).generate_state(1)[0]
        self.rng = random.Random(int(loss_seed))
        # trace mode: (time, node, packet_id, parent) per broadcast, (packet, outcome) per packet
        self.trace = [] if trace else None
        self.outcomes = [] if trace else None

        cfg = config
        self.airtime = channel.transmission_time(cfg.packet_payload, cfg)
        self.e_tx = channel.tx_energy(cfg.packet_payload, cfg)
        self.e_rx = channel.rx_energy(cfg.packet_payload, cfg)
        self.max_prop = cfg.tx_range / cfg.sound_speed
        self.slot = self.airtime + self.max_prop
        self.hop_budget = len(self.nodes)

        self.energy = [n.residual_energy for n in self.nodes]
        self.initial_total = math.fsum(self.energy)
        self.alive = [n.alive for n in self.nodes]
        self.busy = [0.0] * len(self.nodes)
        self._build_geometry()

        self.round = 0
        self.records: list[RoundRecord] = []
        self.cumulative = 0
        self._round_energy = 0.0
        self._seq = 0
        self._packet_counter = 0
        self._rank_cache: list[list] = []
        self._phase = CourierPhase.INITIAL
        self.hello_cycle(0)

    # ------------------------------------------------------------------ setup
    def _build_geometry(self):
        cfg = self.config
        pos = np.array([n.position for n in self.nodes], dtype=float).reshape(-1, 3)
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        self.neighbors = []
        for i in range(len(self.nodes)):
            js = np.nonzero(dist[i] <= cfg.tx_range)[0]
            self.neighbors.append([(int(j), float(dist[i, j])) for j in js if j != i])
        self.neighbor_distance = [dict(nbrs) for nbrs in self.neighbors]
        self.sink_distance = []
        for n in self.nodes:
            d = min(math.dist(n.position, s.position) for s in self.sinks)
            self.sink_distance.append(d)
        self.sink_reach = [d <= cfg.tx_range for d in self.sink_distance]

    # ---------------------------------------------------------------- energy
    def _charge(self, i: int, amount: float, duration: float) -> None:
        e = self.energy[i]
        used = amount if amount < e else e
        self.energy[i] = e - used
        self._round_energy += used
        self.busy[i] += duration

    def _usable(self, i: int) -> bool:
        return self.alive[i] and self.energy[i] > 0.0

    def _sync_nodes(self):
        for n, e, a in zip(self.nodes, self.energy, self.alive):
            n.residual_energy = e
            n.alive = a

    # ----------------------------------------------------------------- hello
    def dead_count(self) -> int:
        return self.alive.count(False)

    def hello_cycle(self, round_index: int) -> None:
        """Sink refreshes the dead count, nodes recompute weights and rebuild
        neighbor tables from the hello broadcasts of alive in-range peers."""
        cfg = self.config
        self._sync_nodes()
        self.router.on_hello(self.dead_count())
        if self.router.uses_couriers:
            phase = self.router.state.courier_phase
            if phase is not self._phase:
                self._phase = phase
                for c in self.couriers:
                    set_plan(c, tour_plan(c.index, phase, cfg))
        for n in self.nodes:
            if n.alive:
                n.weight = self.router.node_weight(n)
        hello_time = channel.transmission_time(cfg.hello_payload, cfg)
        e_tx = channel.tx_energy(cfg.hello_payload, cfg)
        e_rx = channel.rx_energy(cfg.hello_payload, cfg)
        for n in self.nodes:
            i = n.id
            if not n.alive:
                n.neighbor_table = []
                n.threshold_queue = []
                continue
            table = []
            for j, _ in self.neighbors[i]:
                m = self.nodes[j]
                if m.alive:
                    table.append(NeighborEntry(j, m.depth, m.weight, m.residual_energy,
                                               round_index))
            n.neighbor_table = table
            n.threshold_queue = self.router.threshold_queue(n)
        for n in self.nodes:
            i = n.id
            if not self._usable(i):
                continue
            self._charge(i, e_tx, hello_time)
            for j, _ in self.neighbors[i]:
                if self._usable(j):
                    self._charge(j, e_rx, hello_time)
        self._rank_cache = [self.router.rank(n) if n.alive else [] for n in self.nodes]
        self._sync_nodes()

    # --------------------------------------------------------------- couriers
    def _couriers_in_range(self, i: int) -> list[tuple[CourierNode, float]]:
        if not self.router.uses_couriers:
            return []
        pos = self.nodes[i].position
        r = self.config.tx_range
        found = []
        for c in self.couriers:
            d = math.dist(pos, c.position)
            if d <= r:
                found.append((c, d))
        found.sort(key=lambda item: (item[1], item[0].id))
        return found

    def _courier_waypoint(self, now: float, move: bool, rec: dict) -> None:
        cfg = self.config
        for c in self.couriers:
            if move:
                advance(c, cfg.round_length)
        for c in self.couriers:
            delivered = courier_deliver(c, self.sinks, cfg, now)
            if not delivered and c.buffer and cfg.courier_relay and self._phase is CourierPhase.SPARSE:
                reach = 2 * cfg.tx_range
                # odd-indexed couriers tour the deep band in the sparse phase
                if c.index % 2 == 1:
                    shallow = [o for o in self.couriers
                               if o is not c and o.band_bottom <= c.band_top]
                    for o in sorted(shallow, key=lambda o: (math.dist(c.position, o.position), o.id)):
                        if handoff(c, o, cfg, reach, power_scale=2.0):
                            break
                else:
                    delivered = courier_deliver(c, self.sinks, cfg, now, reach=reach,
                                                power_scale=2.0)
            rec["courier_delivered"] += len(delivered)

    # ------------------------------------------------------------- forwarding
    def _push(self, time: float, kind: EventKind, subject: int, payload) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (time, int(kind), subject, self._seq, payload))

    def _transmit(self, i: int, t: float, flight: _Flight, parent: Optional[int]) -> None:
        """Broadcast by ``i``: tx/rx energy plus overhearing suppression."""
        self._charge(i, self.e_tx, self.airtime)
        if self.trace is not None:
            self.trace.append((t, i, flight.packet.packet_id, parent))
        pending = flight.pending
        inv_c = 1.0 / self.config.sound_speed
        airtime = self.airtime
        for j, d in self.neighbors[i]:
            if not self._usable(j):
                continue
            self._charge(j, self.e_rx, airtime)
            hold = pending.get(j)
            if hold is not None and hold.fire_time > t + d * inv_c + airtime:
                del pending[j]
                hold.cancelled = True
                flight.active -= 1

    def _finish(self, flight: _Flight, outcome: str, hops: int, t: float, rec: dict,
                courier: Optional[CourierNode] = None) -> None:
        if flight.done:
            return
        flight.done = True
        packet = flight.packet
        packet.hop_count = hops
        if self.outcomes is not None:
            self.outcomes.append((packet, outcome))
        if outcome == "dropped":
            rec["dropped"] += 1
            rec["drops"][flight.last_reason] += 1
            return
        packet.delivered_time = t
        if outcome == "delivered":
            rec["delivered"] += 1
        else:
            courier_collect(courier, packet)
            rec["collected"] += 1

    def _copy_lost(self, flight: _Flight, reason: str) -> None:
        flight.last_reason = reason

    def forward_packet(self, hold: _Hold, t: float, rec: dict) -> None:
        """A holder's timer fired: pick the next hop and broadcast."""
        flight = hold.flight
        i = hold.node
        flight.pending.pop(i, None)
        self._relay(flight, i, hold.hops, t, rec, hold.parent)
        flight.active -= 1
        if flight.active == 0 and not flight.done:
            self._finish(flight, "dropped", hold.hops, t, rec)

    def _relay(self, flight: _Flight, i: int, hops: int, t: float, rec: dict,
               parent: Optional[int]) -> None:
        cfg = self.config
        rng = self.rng
        if not self._usable(i):
            self._copy_lost(flight, "energy_depleted")
            return
        if hops >= self.hop_budget:
            self._copy_lost(flight, "hop_budget")
            return
        if self.sink_reach[i]:
            self._transmit(i, t, flight, parent)
            d = self.sink_distance[i]
            if channel.packet_loss_draw(d, rng, cfg):
                self._copy_lost(flight, "loss_draw")
            else:
                arrival = t + self.airtime + d / cfg.sound_speed
                self._finish(flight, "delivered", hops + 1, arrival, rec)
            return
        couriers = self._couriers_in_range(i)
        ranked = self._rank_cache[i]
        # the holder broadcasts even when it knows no forwarder
        self._transmit(i, t, flight, parent)
        if not couriers and not ranked:
            self._copy_lost(flight, "no_forwarder")
            return
        received = None
        lost_any = False
        if couriers:
            courier, d = couriers[0]
            if channel.packet_loss_draw(d, rng, cfg):
                lost_any = True
            else:
                received = courier
        t_ref = t + self.airtime + self.max_prop
        offset = 1 if couriers else 0
        created = 0
        seen = flight.seen
        dist_i = self.neighbor_distance[i]
        for k, (entry, ht) in enumerate(ranked):
            j = entry.id
            if j in seen or not self._usable(j):
                continue
            if channel.packet_loss_draw(dist_i[j], rng, cfg):
                lost_any = True
                continue
            seen.add(j)
            fire = t_ref + ht + (k + offset) * self.slot
            hold = _Hold(flight, j, hops + 1, fire, i)
            flight.pending[j] = hold
            flight.active += 1
            created += 1
            self._push(fire, EventKind.HoldingTimerFire, j, hold)
        if received is not None:
            arrival = t + self.airtime + couriers[0][1] / cfg.sound_speed
            self._finish(flight, "collected", hops + 1, arrival, rec, courier=received)
            self._courier_ack(flight, received)
            return
        if not created:
            self._copy_lost(flight, "loss_draw" if lost_any else "stale_neighbor")

    def _courier_ack(self, flight: _Flight, courier: CourierNode) -> None:
        cfg = self.config
        holders = [(j, self.nodes[j].position, flight.packet) for j in flight.pending]
        ack = (flight.packet.packet_id, flight.packet.source_id)
        cancelled = courier_ack_suppression(ack, holders, courier.position, cfg)
        ack_time = channel.transmission_time(cfg.ack_payload, cfg)
        e_ack = channel.rx_energy(cfg.ack_payload, cfg)
        for j in sorted(cancelled):
            hold = flight.pending.pop(j)
            hold.cancelled = True
            flight.active -= 1
            self._charge(j, e_ack, ack_time)

    # ------------------------------------------------------------------ rounds
    def run_round(self, round_index: int) -> Optional[RoundRecord]:
        """Advance one round; returns None when no sensor is left alive."""
        cfg = self.config
        if not any(self.alive):
            return None
        self.round = round_index
        t0 = (round_index - 1) * cfg.round_length
        rec = {"delivered": 0, "collected": 0, "dropped": 0, "courier_delivered": 0,
               "drops": Counter()}
        self.busy = [0.0] * len(self.nodes)
        self._queue = []
        if self.router.uses_couriers and self.couriers:
            self._courier_waypoint(t0, round_index > 1, rec)
        generated = 0
        for n in self.nodes:
            if not self.alive[n.id]:
                continue
            self._packet_counter += 1
            packet = DataPacket(self._packet_counter, n.id, cfg.packet_payload, round_index, t0)
            flight = _Flight(packet, n.id)
            self._push(t0, EventKind.HoldingTimerFire, n.id, _Hold(flight, n.id, 0, t0, None))
            generated += 1
        queue = self._queue
        while queue:
            t, _, _, _, hold = heapq.heappop(queue)
            if hold.cancelled:
                continue
            self.forward_packet(hold, t, rec)

        for i in range(len(self.nodes)):
            if self.alive[i]:
                idle = cfg.round_length - self.busy[i]
                if idle > 0:
                    self._charge(i, channel.idle_energy(idle, cfg), 0.0)
        for i, e in enumerate(self.energy):
            if self.alive[i] and e <= 0.0:
                self.alive[i] = False
        self._sync_nodes()
        if round_index % cfg.hello_interval_rounds == 0:
            self.hello_cycle(round_index)

        alive = self.alive.count(True)
        throughput = rec["delivered"] + rec["collected"]
        self.cumulative += throughput
        residuals = [e for e, a in zip(self.energy, self.alive) if a]
        record = RoundRecord(
            round=round_index, alive=alive, dead=len(self.nodes) - alive, generated=generated,
            delivered=rec["delivered"], collected=rec["collected"], dropped=rec["dropped"],
            energy_consumed=self._round_energy, cumulative_delivered=self.cumulative,
            courier_delivered=rec["courier_delivered"],
            courier_buffered=sum(len(c.buffer) for c in self.couriers),
            residual_std=float(np.std(residuals)) if residuals else 0.0,
            drops={r: rec["drops"][r] for r in DROP_REASONS if rec["drops"][r]},
        )
        self._round_energy = 0.0
        self.records.append(record)
        return record

    def run(self, rounds_max: Optional[int] = None) -> list[RoundRecord]:
        limit = self.config.rounds_max if rounds_max is None else rounds_max
        for r in range(self.round + 1, limit + 1):
            if self.run_round(r) is None or not any(self.alive):
                break
        return self.records

    @property
    def courier_energy(self) -> float:
        return sum(c.energy_ledger for c in self.couriers)


def run_simulation(config: NetworkConfig, protocol: str = "amctd",
                   seed: Optional[int] = None) -> list[RoundRecord]:
    """Full run until ``rounds_max`` or until every sensor is dead."""
    return Simulation(config, protocol, seed).run()
