"""AMCTD adaptive forwarding: weight regimes, depth-threshold schedule,
forwarder election, holding time and duplicate suppression."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .model import DataPacket, NeighborEntry, NetworkConfig, SensorNode

# relative floor applied to weight denominators
SINGULARITY_EPS = 1e-6
# absolute dead count after which the last threshold applies
LATE_THRESHOLD_DEAD = 200


class Regime(str, Enum):
    EQ1 = "EQ1"
    EQ2 = "EQ2"
    EQ3 = "EQ3"


class CourierPhase(str, Enum):
    INITIAL = "INITIAL"
    SPARSE = "SPARSE"


def percent_ceil(percent: int, total: int) -> int:
    """ceil(percent/100 * total) in exact integer arithmetic."""
    return -(-percent * total // 100)


@dataclass(frozen=True)
class ProtocolState:
    total_nodes: int
    dead_count: int = 0
    regime: Regime = Regime.EQ1
    depth_threshold: float = 60.0
    courier_phase: CourierPhase = CourierPhase.INITIAL
    threshold_schedule: tuple[float, float, float] = (60.0, 40.0, 20.0)

    @classmethod
    def initial(cls, total_nodes: int, schedule: Sequence[float] = (60.0, 40.0, 20.0)):
        return update_state(0, cls(total_nodes, threshold_schedule=tuple(schedule)))


def update_state(dead_count: int, state: ProtocolState) -> ProtocolState:
    n = state.total_nodes
    first, second, third = state.threshold_schedule
    sparse_at = percent_ceil(2, n)
    if dead_count < sparse_at:
        regime, threshold = Regime.EQ1, first
    elif dead_count < percent_ceil(80, n):
        regime, threshold = Regime.EQ2, second
    else:
        regime, threshold = Regime.EQ3, second
    if dead_count >= sparse_at and dead_count > LATE_THRESHOLD_DEAD:
        threshold = third
    phase = CourierPhase.SPARSE if dead_count >= percent_ceil(75, n) else CourierPhase.INITIAL
    return dataclasses.replace(state, dead_count=dead_count, regime=regime,
                               depth_threshold=threshold, courier_phase=phase)


def weight_value(regime: Regime, residual: float, depth: float, config: NetworkConfig) -> float:
    p = config.priority_value
    if regime is Regime.EQ1:
        height = max(config.water_depth - depth, SINGULARITY_EPS * config.water_depth)
        return p * residual / height
    if regime is Regime.EQ2:
        r = max(residual, SINGULARITY_EPS * config.initial_energy)
        if config.eq2_as_printed:
            return p * depth / r
        return p * (config.water_depth - depth) / r
    d = max(depth, SINGULARITY_EPS * config.water_depth)
    return residual / (p * d)


def weight(node: SensorNode, state: ProtocolState, config: NetworkConfig) -> float:
    return weight_value(state.regime, node.residual_energy, node.depth, config)


def _rank_key(entry: NeighborEntry):
    if entry.is_courier:
        return (0, entry.distance, 0.0, entry.id)
    return (1, -entry.weight, -entry.residual_energy, entry.id)


def eligible_neighbors(source: SensorNode, state: ProtocolState,
                       couriers: Iterable[NeighborEntry] = ()) -> list[NeighborEntry]:
    """Threshold-queue members plus any courier currently in range.

    ``couriers`` are entries for couriers the caller found within range now;
    couriers move, so they are never read from the hello-time table.  The
    result is ordered best-first (couriers, then descending weight).
    """
    threshold = state.depth_threshold
    out = [e for e in source.neighbor_table
           if not e.is_courier and source.depth - e.depth >= threshold]
    out.extend(couriers)
    out.sort(key=_rank_key)
    return out


def select_forwarder(candidates: Sequence[NeighborEntry],
                     state: Optional[ProtocolState] = None) -> Optional[int]:
    if not candidates:
        return None
    return min(candidates, key=_rank_key).id


def holding_time(own_weight: float, candidate_weights: Sequence[float],
                 config: NetworkConfig) -> float:
    w_max = max(candidate_weights)
    w_min = min(candidate_weights)
    if w_max <= w_min:
        return 0.0
    return config.t_max_holding * (w_max - own_weight) / (w_max - w_min)


def suppress_on_overheard(pending: DataPacket, overheard_packet_id) -> bool:
    return pending.packet_id == overheard_packet_id


def courier_ack_suppression(ack, holders, courier_position, config: NetworkConfig) -> set:
    """Holders cancelled by a courier's ACK.

    ``ack`` is ``(packet_id, source_id)``; ``holders`` yields
    ``(holder_id, position, pending_packet)``.
    """
    packet_id, source_id = ack
    cancelled = set()
    for holder_id, position, pending in holders:
        if pending.packet_id != packet_id or pending.source_id != source_id:
            continue
        if math.dist(position, courier_position) <= config.tx_range:
            cancelled.add(holder_id)
    return cancelled


class AmctdRouter:
    """Adapter used by the engine to drive AMCTD."""

    name = "amctd"
    uses_couriers = True
    adaptive = True

    def __init__(self, config: NetworkConfig):
        self.config = config
        self.state = ProtocolState.initial(config.node_count, config.depth_threshold_schedule)

    def on_hello(self, dead_count: int) -> None:
        self.state = update_state(dead_count, self.state)

    def node_weight(self, node: SensorNode) -> float:
        return weight(node, self.state, self.config)

    def threshold_queue(self, node: SensorNode) -> list[int]:
        threshold = self.state.depth_threshold
        return [e.id for e in node.neighbor_table if node.depth - e.depth >= threshold]

    def rank(self, node: SensorNode, couriers: Sequence[NeighborEntry] = ()):
        """Ordered ``(entry, holding_time)`` pairs, best forwarder first."""
        ranked = eligible_neighbors(node, self.state, couriers)
        sensors = [e.weight for e in ranked if not e.is_courier]
        out = []
        for e in ranked:
            ht = 0.0 if e.is_courier else holding_time(e.weight, sensors, self.config)
            out.append((e, ht))
        return out
