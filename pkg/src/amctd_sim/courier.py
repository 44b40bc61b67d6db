"""Vertical sojourn tours of courier nodes and their buffered delivery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .channel import tx_energy
from .model import CourierNode, DataPacket, NetworkConfig, Sink
from .routing import CourierPhase

# sparse-phase bands, assigned alternately by courier index
DEEP_BAND_TOP = 355.0
MID_BAND = (100.0, 200.0)


@dataclass(frozen=True)
class TourPlan:
    courier_index: int
    band_top: float
    band_bottom: float
    speed: float

    def __post_init__(self):
        if not 0 <= self.band_top < self.band_bottom:
            raise ValueError(f"invalid band ({self.band_top}, {self.band_bottom})")

    @property
    def is_deep(self) -> bool:
        return self.band_top >= DEEP_BAND_TOP


def tour_plan(courier_index: int, phase: CourierPhase, config: NetworkConfig) -> TourPlan:
    if not 1 <= courier_index <= max(config.courier_count, 1):
        raise ValueError(f"courier index {courier_index} out of range")
    if phase is CourierPhase.INITIAL:
        return TourPlan(courier_index, 0.0, config.water_depth, config.courier_speed)
    speed = config.courier_speed * config.courier_sparse_speed_multiplier
    if courier_index % 2 == 1:
        # shallow scenarios fall back to the lower half of the column
        top = DEEP_BAND_TOP if DEEP_BAND_TOP < config.water_depth else config.water_depth / 2
        return TourPlan(courier_index, top, config.water_depth, speed)
    top, bottom = MID_BAND
    bottom = min(bottom, config.water_depth)
    return TourPlan(courier_index, min(top, bottom / 2), bottom, speed)


def position_at(plan: TourPlan, start_depth: float, start_heading: str,
                elapsed: float) -> tuple[float, str]:
    """Triangle-wave depth after ``elapsed`` seconds, reflecting at both band edges."""
    top, bottom = plan.band_top, plan.band_bottom
    if not top <= start_depth <= bottom:
        raise ValueError(f"start depth {start_depth} outside band ({top}, {bottom})")
    if start_heading not in ("up", "down"):
        raise ValueError(f"heading must be 'up' or 'down', got {start_heading!r}")
    if elapsed == 0:
        return start_depth, start_heading
    length = bottom - top
    # unfold the cycle: [0, length) descending, [length, 2*length) ascending
    if start_heading == "down":
        u = start_depth - top
    else:
        u = length + (bottom - start_depth)
    u = math.fmod(u + plan.speed * elapsed, 2 * length)
    if u < length:
        return top + u, "down"
    return bottom - (u - length), "up"


def set_plan(courier: CourierNode, plan: TourPlan) -> None:
    """Switch a courier to a new tour; it travels to the band if currently outside."""
    courier.speed = plan.speed
    courier.band_top, courier.band_bottom = plan.band_top, plan.band_bottom
    depth = courier.depth
    if depth < plan.band_top:
        courier.in_transit, courier.heading = True, "down"
    elif depth > plan.band_bottom:
        courier.in_transit, courier.heading = True, "up"
    else:
        courier.in_transit = False


def advance(courier: CourierNode, dt: float) -> None:
    """Move a courier forward by ``dt`` seconds along its current tour."""
    depth, heading = courier.depth, courier.heading
    if courier.in_transit:
        target = courier.band_top if heading == "down" else courier.band_bottom
        gap = abs(target - depth)
        step = courier.speed * dt
        if step < gap:
            depth += step if heading == "down" else -step
            courier.position = (*courier.position[:2], depth)
            return
        depth, dt = target, dt - gap / courier.speed
        courier.in_transit = False
    plan = TourPlan(courier.index, courier.band_top, courier.band_bottom, courier.speed)
    depth, heading = position_at(plan, depth, heading, dt)
    courier.position = (*courier.position[:2], depth)
    courier.heading = heading


def courier_collect(courier: CourierNode, packet: DataPacket) -> list[DataPacket]:
    if packet.packet_id not in courier.buffered_ids:
        courier.buffered_ids.add(packet.packet_id)
        courier.buffer.append(packet)
    return courier.buffer


def offload_energy(count: int, config: NetworkConfig, power_scale: float = 1.0) -> float:
    """Courier energy to push ``count`` buffered packets, scaled by aggregation."""
    return power_scale * config.aggregation_factor * count * tx_energy(config.packet_payload, config)


def courier_deliver(courier: CourierNode, sinks: Sequence[Sink], config: NetworkConfig,
                    now: float = 0.0, reach: float = None,
                    power_scale: float = 1.0) -> list[DataPacket]:
    """Hand the whole buffer to a sink within ``reach`` (default tx_range).

    Returns the delivered packets; an empty list when no sink is reachable.
    """
    if not courier.buffer:
        return []
    reach = config.tx_range if reach is None else reach
    if not any(math.dist(courier.position, s.position) <= reach for s in sinks):
        return []
    delivered = courier.buffer
    for packet in delivered:
        packet.delivered_time = now
    courier.energy_ledger += offload_energy(len(delivered), config, power_scale)
    courier.buffer = []
    courier.buffered_ids = set()
    return delivered


def handoff(src: CourierNode, dst: CourierNode, config: NetworkConfig,
            reach: float, power_scale: float = 1.0) -> int:
    """Move ``src``'s buffer into ``dst`` when within ``reach``; returns count moved."""
    if not src.buffer or math.dist(src.position, dst.position) > reach:
        return 0
    moved = len(src.buffer)
    src.energy_ledger += offload_energy(moved, config, power_scale)
    for packet in src.buffer:
        courier_collect(dst, packet)
    src.buffer = []
    src.buffered_ids = set()
    return moved
