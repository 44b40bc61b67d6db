"""Acoustic link model and per-event energy accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import NetworkConfig, Position


@dataclass(frozen=True)
class LinkSample:
    distance: float
    propagation_delay: float
    loss_probability: float


def in_range(a: Position, b: Position, config: NetworkConfig) -> bool:
    return math.dist(a, b) <= config.tx_range


def propagation_delay(distance: float, config: NetworkConfig) -> float:
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return distance / config.sound_speed


def transmission_time(payload: int, config: NetworkConfig) -> float:
    if payload < 0:
        raise ValueError("payload must be >= 0")
    return payload * 8 / config.bitrate


def tx_energy(payload: int, config: NetworkConfig) -> float:
    return config.tx_power * transmission_time(payload, config)


def rx_energy(payload: int, config: NetworkConfig) -> float:
    return config.rx_power * transmission_time(payload, config)


def idle_energy(duration: float, config: NetworkConfig) -> float:
    if duration < 0:
        raise ValueError("duration must be >= 0")
    return config.idle_power * duration


def loss_probability(distance: float, config: NetworkConfig) -> float:
    """Linear-in-distance Bernoulli loss, ``loss_base * d / tx_range``, capped at 1."""
    return min(1.0, config.loss_base * distance / config.tx_range)


def link_sample(distance: float, config: NetworkConfig) -> LinkSample:
    return LinkSample(distance, propagation_delay(distance, config),
                      loss_probability(distance, config))


def packet_loss_draw(distance: float, rng, config: NetworkConfig) -> bool:
    """Return True when the reception at ``distance`` is lost.

    ``rng`` is anything with a ``random()`` method returning floats in [0, 1).
    One value is always consumed so the stream stays aligned across models.
    """
    u = rng.random()
    return u < loss_probability(distance, config)
