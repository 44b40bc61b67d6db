"""Domain types, scenario configuration and random topology generation."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

Position = tuple[float, float, float]


class ConfigError(ValueError):
    """Raised for invalid configuration values, keys or files."""


@dataclass(frozen=True)
class NetworkConfig:
    # reference scenario
    region_x: float = 500.0
    region_y: float = 500.0
    water_depth: float = 500.0
    node_count: int = 225
    initial_energy: float = 70.0
    packet_payload: int = 50
    tx_range: float = 100.0
    courier_count: int = 4
    sink_spacing: float = 100.0
    sink_count: int = 5
    priority_value: float = 1.0
    tx_power: float = 2.0
    rx_power: float = 0.1
    idle_power: float = 0.01
    bitrate: float = 10_000.0
    sound_speed: float = 1500.0
    rounds_max: int = 15_000
    hello_interval_rounds: int = 50
    aggregation_factor: float = 0.6
    run_count: int = 3
    rng_seed: int = 42
    # channel
    loss_base: float = 0.1
    round_length: float = 1.0
    hello_payload: int = 8
    ack_payload: int = 8
    # routing
    t_max_holding: float = 0.5
    depth_threshold_schedule: tuple[float, ...] = (60.0, 40.0, 20.0)
    eq2_as_printed: bool = True
    baseline_depth_threshold: float = 60.0
    # couriers
    courier_speed: float = 3.0
    courier_sparse_speed_multiplier: float = 2.0
    courier_relay: bool = True

    def __post_init__(self):
        positive = ("region_x", "region_y", "water_depth", "tx_range", "bitrate",
                    "sound_speed", "priority_value", "round_length", "courier_speed",
                    "courier_sparse_speed_multiplier", "baseline_depth_threshold")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if not 0 < self.aggregation_factor <= 1:
            raise ConfigError("aggregation_factor must lie in (0, 1]")
        if self.node_count < 1:
            raise ConfigError("node_count must be >= 1")
        if self.courier_count < 0:
            raise ConfigError("courier_count must be >= 0")
        if self.sink_count < 1:
            raise ConfigError("sink_count must be >= 1")
        if not 0 <= self.loss_base <= 1:
            raise ConfigError("loss_base must lie in [0, 1]")
        nonneg = ("initial_energy", "packet_payload", "tx_power", "rx_power", "idle_power",
                  "rounds_max", "t_max_holding", "hello_payload", "ack_payload", "run_count")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.hello_interval_rounds < 1:
            raise ConfigError("hello_interval_rounds must be >= 1")
        if len(self.depth_threshold_schedule) != 3 or min(self.depth_threshold_schedule) <= 0:
            raise ConfigError("depth_threshold_schedule needs three positive thresholds")

    def replace(self, **overrides) -> "NetworkConfig":
        return dataclasses.replace(self, **overrides)


CONFIG_KEYS = tuple(f.name for f in dataclasses.fields(NetworkConfig))
_DEFAULTS = NetworkConfig()


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "on", "yes", "1"):
        return True
    if lowered in ("false", "off", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_value(key: str, text: str):
    """Convert the text form of a config value to the field's type."""
    if key not in CONFIG_KEYS:
        raise ConfigError(f"unknown config key: {key!r}")
    default = getattr(_DEFAULTS, key)
    try:
        if isinstance(default, bool):
            return _parse_bool(text)
        if isinstance(default, int):
            return int(text.strip())
        if isinstance(default, float):
            return float(text.strip())
        if isinstance(default, tuple):
            return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
    raise ConfigError(f"unsupported type for {key}")  # pragma: no cover


def config_with_overrides(base: NetworkConfig, overrides: dict[str, str]) -> NetworkConfig:
    values = {key: parse_value(key, text) for key, text in overrides.items()}
    return base.replace(**values)


def load_config(path) -> NetworkConfig:
    """Read a flat ``key = value`` file; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        overrides[key] = value
    return config_with_overrides(NetworkConfig(), overrides)


def dump_config(config: NetworkConfig) -> str:
    lines = []
    for key in CONFIG_KEYS:
        value = getattr(config, key)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


@dataclass
class NeighborEntry:
    id: int
    depth: float
    weight: float
    residual_energy: float = 0.0
    last_heard_round: int = 0
    is_courier: bool = False
    distance: float = 0.0


@dataclass
class SensorNode:
    id: int
    position: Position
    residual_energy: float
    weight: float = 0.0
    alive: bool = True
    neighbor_table: list[NeighborEntry] = field(default_factory=list)
    threshold_queue: list[int] = field(default_factory=list)

    @property
    def depth(self) -> float:
        return self.position[2]


@dataclass
class DataPacket:
    packet_id: int
    source_id: int
    payload_size: int
    created_round: int
    created_time: float
    hop_count: int = 0
    delivered_time: Optional[float] = None


@dataclass
class CourierNode:
    id: int
    index: int
    position: Position
    speed: float
    band_top: float
    band_bottom: float
    heading: str = "up"
    buffer: list[DataPacket] = field(default_factory=list)
    # joules spent by the courier; never drawn from sensor energy
    energy_ledger: float = 0.0
    # set while travelling toward a newly assigned band after a phase switch
    in_transit: bool = False
    buffered_ids: set = field(default_factory=set, repr=False)

    @property
    def depth(self) -> float:
        return self.position[2]


@dataclass(frozen=True)
class Sink:
    id: int
    position: Position


def initial_node_energy(config: NetworkConfig) -> float:
    return config.initial_energy


def sink_positions(config: NetworkConfig) -> list[Position]:
    if config.sink_count * config.sink_spacing > config.region_x:
        raise ConfigError(
            f"{config.sink_count} sinks at {config.sink_spacing} m spacing do not fit "
            f"in region_x = {config.region_x} m"
        )
    y = config.region_y / 2
    return [(config.sink_spacing / 2 + k * config.sink_spacing, y, 0.0)
            for k in range(config.sink_count)]


def generate_topology(config: NetworkConfig, seed: int):
    """Place sensors uniformly in the 3-D box, sinks on the surface centerline and
    couriers on the sea floor.

    Returns ``(nodes, sinks, couriers)``; the result depends only on
    ``(config, seed)``.
    """
    sinks = [Sink(k, pos) for k, pos in enumerate(sink_positions(config))]
    rng = np.random.default_rng(seed)
    xyz = rng.uniform(0.0, 1.0, size=(config.node_count, 3))
    xyz *= np.array([config.region_x, config.region_y, config.water_depth])
    energy = initial_node_energy(config)
    nodes = [SensorNode(i, (float(x), float(y), float(z)), energy)
             for i, (x, y, z) in enumerate(xyz)]
    couriers = []
    for k in range(config.courier_count):
        x = config.region_x * (k + 0.5) / config.courier_count
        couriers.append(CourierNode(
            id=k, index=k + 1, position=(x, _courier_y(k, config), config.water_depth),
            speed=config.courier_speed, band_top=0.0, band_bottom=config.water_depth,
            heading="up",
        ))
    return nodes, sinks, couriers


def distance(a: Position, b: Position) -> float:
    return math.dist(a, b)


def _courier_y(k: int, config: NetworkConfig) -> float:
    # staggered either side of the sink line
    offset = 0.15 * config.region_y
    return config.region_y / 2 + (offset if k % 2 else -offset)
