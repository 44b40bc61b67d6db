"""Minimal DBR and EEDBR forwarding policies used as comparison baselines.

Both keep a fixed depth threshold and ignore courier nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import NeighborEntry, NetworkConfig, SensorNode


@dataclass(frozen=True)
class BaselinePolicy:
    kind: str
    depth_threshold: float = 60.0
    t_max_holding: float = 0.5

    def __post_init__(self):
        if self.kind not in ("DBR", "EEDBR"):
            raise ValueError(f"unknown baseline kind {self.kind!r}")
        if self.depth_threshold <= 0:
            raise ValueError("depth_threshold must be > 0")


def dbr_forward_decision(source_depth: float, candidate_depth: float,
                         policy: BaselinePolicy) -> bool:
    return source_depth - candidate_depth >= policy.depth_threshold


def dbr_holding_time(depth_gain: float, policy: BaselinePolicy, tx_range: float) -> float:
    """Earlier for larger depth gain; zero once the gain reaches the full range."""
    ht = policy.t_max_holding * (1.0 - depth_gain / tx_range)
    return min(max(ht, 0.0), policy.t_max_holding)


def _eedbr_key(entry: NeighborEntry):
    return (-entry.residual_energy, entry.depth, entry.id)


def eedbr_select(candidates: Sequence[NeighborEntry], policy: BaselinePolicy) -> Optional[int]:
    if not candidates:
        return None
    return min(candidates, key=_eedbr_key).id


def eedbr_holding_time(own_residual: float, residuals: Sequence[float],
                       policy: BaselinePolicy) -> float:
    r_max, r_min = max(residuals), min(residuals)
    if r_max <= r_min:
        return 0.0
    return policy.t_max_holding * (r_max - own_residual) / (r_max - r_min)


class _BaselineRouter:
    uses_couriers = False
    adaptive = False

    def __init__(self, config: NetworkConfig):
        self.config = config
        self.policy = BaselinePolicy(self.kind, config.baseline_depth_threshold,
                                     config.t_max_holding)

    @property
    def depth_threshold(self) -> float:
        return self.policy.depth_threshold

    def on_hello(self, dead_count: int) -> None:
        pass

    def node_weight(self, node: SensorNode) -> float:
        return node.residual_energy

    def _eligible(self, node: SensorNode) -> list[NeighborEntry]:
        return [e for e in node.neighbor_table
                if not e.is_courier and dbr_forward_decision(node.depth, e.depth, self.policy)]

    def threshold_queue(self, node: SensorNode) -> list[int]:
        return [e.id for e in self._eligible(node)]


class DbrRouter(_BaselineRouter):
    name = "dbr"
    kind = "DBR"

    def rank(self, node: SensorNode, couriers=()):
        eligible = self._eligible(node)
        eligible.sort(key=lambda e: (e.depth, e.id))
        tx_range = self.config.tx_range
        return [(e, dbr_holding_time(node.depth - e.depth, self.policy, tx_range))
                for e in eligible]


class EedbrRouter(_BaselineRouter):
    name = "eedbr"
    kind = "EEDBR"

    def rank(self, node: SensorNode, couriers=()):
        eligible = self._eligible(node)
        eligible.sort(key=_eedbr_key)
        residuals = [e.residual_energy for e in eligible]
        return [(e, eedbr_holding_time(e.residual_energy, residuals, self.policy))
                for e in eligible]
