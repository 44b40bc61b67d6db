"""Per-round metrics, multi-run aggregation with t-intervals, and CSV output."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from scipy import stats

METRICS = ("alive_nodes", "dead_nodes", "avg_energy_per_round", "throughput", "loss_probability")


@dataclass(frozen=True)
class RoundMetrics:
    alive_nodes: int
    dead_nodes: int
    avg_energy_per_round: float
    throughput: int
    loss_probability: float


@dataclass
class MetricSeries:
    metric: str
    values: list[float]
    run_id: object = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")


@dataclass
class AggregateSeries:
    metric: str
    mean: list[float]
    half_width: list[float]
    n: int

    def rows(self):
        """``(round, mean, ci_low, ci_high)`` with rounds numbered from 1."""
        for k, (m, h) in enumerate(zip(self.mean, self.half_width), 1):
            yield k, m, m - h, m + h


def round_metrics(record, alive: Optional[int] = None) -> RoundMetrics:
    """Metrics for one round.

    ``alive`` is the number of nodes the energy is averaged over; it defaults
    to the nodes that were alive when the round started (``generated``).
    """
    if alive is None:
        alive = record.generated
    return RoundMetrics(
        alive_nodes=record.alive,
        dead_nodes=record.dead,
        avg_energy_per_round=record.energy_consumed / max(alive, 1),
        throughput=record.delivered + record.collected,
        loss_probability=record.dropped / max(record.generated, 1),
    )


def series_from_records(records, run_id=None) -> dict[str, MetricSeries]:
    rows = [round_metrics(r) for r in records]
    return {m: MetricSeries(m, [float(getattr(row, m)) for row in rows], run_id)
            for m in METRICS}


def _pad(values: Sequence[float], length: int) -> list[float]:
    values = list(values)
    if not values:
        return [0.0] * length
    return values + [values[-1]] * (length - len(values))


def aggregate_runs(series: Sequence[MetricSeries], confidence: float = 0.95) -> AggregateSeries:
    """Per-round mean and Student-t half-width across runs.

    Shorter runs are padded with their last value.
    """
    if not series:
        raise ValueError("need at least one series")
    metric = series[0].metric
    if any(s.metric != metric for s in series):
        raise ValueError("cannot aggregate different metrics: "
                         + ", ".join(sorted({s.metric for s in series})))
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    n = len(series)
    length = max(len(s.values) for s in series)
    columns = list(zip(*(_pad(s.values, length) for s in series))) if length else []
    t_crit = float(stats.t.ppf((1 + confidence) / 2, n - 1)) if n > 1 else 0.0
    means, halves = [], []
    for column in columns:
        mean = math.fsum(column) / n
        if n > 1:
            var = math.fsum((v - mean) ** 2 for v in column) / (n - 1)
            half = t_crit * math.sqrt(var) / math.sqrt(n)
        else:
            half = 0.0
        means.append(mean)
        halves.append(half)
    return AggregateSeries(metric, means, halves, n)


def lifetime_summary(records) -> tuple[Optional[int], Optional[int], int]:
    """``(first_death_round, stability_end, lifetime_rounds)``.

    Lifetime is the first round with no node alive, or the last simulated
    round when the network never died out.
    """
    if not records:
        raise ValueError("no records")
    first = next((r.round for r in records if r.dead > 0), None)
    lifetime = next((r.round for r in records if r.alive == 0), records[-1].round)
    return first, first, lifetime


def _fmt(value: float) -> str:
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def emit_csv(aggregate: AggregateSeries, path) -> Path:
    path = Path(path)
    lines = ["round,mean,ci_low,ci_high"]
    for k, mean, low, high in aggregate.rows():
        lines.append(f"{k},{_fmt(mean)},{_fmt(low)},{_fmt(high)}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_all(aggregates: Sequence[AggregateSeries], out_dir, protocol: str) -> list[Path]:
    """Write ``<metric>_<protocol>.csv`` for each aggregate."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [emit_csv(a, out_dir / f"{a.metric}_{protocol}.csv") for a in aggregates]


def read_csv(path) -> list[tuple[int, float, float, float]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "round,mean,ci_low,ci_high":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            k, mean, low, high = line.strip().split(",")
            rows.append((int(k), float(mean), float(low), float(high)))
    return rows
