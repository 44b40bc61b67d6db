"""Command-line front end: run protocol/seed matrices and write CSV results."""

from __future__ import annotations

import argparse
import os
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .engine import PROTOCOLS, run_simulation
from .metrics import METRICS, aggregate_runs, emit_all, lifetime_summary, series_from_records
from .model import ConfigError, NetworkConfig, config_with_overrides, dump_config, load_config

DEFAULT_OUT = "results"


@dataclass
class RunRequest:
    config: NetworkConfig
    protocols: list[str]
    seeds: list[int]
    out_dir: Path
    confidence: float = 0.95
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.protocols:
            raise ConfigError("at least one protocol is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amctd-sim",
                description="Compare AMCTD, DBR and EEDBR on a simulated underwater network.")
    p.add_argument("--config", type=Path, help="key = value scenario file")
    p.add_argument("--protocol", default=",".join(PROTOCOLS),
                   help="comma-separated subset of amctd,dbr,eedbr (default: all)")
    p.add_argument("--seeds", help="comma-separated seed list")
    p.add_argument("--runs", type=int,
                   help="number of runs; seeds rng_seed .. rng_seed+runs-1 (default run_count)")
    p.add_argument("--out", type=Path, default=None,
                   help=f"output directory (default $UWSN_SIM_OUT or ./{DEFAULT_OUT})")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field; repeatable")
    p.add_argument("--confidence", type=float, default=0.95)
    return p


def parse_args(argv: Optional[Sequence[str]] = None) -> RunRequest:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else NetworkConfig()
        overrides = {}
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value.strip()
        config = config_with_overrides(config, overrides)
        protocols = [p.strip().lower() for p in args.protocol.split(",") if p.strip()]
        unknown = [p for p in protocols if p not in PROTOCOLS]
        if unknown:
            raise ConfigError(f"unknown protocol(s): {', '.join(unknown)}")
        if args.seeds:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        else:
            runs = config.run_count if args.runs is None else args.runs
            seeds = list(range(config.rng_seed, config.rng_seed + runs))
        out = args.out or Path(os.environ.get("UWSN_SIM_OUT", DEFAULT_OUT))
        return RunRequest(config, protocols, seeds, Path(out), args.confidence, overrides)
    except (ConfigError, ValueError) as exc:
        parser.error(str(exc))


def _protocol_summary(protocol: str, runs) -> dict:
    lifetimes = [lifetime_summary(records) for records in runs]
    firsts = [f for f, _, _ in lifetimes if f is not None]
    losses = []
    for records in runs:
        losses.extend(r.dropped / max(r.generated, 1) for r in records)
    return {
        "protocol": protocol,
        "first_death": statistics.mean(firsts) if firsts else None,
        "lifetime": statistics.mean(l for _, _, l in lifetimes),
        "delivered": statistics.mean(records[-1].cumulative_delivered if records else 0
                                     for records in runs),
        "loss": statistics.mean(losses) if losses else 0.0,
    }


def format_summary(rows, seeds) -> str:
    lines = [f"seeds: {','.join(str(s) for s in seeds)}",
             f"{'protocol':<9}{'first_death':>13}{'lifetime':>10}{'delivered':>12}{'mean_loss':>11}"]
    for row in rows:
        first = "-" if row["first_death"] is None else f"{row['first_death']:.1f}"
        lines.append(f"{row['protocol']:<9}{first:>13}{row['lifetime']:>10.1f}"
                     f"{row['delivered']:>12.1f}{row['loss']:>11.4f}")
    return "\n".join(lines) + "\n"


def execute(request: RunRequest, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    out = request.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = []
        for protocol in sorted(request.protocols):
            runs = [run_simulation(request.config, protocol, seed) for seed in sorted(request.seeds)]
            per_run = [series_from_records(records, seed)
                       for records, seed in zip(runs, sorted(request.seeds))]
            aggregates = [aggregate_runs([s[m] for s in per_run], request.confidence)
                          for m in METRICS]
            emit_all(aggregates, out, protocol)
            summary.append(_protocol_summary(protocol, runs))
        text = format_summary(summary, sorted(request.seeds))
        (out / "summary.txt").write_text(text, encoding="utf-8")
        (out / "config.txt").write_text(dump_config(request.config), encoding="utf-8")
    except OSError as exc:
        print(f"amctd-sim: {exc}", file=sys.stderr)
        return 1
    stream.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        request = parse_args(argv)
    except ConfigError as exc:
        print(f"amctd-sim: {exc}", file=sys.stderr)
        return 2
    return execute(request)


if __name__ == "__main__":
    raise SystemExit(main())
