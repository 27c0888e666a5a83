"""
Command-line front end.

Each subcommand runs one experiment and writes its :class:`MetricTable` as
CSV with the fixed header::

    sweep_var,sweep_value,variant,metric,value,trials,stderr

Exit status: 0 on success, 2 for configuration/usage errors, 3 for numeric
or domain errors, 4 for I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Optional

from . import experiments
from .array_model import ArrayGeometry
from .errors import ConfigError, DomainError, NumericError, UsageError
from .experiments import ExperimentConfig, MetricTable

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
CSV_HEADER = ("sweep_var", "sweep_value", "variant", "metric", "value", "trials", "stderr")

SUBCOMMANDS = {
    "estimate": experiments.estimate_once,
    "sweep-snr": experiments.sweep_snr,
    "sweep-snapshots": experiments.sweep_snapshots,
    "sweep-separation": experiments.sweep_separation,
    "approx-error": lambda c: experiments.approx_error_sweep(c.geometry, c.doas_deg, c.snr_grid_db),
    "corr-vs-snr": experiments.correlation_table,
}

_CONFIG_KEYS = {
    "geometry", "doas_deg", "snr_grid_db", "snapshot_grid", "trial_count", "seed",
    "grid_step_deg", "separation_grid_deg", "variants", "snr_db", "n_snapshots",
    "sensor_pair", "workers",
}
_ALIASES = {"doas": "doas_deg", "snr_grid": "snr_grid_db",
            "separation_grid": "separation_grid_deg", "grid_step": "grid_step_deg"}
_GEOMETRY_KEYS = {"element_count", "spacing", "positions"}


def _parse_geometry(geo) -> ArrayGeometry:
    if not isinstance(geo, dict):
        raise ConfigError("geometry", "expected an object")
    for key in geo:
        if key not in _GEOMETRY_KEYS:
            raise ConfigError(f"geometry.{key}", "unknown key")
    try:
        if "positions" in geo:
            if {"element_count", "spacing"} & geo.keys():
                raise ConfigError("geometry.positions",
                                  "give either positions or element_count/spacing")
            positions = geo["positions"]
            if not isinstance(positions, list):
                raise ConfigError("geometry.positions", "expected a list")
            return ArrayGeometry(tuple(positions))
        count = geo.get("element_count", 10)
        if isinstance(count, bool) or not isinstance(count, int):
            raise ConfigError("geometry.element_count", f"expected an integer, got {count!r}")
        return ArrayGeometry.ula(count, geo.get("spacing", 0.5))
    except (DomainError, TypeError) as exc:
        raise ConfigError("geometry", str(exc)) from None


def parse_config(text: str) -> ExperimentConfig:
    """Build a validated :class:`ExperimentConfig` from a JSON document.

    Missing keys take the defaults of :class:`ExperimentConfig`; an empty
    document (or ``{}``) is the default scenario.
    """
    if not text.strip():
        return ExperimentConfig()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("", "top level must be a JSON object")

    kwargs = {}
    for key, value in doc.items():
        name = _ALIASES.get(key, key)
        if name not in _CONFIG_KEYS:
            raise ConfigError(key, "unknown key")
        if name in kwargs:
            raise ConfigError(key, f"duplicates {name}")
        kwargs[name] = value
    if "geometry" in kwargs:
        kwargs["geometry"] = _parse_geometry(kwargs["geometry"])
    return ExperimentConfig(**kwargs)


def _fmt(value) -> str:
    return format(float(value), ".17g")


def emit_csv(table: MetricTable, path) -> None:
    """Write ``table`` as CSV (UTF-8, LF endings, rows in canonical order)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in table.sorted():
            writer.writerow((row.sweep_var, _fmt(row.sweep_value), row.variant, row.metric,
                             _fmt(row.value), str(int(row.trials)), _fmt(row.stderr)))


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    config_path: Optional[str] = None
    output_path: Optional[str] = None
    seed: Optional[int] = None
    grid_step: Optional[float] = None
    workers: Optional[int] = None


def load_config(inv: CliInvocation) -> ExperimentConfig:
    if inv.config_path is None:
        config = ExperimentConfig()
    else:
        with open(inv.config_path, encoding="utf-8") as fh:
            config = parse_config(fh.read())
    overrides = {}
    if inv.seed is not None:
        overrides["seed"] = inv.seed
    if inv.grid_step is not None:
        overrides["grid_step_deg"] = inv.grid_step
    if inv.workers is not None:
        overrides["workers"] = inv.workers
    return config.replace(**overrides) if overrides else config


def _summary(inv, config, out_path, elapsed, table) -> str:
    lines = [
        f"subcommand: {inv.subcommand}",
        f"scenario: M={config.geometry.element_count} positions={list(config.geometry.positions)} "
        f"doas_deg={list(config.doas_deg)} noise_power=1",
        f"seed: {config.seed}",
        f"wall_time_s: {elapsed:.3f}",
        f"output: {out_path}",
    ]
    if inv.subcommand == "estimate":
        for variant in config.variants:
            angles = [r.value for r in table.select(variant=variant)]
            lines.append(f"peaks[{variant.value}]: " + " ".join(f"{a:.2f}" for a in angles))
    return "\n".join(lines)


def run(inv: CliInvocation, stdout=None, stderr=None) -> int:
    """Execute one invocation and return the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if inv.subcommand not in SUBCOMMANDS:
        print(f"error: unknown subcommand {inv.subcommand!r}", file=stderr)
        return EXIT_CONFIG
    out_path = inv.output_path or f"{inv.subcommand}.csv"
    try:
        config = load_config(inv)
    except OSError as exc:
        print(f"error: cannot read config {inv.config_path}: {exc.strerror or exc}", file=stderr)
        return EXIT_IO
    except (ConfigError, UsageError) as exc:
        print(f"error: invalid config {inv.config_path or '<defaults>'}: {exc}", file=stderr)
        return EXIT_CONFIG

    start = time.perf_counter()
    try:
        table = SUBCOMMANDS[inv.subcommand](config)
    except (DomainError, NumericError, ArithmeticError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start

    try:
        emit_csv(table, out_path)
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc.strerror or exc}", file=stderr)
        return EXIT_IO
    print(_summary(inv, config, out_path, elapsed, table), file=stdout)
    return EXIT_OK


def _nonneg_int(text):
    value = int(text)
    if value < 0 or value >= 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-music",
        description="One-bit MUSIC DOA estimation experiments.")
    parser.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    parser.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    parser.add_argument("--out", metavar="PATH", help="CSV output path (default: <subcommand>.csv)")
    parser.add_argument("--seed", type=_nonneg_int, metavar="U64", help="override the master seed")
    parser.add_argument("--grid-step", type=_positive_float, metavar="DEG",
                        help="override the MUSIC search grid step")
    parser.add_argument("--workers", type=int, metavar="N", help="worker processes for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    inv = CliInvocation(args.subcommand, args.config, args.out, args.seed, args.grid_step,
                        args.workers)
    return run(inv)


if __name__ == "__main__":
    sys.exit(main())
