"""
Monte-Carlo experiments comparing one-bit MUSIC with its baselines.

Three estimators are run on the same snapshot realization in every trial:

``one-bit-music``
    MUSIC directly on the sample one-bit covariance.
``recon-one-bit-music``
    MUSIC on the sine reconstruction of the sample one-bit covariance.
``unquantized-music``
    MUSIC on the sample covariance of the unquantized snapshots.

Trial ``r`` of a sweep is seeded from ``(master seed, r)`` only, so the same
underlying Gaussian draws are reused across sweep points (SNR, snapshot count,
separation). This keeps trend comparisons between neighbouring points from
being swamped by independent sampling noise, and makes results independent of
how trials are scheduled across worker processes.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .array_model import (ArrayGeometry, SourceScenario, correlation_vs_snr,
                          analytic_covariance, generate_snapshots)
from .covariance import (CovarianceMatrix, CovarianceTag, approx_onebit_covariance,
                         approximation_error, arcsine_map, reconstruct_unquantized,
                         sample_covariance)
from .errors import ConfigError, DomainError, UsageError
from .music import estimate_doas, make_grid
from .quantization import quantize_snapshots


class EstimatorVariant(str, enum.Enum):
    ONE_BIT = "one-bit-music"
    RECON = "recon-one-bit-music"
    UNQUANTIZED = "unquantized-music"


ALL_VARIANTS = tuple(EstimatorVariant)
METRICS = ("rmse_deg", "err", "resolution_prob", "rho_re", "rho_im", "doa_deg")


def _as_tuple(value, path, cast=float):
    if isinstance(value, (str, bytes)) or not isinstance(value, Iterable):
        raise ConfigError(path, f"expected a list, got {value!r}")
    try:
        return tuple(cast(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a sweep.

    Defaults describe a 10-element half-wavelength ULA with two equal-power
    sources at -10 and 3.5 degrees and unit noise power. ``snr_db`` and
    ``n_snapshots`` fix the operating point of single-point runs (``estimate``)
    and of the separation sweep; ``workers`` only changes scheduling.
    """

    geometry: ArrayGeometry = field(default_factory=lambda: ArrayGeometry.ula(10, 0.5))
    doas_deg: tuple = (-10.0, 3.5)
    snr_grid_db: tuple = (-10.0, 0.0, 10.0)
    snapshot_grid: tuple = (100, 500, 1000)
    trial_count: int = 200
    seed: int = 42
    grid_step_deg: float = 0.05
    separation_grid_deg: tuple = tuple(float(d) for d in range(1, 11))
    variants: tuple = ALL_VARIANTS
    snr_db: float = 0.0
    n_snapshots: int = 1000
    sensor_pair: tuple = (1, 2)
    workers: int = 1

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        if not isinstance(self.geometry, ArrayGeometry):
            raise ConfigError("geometry", "expected an ArrayGeometry")
        M = self.geometry.element_count

        doas = _as_tuple(self.doas_deg, "doas_deg")
        try:
            SourceScenario(doas, (1.0,) * len(doas)).check_against(self.geometry)
        except DomainError as exc:
            raise ConfigError("doas_deg", str(exc)) from None
        set_("doas_deg", doas)

        for name in ("snr_grid_db", "snapshot_grid", "separation_grid_deg"):
            cast = _positive_int if name == "snapshot_grid" else float
            values = _as_tuple(getattr(self, name), name, cast)
            if not values:
                raise ConfigError(name, "grid must be non-empty")
            if not all(math.isfinite(v) for v in values):
                raise ConfigError(name, "grid values must be finite")
            set_(name, values)
        if any(d <= 0 for d in self.separation_grid_deg):
            raise ConfigError("separation_grid_deg", "separations must be positive")
        if self.doas_deg[0] + max(self.separation_grid_deg) >= 90.0:
            raise ConfigError("separation_grid_deg",
                              "first DOA plus separation must stay below 90 degrees")

        for name, lo in (("trial_count", 1), ("seed", 0), ("n_snapshots", 1), ("workers", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < lo:
                raise ConfigError(name, f"expected an integer >= {lo}, got {value!r}")
            set_(name, int(value))
        if self.seed >= 2 ** 64:
            raise ConfigError("seed", "seed must fit in 64 bits")

        step = self.grid_step_deg
        if isinstance(step, bool) or not isinstance(step, (int, float)) or not (0 < step <= 90):
            raise ConfigError("grid_step_deg", f"expected a value in (0, 90], got {step!r}")
        set_("grid_step_deg", float(step))
        if not (isinstance(self.snr_db, (int, float)) and math.isfinite(self.snr_db)):
            raise ConfigError("snr_db", f"expected a finite number, got {self.snr_db!r}")
        set_("snr_db", float(self.snr_db))

        try:
            variants = tuple(EstimatorVariant(v) for v in _as_tuple(self.variants, "variants", lambda v: v))
        except ValueError as exc:
            raise ConfigError("variants", str(exc)) from None
        set_("variants", variants)

        pair = _as_tuple(self.sensor_pair, "sensor_pair", _positive_int)
        if len(pair) != 2 or not all(1 <= i <= M for i in pair):
            raise ConfigError("sensor_pair", f"expected two sensor numbers in 1..{M}")
        set_("sensor_pair", pair)

    @property
    def grid(self) -> np.ndarray:
        return make_grid(self.grid_step_deg)

    def replace(self, **changes) -> "ExperimentConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return ExperimentConfig(**values)


def _positive_int(value):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"expected a positive integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class MetricRow:
    sweep_var: str
    sweep_value: float
    variant: str
    metric: str
    value: float
    trials: int
    stderr: float

    def sort_key(self):
        return (self.sweep_value, self.variant, self.metric, self.sweep_var)


class MetricTable:
    """Ordered collection of :class:`MetricRow` results."""

    def __init__(self, rows: Iterable[MetricRow] = ()):
        self.rows = list(rows)
        for row in self.rows:
            _check_row(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other):
        return isinstance(other, MetricTable) and self.rows == other.rows

    def sorted(self) -> "MetricTable":
        return MetricTable(sorted(self.rows, key=MetricRow.sort_key))

    def select(self, **criteria) -> list[MetricRow]:
        return [r for r in self.rows
                if all(getattr(r, k) == (v.value if isinstance(v, enum.Enum) else v)
                       for k, v in criteria.items())]

    def lookup(self, **criteria) -> MetricRow:
        found = self.select(**criteria)
        if len(found) != 1:
            raise KeyError(f"{len(found)} rows match {criteria}")
        return found[0]


def _check_row(row: MetricRow):
    if row.metric not in METRICS:
        raise UsageError(f"unknown metric {row.metric!r}")
    if row.metric in ("rmse_deg", "err") and not row.value >= 0:
        raise DomainError(f"{row.metric} must be non-negative, got {row.value}")
    if row.metric == "resolution_prob" and not 0 <= row.value <= 1:
        raise DomainError(f"resolution_prob must lie in [0, 1], got {row.value}")


# ---------------------------------------------------------------------------
# metrics

def _squared_errors(estimates_per_trial, truth) -> np.ndarray:
    truth = np.sort(np.asarray(truth, dtype=float))
    est = [np.sort(np.asarray(e, dtype=float)) for e in estimates_per_trial]
    if any(e.shape != truth.shape for e in est):
        raise UsageError(f"every estimate list must have {truth.size} angles")
    if not est:
        raise UsageError("need at least one trial")
    return (np.array(est) - truth) ** 2


def rmse(estimates_per_trial: Sequence[Sequence[float]], truth: Sequence[float]) -> float:
    """Root mean square DOA error over all trials and sources, in degrees.

    Estimates and truth are paired by rank after sorting each ascending.
    """
    return float(np.sqrt(np.mean(_squared_errors(estimates_per_trial, truth))))


def rmse_stderr(estimates_per_trial, truth) -> tuple[float, float]:
    """RMSE together with its delta-method standard error.

    The per-trial mean squared error ``e_r`` has sample standard error
    ``s_e``; the RMSE ``sqrt(mean e_r)`` then has standard error
    ``s_e / (2 RMSE)``. ``nan`` when there is a single trial.
    """
    per_trial = _squared_errors(estimates_per_trial, truth).mean(axis=1)
    value = float(np.sqrt(per_trial.mean()))
    if per_trial.size < 2:
        return value, float("nan")
    if value == 0.0:
        return value, 0.0
    se_mse = per_trial.std(ddof=1) / np.sqrt(per_trial.size)
    return value, float(se_mse / (2.0 * value))


def is_resolved(estimates: Sequence[float], truth: Sequence[float], separation_deg: float) -> bool:
    """Both sorted estimates within (strictly) half the separation of their truth."""
    est, tru = sorted(estimates), sorted(truth)
    if len(est) != 2 or len(tru) != 2:
        raise UsageError("resolution needs exactly two estimates and two true DOAs")
    half = 0.5 * separation_deg
    return all(abs(e - t) < half for e, t in zip(est, tru))


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed of trial ``trial`` under ``master_seed``."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    return int(seq.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# trials

def _variant_covariance(variant, x, one_bit_cov) -> CovarianceMatrix:
    if variant is EstimatorVariant.ONE_BIT:
        return one_bit_cov()
    if variant is EstimatorVariant.RECON:
        return reconstruct_unquantized(one_bit_cov())
    return sample_covariance(x)


def paired_trial(geometry, scenario, n_snapshots, variants, grid, seed) -> dict:
    """Estimates of every variant on one shared snapshot realization."""
    x = generate_snapshots(geometry, scenario, n_snapshots, seed)
    cache = {}

    def one_bit_cov():
        if "R_y" not in cache:
            cache["R_y"] = sample_covariance(quantize_snapshots(x))
        return cache["R_y"]

    k = scenario.source_count
    return {v: estimate_doas(_variant_covariance(v, x, one_bit_cov), geometry, k, grid)
            for v in map(EstimatorVariant, variants)}


def run_trial(geometry, scenario, n_snapshots, variant, grid, trial_seed) -> list[float]:
    """DOA estimates of one variant for one seeded trial."""
    variant = EstimatorVariant(variant)
    return paired_trial(geometry, scenario, n_snapshots, (variant,), grid, trial_seed)[variant]


@dataclass(frozen=True)
class _Point:
    sweep_var: str
    sweep_value: float
    scenario: SourceScenario
    n_snapshots: int


def _run_chunk(task):
    geometry, point, variants, grid, seeds = task
    out = {v: [] for v in variants}
    for seed in seeds:
        for v, est in paired_trial(geometry, point.scenario, point.n_snapshots,
                                   variants, grid, seed).items():
            out[v].append(est)
    return out


def _run_points(config: ExperimentConfig, points: list[_Point]):
    """Per point, per variant: list of R estimate lists, in trial order."""
    variants = config.variants
    if not variants:
        return [{} for _ in points]
    seeds = [trial_seed(config.seed, r) for r in range(config.trial_count)]
    chunk = max(1, math.ceil(len(seeds) / (4 * config.workers)))
    grid = config.grid
    tasks, owners = [], []
    for i, point in enumerate(points):
        for start in range(0, len(seeds), chunk):
            tasks.append((config.geometry, point, variants, grid, seeds[start:start + chunk]))
            owners.append(i)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]

    results = [{v: [] for v in variants} for _ in points]
    for owner, part in zip(owners, parts):
        for v, est in part.items():
            results[owner][v].extend(est)
    return results


def _rmse_table(config, points) -> MetricTable:
    rows = []
    truth_of = lambda p: p.scenario.doas_deg  # noqa: E731
    for point, per_variant in zip(points, _run_points(config, points)):
        for v, est in per_variant.items():
            value, se = rmse_stderr(est, truth_of(point))
            rows.append(MetricRow(point.sweep_var, point.sweep_value, v.value,
                                  "rmse_deg", value, len(est), se))
    return MetricTable(rows).sorted()


def sweep_snr(config: ExperimentConfig) -> MetricTable:
    """RMSE against SNR, one curve per snapshot count in ``snapshot_grid``."""
    points = [_Point(f"snr_db;n_snapshots={n}", snr,
                     SourceScenario.equal_power(config.doas_deg, snr), n)
              for n in config.snapshot_grid for snr in config.snr_grid_db]
    return _rmse_table(config, points)


def sweep_snapshots(config: ExperimentConfig) -> MetricTable:
    """RMSE against snapshot count, one curve per SNR in ``snr_grid_db``."""
    points = [_Point(f"n_snapshots;snr_db={snr:g}", float(n),
                     SourceScenario.equal_power(config.doas_deg, snr), n)
              for snr in config.snr_grid_db for n in config.snapshot_grid]
    return _rmse_table(config, points)


def sweep_separation(config: ExperimentConfig) -> MetricTable:
    """Resolution probability against angular separation.

    Sources sit at ``doas_deg[0]`` and ``doas_deg[0] + delta``; one curve per
    SNR in ``snr_grid_db`` at ``n_snapshots`` snapshots.
    """
    anchor = config.doas_deg[0]
    points = [_Point(f"separation_deg;snr_db={snr:g}", delta,
                     SourceScenario.equal_power((anchor, anchor + delta), snr),
                     config.n_snapshots)
              for snr in config.snr_grid_db for delta in config.separation_grid_deg]
    rows = []
    for point, per_variant in zip(points, _run_points(config, points)):
        for v, est in per_variant.items():
            hits = [is_resolved(e, point.scenario.doas_deg, point.sweep_value) for e in est]
            prob = float(np.mean(hits))
            se = math.sqrt(prob * (1.0 - prob) / len(hits))
            rows.append(MetricRow(point.sweep_var, point.sweep_value, v.value,
                                  "resolution_prob", prob, len(hits), se))
    return MetricTable(rows).sorted()


def analytic_onebit_covariance(geometry, scenario) -> tuple[CovarianceMatrix, CovarianceMatrix]:
    """Exact one-bit covariance and its affine surrogate for ``scenario``."""
    R_x = analytic_covariance(geometry, scenario)
    p = scenario.total_power
    R_y = arcsine_map(CovarianceMatrix(R_x.data / p, CovarianceTag.ANALYTIC))
    return R_y, approx_onebit_covariance(R_x, p)


def approx_error_sweep(geometry: ArrayGeometry, doas_deg: Sequence[float],
                       snr_grid_db: Sequence[float]) -> MetricTable:
    """Relative error of the affine surrogate against the exact one-bit covariance.

    Fully analytic: both matrices come from the closed-form covariance with
    unit noise power, no sampling involved.
    """
    rows = []
    for snr in snr_grid_db:
        R_y, R_app = analytic_onebit_covariance(
            geometry, SourceScenario.equal_power(doas_deg, snr))
        rows.append(MetricRow("snr_db", float(snr), "analytic", "err",
                              approximation_error(R_app, R_y), 1, 0.0))
    return MetricTable(rows).sorted()


def correlation_table(config: ExperimentConfig) -> MetricTable:
    """Real and imaginary inter-sensor correlation against SNR."""
    m, n = config.sensor_pair
    table = correlation_vs_snr(config.geometry, config.doas_deg, m, n, config.snr_grid_db)
    rows = []
    for snr, re, im in table:
        for metric, value in (("rho_re", re), ("rho_im", im)):
            rows.append(MetricRow(f"snr_db;pair={m}-{n}", float(snr), "analytic",
                                  metric, float(value), 1, 0.0))
    return MetricTable(rows).sorted()


def estimate_once(config: ExperimentConfig) -> MetricTable:
    """Single seeded trial at ``(snr_db, n_snapshots)``; one row per estimated DOA."""
    scenario = SourceScenario.equal_power(config.doas_deg, config.snr_db)
    estimates = paired_trial(config.geometry, scenario, config.n_snapshots,
                             config.variants, config.grid, config.seed)
    label = f"source_index;snr_db={config.snr_db:g};n_snapshots={config.n_snapshots}"
    rows = [MetricRow(label, float(i), v.value, "doa_deg", angle, 1, float("nan"))
            for v, angles in estimates.items() for i, angle in enumerate(angles, 1)]
    return MetricTable(rows).sorted()
