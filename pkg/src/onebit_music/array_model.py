"""
Array model
===========

Array geometry, steering vectors, the narrowband snapshot model
``x(t) = A s(t) + n(t)`` and the closed-form second-order statistics that go
with it.

Angles are in degrees at every public boundary. Sensor positions are given in
carrier wavelengths, so the phase of sensor ``m`` for a plane wave from
``theta`` is ``2*pi*positions[m]*sin(theta)``, measured against the sensor at
position 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, UsageError

INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class ArrayGeometry:
    """Linear array of identical isotropic sensors.

    Parameters
    ----------
    positions : sequence of float
        Sensor coordinates along the array axis, in wavelengths. Must be
        finite and strictly increasing, with at least two sensors.
    """

    positions: tuple[float, ...]

    def __post_init__(self):
        pos = tuple(float(p) for p in self.positions)
        if len(pos) < 2:
            raise DomainError("an array needs at least two sensors")
        if not all(np.isfinite(pos)):
            raise DomainError("sensor positions must be finite")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise DomainError("sensor positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def ula(cls, element_count: int, spacing: float = 0.5) -> "ArrayGeometry":
        """Uniform linear array with ``element_count`` sensors ``spacing`` wavelengths apart."""
        if int(element_count) != element_count or element_count < 2:
            raise DomainError(f"element_count must be an integer >= 2, got {element_count!r}")
        if not spacing > 0:
            raise DomainError(f"spacing must be positive, got {spacing!r}")
        return cls(tuple(spacing * np.arange(int(element_count))))

    @property
    def element_count(self) -> int:
        return len(self.positions)

    M = element_count


@dataclass(frozen=True)
class SourceScenario:
    """Uncorrelated narrowband sources plus spatially white noise.

    Parameters
    ----------
    doas_deg : sequence of float
        Directions of arrival in degrees, each in the open interval (-90, 90).
    source_powers : sequence of float
        Linear power of each source.
    noise_power : float
        Per-sensor noise power.
    """

    doas_deg: tuple[float, ...]
    source_powers: tuple[float, ...]
    noise_power: float = 1.0

    def __post_init__(self):
        doas = tuple(float(d) for d in self.doas_deg)
        powers = tuple(float(p) for p in self.source_powers)
        if len(doas) < 1:
            raise DomainError("a scenario needs at least one source")
        if len(powers) != len(doas):
            raise DomainError(
                f"got {len(doas)} DOAs but {len(powers)} source powers"
            )
        if not all(np.isfinite(doas)) or any(abs(d) >= 90.0 for d in doas):
            raise DomainError(f"DOAs must lie in (-90, 90) degrees, got {doas}")
        if len(set(doas)) != len(doas):
            raise DomainError(f"DOAs must be pairwise distinct, got {doas}")
        if not all(np.isfinite(powers)) or any(p <= 0 for p in powers):
            raise DomainError(f"source powers must be finite and positive, got {powers}")
        noise = float(self.noise_power)
        if not (np.isfinite(noise) and noise > 0):
            raise DomainError(f"noise power must be finite and positive, got {noise}")
        object.__setattr__(self, "doas_deg", doas)
        object.__setattr__(self, "source_powers", powers)
        object.__setattr__(self, "noise_power", noise)

    @classmethod
    def equal_power(cls, doas_deg: Sequence[float], snr_db: float,
                    noise_power: float = 1.0) -> "SourceScenario":
        """Sources of identical power at ``snr_db`` above the noise floor."""
        power = noise_power * 10.0 ** (snr_db / 10.0)
        return cls(tuple(doas_deg), (power,) * len(doas_deg), noise_power)

    @property
    def source_count(self) -> int:
        return len(self.doas_deg)

    @property
    def snrs(self) -> np.ndarray:
        """Per-source linear SNR, source power over noise power."""
        return np.asarray(self.source_powers) / self.noise_power

    @property
    def total_power(self) -> float:
        """Power seen by every isotropic sensor (diagonal of the covariance)."""
        return float(sum(self.source_powers) + self.noise_power)

    def check_against(self, geometry: ArrayGeometry) -> None:
        if self.source_count >= geometry.element_count:
            raise DomainError(
                f"{self.source_count} sources need more than "
                f"{geometry.element_count} sensors"
            )


class SnapshotKind(str, enum.Enum):
    UNQUANTIZED = "unquantized"
    ONE_BIT = "one-bit"


@dataclass(frozen=True)
class SnapshotMatrix:
    """``M x N`` block of array snapshots, one column per time sample."""

    data: np.ndarray
    kind: SnapshotKind = SnapshotKind.UNQUANTIZED

    def __post_init__(self):
        try:
            kind = SnapshotKind(self.kind)
        except ValueError:
            raise UsageError(f"unknown snapshot kind {self.kind!r}") from None
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[1] < 1:
            raise UsageError(f"snapshot data must be a non-empty 2-D array, got shape {data.shape}")
        data = data.astype(np.complex128, copy=False)
        if kind is SnapshotKind.ONE_BIT:
            ok = (np.abs(data.real) == INV_SQRT2) & (np.abs(data.imag) == INV_SQRT2)
            if not ok.all():
                raise DomainError("one-bit snapshots must take values in {(+-1 +- 1j)/sqrt(2)}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "kind", kind)

    @property
    def snapshot_count(self) -> int:
        return self.data.shape[1]

    @property
    def element_count(self) -> int:
        return self.data.shape[0]


def _check_angles(angles_deg) -> np.ndarray:
    theta = np.asarray(angles_deg, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > 90.0):
        raise DomainError("angles must lie in [-90, 90] degrees")
    return theta


def steering_vector(geometry: ArrayGeometry, theta_deg: float) -> np.ndarray:
    """Array response ``a(theta)`` to a unit plane wave from ``theta_deg``.

    Entry ``m`` is ``exp(1j * 2*pi * positions[m] * sin(theta))``.
    """
    theta = _check_angles(theta_deg)
    if theta.ndim != 0:
        raise UsageError("steering_vector takes a single angle; use steering_matrix")
    return steering_matrix(geometry, theta[None])[:, 0]


def steering_matrix(geometry: ArrayGeometry, doas_deg: Sequence[float]) -> np.ndarray:
    """Stack of steering vectors, one column per angle (``M x K``)."""
    theta = _check_angles(doas_deg)
    if theta.ndim != 1 or theta.size == 0:
        raise DomainError("steering_matrix needs a non-empty 1-D list of angles")
    pos = np.asarray(geometry.positions)
    return np.exp(2j * np.pi * np.outer(pos, np.sin(np.deg2rad(theta))))


@lru_cache(maxsize=32)
def _cached_manifold(geometry: ArrayGeometry, grid_bytes: bytes) -> np.ndarray:
    manifold = steering_matrix(geometry, np.frombuffer(grid_bytes, dtype=float))
    manifold.setflags(write=False)
    return manifold


def array_manifold(geometry: ArrayGeometry, grid_deg) -> np.ndarray:
    """Cached :func:`steering_matrix` over a search grid (read-only)."""
    grid = np.ascontiguousarray(grid_deg, dtype=float)
    return _cached_manifold(geometry, grid.tobytes())


def _circular_normal(rng: np.random.Generator, n: int, width: int) -> np.ndarray:
    # Drawn as (n, width, 2) so the first n rows do not depend on the total n.
    z = rng.standard_normal((n, width, 2))
    return (z[..., 0] + 1j * z[..., 1]) * INV_SQRT2


def generate_snapshots(geometry: ArrayGeometry, scenario: SourceScenario,
                       n_snapshots: int, seed) -> SnapshotMatrix:
    """Draw ``n_snapshots`` unquantized snapshots ``A s(t) + n(t)``.

    Sources and noise are independent circular complex Gaussians. Signal and
    noise use separate substreams spawned from ``seed``, and the draw order
    is such that a run with more snapshots extends (rather than replaces)
    the realization of a smaller run with the same seed.

    Parameters
    ----------
    geometry : ArrayGeometry
    scenario : SourceScenario
    n_snapshots : int
        Number of time samples ``N``, at least 1.
    seed : int or sequence of int
        Entropy for :class:`numpy.random.SeedSequence`.

    Returns
    -------
    SnapshotMatrix
        ``M x N`` unquantized snapshots.
    """
    if int(n_snapshots) != n_snapshots or n_snapshots < 1:
        raise DomainError(f"n_snapshots must be a positive integer, got {n_snapshots!r}")
    scenario.check_against(geometry)
    n = int(n_snapshots)
    signal_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
    s = _circular_normal(np.random.default_rng(signal_seq), n, scenario.source_count)
    noise = _circular_normal(np.random.default_rng(noise_seq), n, geometry.element_count)

    A = steering_matrix(geometry, scenario.doas_deg)
    amplitudes = np.sqrt(np.asarray(scenario.source_powers))
    x = A @ (amplitudes[:, None] * s.T) + np.sqrt(scenario.noise_power) * noise.T
    return SnapshotMatrix(x, SnapshotKind.UNQUANTIZED)


def analytic_covariance(geometry: ArrayGeometry, scenario: SourceScenario):
    """Exact covariance ``A diag(powers) A^H + noise_power * I``."""
    from .covariance import CovarianceMatrix, CovarianceTag

    scenario.check_against(geometry)
    A = steering_matrix(geometry, scenario.doas_deg)
    R = (A * np.asarray(scenario.source_powers)) @ A.conj().T
    R = 0.5 * (R + R.conj().T)
    R[np.diag_indices_from(R)] = scenario.total_power
    return CovarianceMatrix(R, CovarianceTag.ANALYTIC)


def unquantized_correlation(geometry: ArrayGeometry, scenario: SourceScenario,
                            m: int, n: int) -> complex:
    """Correlation coefficient between sensors ``m`` and ``n`` (1-based).

    Equals ``[R]_mn / sqrt([R]_mm [R]_nn)`` for the exact covariance ``R``.
    """
    M = geometry.element_count
    for name, idx in (("m", m), ("n", n)):
        if int(idx) != idx or not 1 <= idx <= M:
            raise DomainError(f"sensor index {name}={idx!r} outside 1..{M}")
    if m == n:
        return 1.0 + 0.0j
    pos = np.asarray(geometry.positions)
    theta = np.deg2rad(np.asarray(scenario.doas_deg))
    phase = 2 * np.pi * (pos[m - 1] - pos[n - 1]) * np.sin(theta)
    powers = np.asarray(scenario.source_powers)
    return complex(np.sum(powers * np.exp(1j * phase)) / scenario.total_power)


def correlation_vs_snr(geometry: ArrayGeometry, doas_deg: Sequence[float],
                       m: int, n: int, snr_grid_db: Sequence[float]) -> np.ndarray:
    """Tabulate the equal-power correlation coefficient against SNR.

    Returns
    -------
    numpy.ndarray
        Array of shape ``(len(snr_grid_db), 3)`` with columns
        ``(snr_db, Re rho, Im rho)``.
    """
    snrs = np.asarray(snr_grid_db, dtype=float)
    if snrs.ndim != 1 or snrs.size == 0:
        raise DomainError("snr_grid_db must be a non-empty 1-D list")
    rows = []
    for snr in snrs:
        rho = unquantized_correlation(
            geometry, SourceScenario.equal_power(doas_deg, snr), m, n)
        rows.append((snr, rho.real, rho.imag))
    return np.array(rows, dtype=float)
