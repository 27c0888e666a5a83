"""
Covariance estimation and the one-bit covariance transforms.

For zero-mean jointly Gaussian inputs the one-bit covariance is an
elementwise arcsine of the normalized unquantized covariance, applied
separately to real and imaginary parts::

    R_y = (2/pi) * arcsine(R_x / p)

where ``p`` is the per-sensor power. This module provides that map, its
inverse (the sine reconstruction) and the affine surrogate
``(2/(p*pi)) R_x + (1 - 2/pi) I`` which shares eigenvectors with ``R_x``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .array_model import SnapshotKind, SnapshotMatrix
from .errors import DomainError, UsageError

#: How far outside the unit box an entry may stray (round-off) before it is rejected.
CLAMP_TOLERANCE = 1e-9


class CovarianceTag(str, enum.Enum):
    SAMPLE_ONE_BIT = "sample-one-bit"
    SAMPLE_UNQUANTIZED = "sample-unquantized"
    ARCSINE_RECONSTRUCTED = "arcsine-reconstructed"
    ANALYTIC = "analytic"
    APPROXIMATION = "approximation"


def hermitian_defect(R: np.ndarray) -> float:
    """``||R - R^H||_F`` relative to ``max(1, ||R||_F)``."""
    return float(np.linalg.norm(R - R.conj().T) / max(1.0, np.linalg.norm(R)))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Square Hermitian matrix with a tag recording where it came from."""

    data: np.ndarray
    tag: CovarianceTag

    def __post_init__(self):
        R = np.asarray(self.data, dtype=np.complex128)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] < 1:
            raise UsageError(f"covariance must be a square matrix, got shape {R.shape}")
        if not np.all(np.isfinite(R)):
            raise DomainError("covariance entries must be finite")
        if hermitian_defect(R) > 1e-10:
            raise DomainError(f"{CovarianceTag(self.tag).value} covariance is not Hermitian")
        object.__setattr__(self, "data", R)
        object.__setattr__(self, "tag", CovarianceTag(self.tag))

    @property
    def size(self) -> int:
        return self.data.shape[0]


def sample_covariance(snapshots: SnapshotMatrix) -> CovarianceMatrix:
    """Sample covariance ``(1/N) Y Y^H``.

    For one-bit snapshots the Gram matrix is accumulated on the unscaled
    ``+-1 +- 1j`` symbols, where every partial sum is an exact integer, so
    the diagonal comes out as exactly 1.
    """
    N = snapshots.snapshot_count
    if snapshots.kind is SnapshotKind.ONE_BIT:
        Y = snapshots.data
        B = np.sign(Y.real) + 1j * np.sign(Y.imag)
        G = B @ B.conj().T
        # Divide the parts separately; complex / real division is not correctly rounded.
        R = np.empty_like(G)
        R.real = G.real / (2.0 * N)
        R.imag = G.imag / (2.0 * N)
        return CovarianceMatrix(R, CovarianceTag.SAMPLE_ONE_BIT)
    X = snapshots.data
    R = (X @ X.conj().T) / N
    R = 0.5 * (R + R.conj().T)
    return CovarianceMatrix(R, CovarianceTag.SAMPLE_UNQUANTIZED)


def _clamp_unit_box(part: np.ndarray, what: str) -> np.ndarray:
    excess = np.max(np.abs(part)) - 1.0 if part.size else 0.0
    if excess > CLAMP_TOLERANCE:
        raise DomainError(
            f"{what} parts leave the unit box by {excess:.3g} (> {CLAMP_TOLERANCE:g})"
        )
    return np.clip(part, -1.0, 1.0)


def _unit_box_parts(R: CovarianceMatrix):
    return (_clamp_unit_box(R.data.real, "real"),
            _clamp_unit_box(R.data.imag, "imaginary"))


def arcsine_map(R: CovarianceMatrix) -> CovarianceMatrix:
    """Elementwise ``(2/pi) (arcsin(Re r) + 1j*arcsin(Im r))``.

    Entries must lie in the unit box; excursions up to ``CLAMP_TOLERANCE``
    are clamped, larger ones raise :class:`DomainError`. The tag is kept.
    """
    re, im = _unit_box_parts(R)
    out = (2.0 / np.pi) * (np.arcsin(re) + 1j * np.arcsin(im))
    return CovarianceMatrix(out, R.tag)


def reconstruct_unquantized(R_y: CovarianceMatrix) -> CovarianceMatrix:
    """Undo the arcsine law: ``sin((pi/2) Re r) + 1j*sin((pi/2) Im r)``.

    The result is the unquantized covariance up to the unknown positive
    per-sensor power, which subspace methods never need.
    """
    re, im = _unit_box_parts(R_y)
    half_pi = np.pi / 2.0
    out = np.sin(half_pi * re) + 1j * np.sin(half_pi * im)
    return CovarianceMatrix(out, CovarianceTag.ARCSINE_RECONSTRUCTED)


def approx_onebit_covariance(R_x: CovarianceMatrix, p: float) -> CovarianceMatrix:
    """Affine surrogate ``(2/(p*pi)) R_x + (1 - 2/pi) I`` for the one-bit covariance.

    The eigenvalue map ``lam -> (2/(p*pi)) lam + (1 - 2/pi)`` is strictly
    increasing, so eigenvectors and their ordering carry over from ``R_x``.
    """
    if not (np.isfinite(p) and p > 0):
        raise DomainError(f"power p must be positive, got {p!r}")
    out = (2.0 / (p * np.pi)) * R_x.data
    out[np.diag_indices_from(out)] += 1.0 - 2.0 / np.pi
    return CovarianceMatrix(out, CovarianceTag.APPROXIMATION)


def approximation_error(R_app: CovarianceMatrix, R_y: CovarianceMatrix) -> float:
    """Relative Frobenius error ``||R_app - R_y||_F / ||R_y||_F``."""
    if R_app.data.shape != R_y.data.shape:
        raise UsageError(
            f"shape mismatch: {R_app.data.shape} vs {R_y.data.shape}"
        )
    denom = np.linalg.norm(R_y.data)
    if denom == 0:
        raise DomainError("reference covariance has zero norm")
    return float(np.linalg.norm(R_app.data - R_y.data) / denom)
