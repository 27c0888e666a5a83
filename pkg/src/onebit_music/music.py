"""
MUSIC on an arbitrary covariance matrix.

The same pipeline serves every covariance source (sample one-bit,
reconstructed, unquantized, analytic): eigendecompose, keep the eigenvectors
of the ``M - K`` smallest eigenvalues, scan the pseudo-spectrum

    G(theta) = 1 / (a(theta)^H U_n U_n^H a(theta))

over a grid and report its ``K`` highest peaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import ArrayGeometry, _check_angles, array_manifold
from .covariance import CovarianceMatrix, hermitian_defect
from .errors import DomainError, NumericError

DEFAULT_GRID_STEP = 0.05
#: Floor on the spectrum denominator; exact covariances are exactly orthogonal at the truth.
DENOMINATOR_FLOOR = 1e-16


def make_grid(step_deg: float = DEFAULT_GRID_STEP, lo: float = -90.0,
              hi: float = 90.0) -> np.ndarray:
    """Inclusive angle grid ``lo, lo + step, ..., hi``."""
    if not (np.isfinite(step_deg) and step_deg > 0):
        raise DomainError(f"grid step must be positive, got {step_deg!r}")
    count = int(np.floor((hi - lo) / step_deg + 1e-9)) + 1
    # Rounded so grid points such as -10.0 and 3.5 are represented exactly.
    return np.round(lo + step_deg * np.arange(count), 10)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs sorted by ascending eigenvalue; column ``i`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class NoiseSubspace:
    basis: np.ndarray
    source_count: int

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True)
class SpectrumGrid:
    angles_deg: np.ndarray
    values: np.ndarray


def principal_angle(U: np.ndarray, V: np.ndarray) -> float:
    """Largest principal angle (radians) between the column spans of ``U`` and ``V``.

    Both must have orthonormal columns and the same shape. Computed from the
    sine, ``||(I - V V^H) U||_2``, which stays accurate for tiny angles.
    """
    if U.shape != V.shape:
        raise DomainError(f"subspace shapes differ: {U.shape} vs {V.shape}")
    residual = U - V @ (V.conj().T @ U)
    return float(np.arcsin(min(1.0, np.linalg.norm(residual, 2))))


def eigendecompose(R) -> EigenSystem:
    """Hermitian eigendecomposition with eigenvalues in ascending order.

    Parameters
    ----------
    R : CovarianceMatrix or array_like
        Hermitian matrix.

    Raises
    ------
    DomainError
        If ``R`` is not Hermitian to within ``1e-10 * max(1, ||R||_F)``.
    NumericError
        If the LAPACK solver does not converge.
    """
    if isinstance(R, CovarianceMatrix):
        data, tag = R.data, R.tag.value
    else:
        data, tag = np.asarray(R, dtype=np.complex128), "untagged"
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {data.shape}")
        if hermitian_defect(data) > 1e-10:
            raise DomainError(f"{tag} matrix is not Hermitian")
    try:
        w, V = np.linalg.eigh(data)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition of {tag} covariance failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
        raise NumericError(f"eigendecomposition of {tag} covariance is not finite")
    return EigenSystem(w, V)


def noise_subspace(eig: EigenSystem, k_sources: int) -> NoiseSubspace:
    """Eigenvectors belonging to the ``M - k_sources`` smallest eigenvalues."""
    M = eig.eigenvectors.shape[0]
    if int(k_sources) != k_sources or not 1 <= k_sources < M:
        raise DomainError(f"k_sources must be in 1..{M - 1}, got {k_sources!r}")
    return NoiseSubspace(eig.eigenvectors[:, : M - int(k_sources)], int(k_sources))


def music_spectrum(u_n: NoiseSubspace, geometry: ArrayGeometry, grid) -> SpectrumGrid:
    """Evaluate the MUSIC pseudo-spectrum on ``grid`` (degrees)."""
    angles = _check_angles(grid)
    if angles.ndim != 1 or angles.size == 0:
        raise DomainError("grid must be a non-empty 1-D list of angles")
    A = array_manifold(geometry, angles)
    proj = u_n.basis.conj().T @ A
    denom = np.einsum("ij,ij->j", proj.real, proj.real) + np.einsum("ij,ij->j", proj.imag, proj.imag)
    return SpectrumGrid(angles, 1.0 / np.maximum(denom, DENOMINATOR_FLOOR))


def pick_peaks(spectrum: SpectrumGrid, k_sources: int) -> list[float]:
    """Angles of the ``k_sources`` highest peaks, ascending.

    Peaks are interior points strictly above both neighbours. If there are
    fewer than ``k_sources`` of them, the remaining slots go to the largest
    other grid values. Ties prefer the smaller angle.
    """
    theta, g = np.asarray(spectrum.angles_deg), np.asarray(spectrum.values)
    if g.size < 3:
        raise DomainError("peak picking needs at least three grid points")
    if int(k_sources) != k_sources or not 1 <= k_sources <= g.size:
        raise DomainError(f"k_sources must be in 1..{g.size}, got {k_sources!r}")
    k = int(k_sources)

    interior = np.flatnonzero((g[1:-1] > g[:-2]) & (g[1:-1] > g[2:])) + 1
    # lexsort: last key is primary -> descending value, then ascending angle.
    ranked = interior[np.lexsort((theta[interior], -g[interior]))]
    chosen = list(ranked[:k])
    if len(chosen) < k:
        rest = np.setdiff1d(np.arange(g.size), chosen)
        rest = rest[np.lexsort((theta[rest], -g[rest]))]
        chosen.extend(rest[: k - len(chosen)])
    return sorted(float(theta[i]) for i in chosen)


def estimate_doas(R, geometry: ArrayGeometry, k_sources: int, grid=None) -> list[float]:
    """Run MUSIC on covariance ``R`` and return ``k_sources`` DOAs in degrees."""
    if grid is None:
        grid = make_grid()
    eig = eigendecompose(R)
    if eig.eigenvectors.shape[0] != geometry.element_count:
        raise DomainError(
            f"covariance is {eig.eigenvectors.shape[0]}x{eig.eigenvectors.shape[0]} "
            f"but the array has {geometry.element_count} sensors"
        )
    u_n = noise_subspace(eig, k_sources)
    return pick_peaks(music_spectrum(u_n, geometry, grid), k_sources)
