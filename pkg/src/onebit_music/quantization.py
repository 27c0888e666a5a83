"""Complex one-bit quantizer: keep the signs of the real and imaginary parts."""

import numpy as np

from .array_model import INV_SQRT2, SnapshotKind, SnapshotMatrix
from .errors import DomainError, UsageError


def _sign(x):
    # sign(0) is taken as +1 so the map stays deterministic and idempotent.
    return np.where(x >= 0, 1.0, -1.0)


def quantize(z) -> np.ndarray:
    """Elementwise ``(sign(Re z) + 1j*sign(Im z)) / sqrt(2)`` on an array."""
    z = np.asarray(z)
    if not np.all(np.isfinite(z)):
        raise DomainError("cannot quantize non-finite values")
    return (_sign(z.real) + 1j * _sign(z.imag)) * INV_SQRT2


def quantize_scalar(z: complex) -> complex:
    """One-bit symbol for a single finite complex number.

    >>> quantize_scalar(3 - 4j) == (1 - 1j) / 2 ** 0.5
    True
    """
    return complex(quantize(complex(z)))


def quantize_snapshots(x: SnapshotMatrix) -> SnapshotMatrix:
    """Quantize every entry of an unquantized snapshot block.

    A block that is already one-bit is returned unchanged, so the operation
    is idempotent.
    """
    if not isinstance(x, SnapshotMatrix):
        raise UsageError(f"expected a SnapshotMatrix, got {type(x).__name__}")
    if x.kind is SnapshotKind.ONE_BIT:
        return x
    return SnapshotMatrix(quantize(x.data), SnapshotKind.ONE_BIT)
