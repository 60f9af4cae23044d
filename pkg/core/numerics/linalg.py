from __future__ import annotations
from dataclasses import dataclass
import logging

import numpy as np
import numpy.typing as npt

from utils.exceptions import InvalidInputError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

_PHASE_TOL = 1e-12


def as_complex_matrix(m, *, name: str = "matrix") -> ComplexMatrix:
    """Coerce to complex128 with at least two dimensions and finite entries."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim < 2:
        raise InvalidInputError(f"{name} must be at least two-dimensional", context={"shape": arr.shape})
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries", context={"shape": arr.shape})
    return arr


def hermitian(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def frobenius_norm_sq(m: np.ndarray) -> np.ndarray:
    """Squared Frobenius norm over the trailing two axes."""
    return np.sum(np.abs(m) ** 2, axis=(-2, -1))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD m = u @ diag(singular_values) @ v^H, batched over leading axes"""
    u: ComplexMatrix
    singular_values: npt.NDArray[np.float64]
    v: ComplexMatrix

    def reconstruct(self) -> ComplexMatrix:
        return (self.u * self.singular_values[..., None, :]) @ hermitian(self.v)


def svd(m) -> SvdResult:
    """
    Thin SVD with singular values in descending order.

    Each left singular vector is rotated so that its first nonzero entry is
    real and nonnegative; the right vector gets the same rotation, which
    leaves every rank-one term u_j v_j^H unchanged.
    """
    arr = as_complex_matrix(m)
    rows, cols = arr.shape[-2:]
    if rows < cols:
        raise InvalidInputError("svd expects at least as many rows as columns", context={"rows": rows, "cols": cols})

    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    v = hermitian(vh)

    mags = np.abs(u)
    scale = np.max(mags, axis=-2, keepdims=True)
    first = np.argmax(mags > _PHASE_TOL * np.maximum(scale, 1.0), axis=-2)
    lead = np.take_along_axis(u, first[..., None, :], axis=-2)
    lead_mag = np.abs(lead)
    phase = np.where(lead_mag > 0, lead / np.where(lead_mag > 0, lead_mag, 1.0), 1.0)
    rot = np.conj(phase)
    u = u * rot
    v = v * rot

    return SvdResult(u=u, singular_values=s, v=v)


__all__ = [
    "ComplexMatrix",
    "SvdResult",
    "as_complex_matrix",
    "frobenius_norm_sq",
    "hermitian",
    "svd",
]
