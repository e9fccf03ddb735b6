"""Small dense complex linear algebra.

Matrices and vectors are plain ``numpy`` complex arrays. The helpers here add
the shape and Hermiticity checks the rest of the package relies on.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NotHermitianError, NotPositiveError

HERM_TOL = 1e-10
NEG_EIG_TOL = 1e-9


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product, left factor is the slow index."""
    return np.kron(as_matrix(a), as_matrix(b))


def is_hermitian(a, tol: float = HERM_TOL) -> bool:
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def herm_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix."""
    a = as_matrix(a)
    if not is_hermitian(a):
        raise NotHermitianError("herm_eig needs a Hermitian matrix")
    # symmetrize so the round-off asymmetry does not leak into eigh
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return w, v


def psd_power(a, p: float) -> np.ndarray:
    """V diag(w**p) V^dagger for PSD ``a``.

    Negative powers act on the support only: zero eigenvalues stay zero.
    """
    a = as_matrix(a)
    if not is_hermitian(a):
        raise NotHermitianError("psd_power needs a Hermitian matrix")
    return psd_power_stack(a[None], p)[0]


def psd_power_stack(a: np.ndarray, p: float) -> np.ndarray:
    """psd_power over a stack (..., n, n) of Hermitian PSD matrices."""
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eigh((a + np.swapaxes(a, -1, -2).conj()) / 2)
    if w.size and np.min(w) < -NEG_EIG_TOL:
        raise NotPositiveError(f"matrix has negative eigenvalue {np.min(w):.3e}")
    w = np.clip(w, 0.0, None)
    scale = np.maximum(np.max(w, axis=-1, keepdims=True, initial=0.0), 1.0)
    support = w > NEG_EIG_TOL * scale
    wp = np.zeros_like(w)
    wp[support] = w[support] ** p
    return (v * wp[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def support_projector(a) -> np.ndarray:
    """Projector onto the range of a PSD matrix."""
    return psd_power(a, 0)


def normalized(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise DimensionError("cannot normalize the zero vector")
    return v / n


def fro(a) -> float:
    return float(np.linalg.norm(np.asarray(a), "fro"))
