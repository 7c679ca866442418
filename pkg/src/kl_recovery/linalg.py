"""
Dense complex matrix helpers.

Everything works on 2-d ``numpy`` arrays of dtype ``complex128``. Tensor
products use lexicographic ordering with the first factor as the slow
index, so ``kron(a, b)[(i, k), (j, l)] == a[i, j] * b[k, l]`` and
``partial_trace_first`` traces out that first (slow) factor.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, IsometryError, NotHermitianError

#: default relative Frobenius tolerance for factorization checks
FACTOR_TOL = 1e-10

#: candidate basis vectors with a smaller residual are skipped during completion
COMPLETION_SKIP = 1e-8

__all__ = [
    "FACTOR_TOL",
    "as_matrix",
    "matmul",
    "dagger",
    "kron",
    "direct_sum",
    "partial_trace_first",
    "hermitian_eig",
    "complete_to_unitary",
    "frob",
]


def as_matrix(a, name="matrix"):
    """Coerce ``a`` into a finite 2-d complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def frob(a) -> float:
    return float(np.linalg.norm(a))


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def dagger(a):
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def kron(a, b):
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def direct_sum(a, zero_dim: int):
    """Return the block-diagonal matrix ``[[a, 0], [0, 0_{zero_dim}]]``."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"direct_sum needs a square block, got {a.shape}")
    if zero_dim < 0:
        raise DimensionError("zero_dim must be non-negative")
    d = a.shape[0]
    out = np.zeros((d + zero_dim, d + zero_dim), dtype=np.complex128)
    out[:d, :d] = a
    return out


def partial_trace_first(m, dim_first: int, dim_second: int):
    """
    Trace out the first tensor factor.

    Parameters
    ----------
    m : array_like
        Square matrix of size ``dim_first * dim_second``.
    dim_first, dim_second : int
        Dimensions of the traced (slow-index) and kept factors.

    Returns
    -------
    numpy.ndarray
        ``dim_second x dim_second`` matrix with entries
        ``sum_a m[(a, i), (a, j)]``.
    """
    m = as_matrix(m)
    d = dim_first * dim_second
    if m.shape != (d, d):
        raise DimensionError(
            f"expected a {d}x{d} matrix for dims ({dim_first}, {dim_second}), got {m.shape}"
        )
    return np.einsum("aiaj->ij", m.reshape(dim_first, dim_second, dim_first, dim_second))


def _fix_phases(vecs):
    # Make the largest-magnitude entry of each column real positive. Ties are
    # broken by the lowest row index among entries within 1e-12 of the max.
    mags = np.abs(vecs)
    peak = mags.max(axis=0)
    idx = np.argmax(mags >= peak * (1 - 1e-12), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    phases = pivots / np.abs(pivots)
    return vecs / phases


def hermitian_eig(h, tol: float = FACTOR_TOL):
    """
    Eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order. Each eigenvector has its
    largest-magnitude entry made real and positive, so repeated calls give
    identical output.

    Parameters
    ----------
    h : array_like
        Square matrix, Hermitian up to ``||h - h^dag||_F <= tol * ||h||_F``.
    tol : float
        Relative Hermiticity tolerance.

    Returns
    -------
    eigenvalues : numpy.ndarray
        Real, descending.
    eigenvectors : numpy.ndarray
        Unitary matrix whose columns are the eigenvectors, so
        ``h = V @ diag(eigenvalues) @ V^dag``.

    Raises
    ------
    NotHermitianError
        If the anti-Hermitian part exceeds the tolerance.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"hermitian_eig needs a square matrix, got {h.shape}")
    scale = frob(h)
    skew = frob(h - h.conj().T)
    if skew > tol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: ||h - h^dag||_F = {skew:.3e} (scale {scale:.3e})", skew
        )
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    # stable, so exactly tied eigenvalues keep LAPACK's order
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = _fix_phases(vecs[:, order])
    return vals, vecs


def complete_to_unitary(r1, tol: float = FACTOR_TOL):
    """
    Extend a matrix with orthonormal columns to a square unitary.

    The input columns are kept verbatim as the leading columns. The rest are
    built by Gram-Schmidt against the standard basis, at each step choosing
    the basis vector with the largest remaining component outside the
    current span; orthogonalization is done twice per vector.

    Parameters
    ----------
    r1 : array_like
        ``n x m`` matrix with ``m <= n`` and ``||r1^dag r1 - I||_F <= tol * sqrt(m)``.
    tol : float
        Orthonormality tolerance.

    Returns
    -------
    numpy.ndarray
        ``n x n`` unitary ``[r1, r2]``.
    """
    r1 = as_matrix(r1)
    n, m = r1.shape
    if m > n:
        raise DimensionError(f"cannot complete {r1.shape}: more columns than rows")
    residual = frob(r1.conj().T @ r1 - np.eye(m))
    if residual > tol * max(1.0, np.sqrt(m)):
        raise IsometryError(f"columns are not orthonormal: ||r1^dag r1 - I||_F = {residual:.3e}", residual)

    out = np.zeros((n, n), dtype=np.complex128)
    out[:, :m] = r1
    # leverage[i] = squared norm of e_i projected onto the current span
    leverage = np.sum(np.abs(r1) ** 2, axis=1)
    used = np.zeros(n, dtype=bool)
    col = m
    while col < n:
        if used.all():
            raise IsometryError("standard basis exhausted before completion; input is rank deficient", residual)
        remaining = np.where(used, -np.inf, 1.0 - leverage)
        i = int(np.argmax(remaining))
        used[i] = True
        if remaining[i] < COMPLETION_SKIP**2:
            continue
        q = out[:, :col]
        v = np.zeros(n, dtype=np.complex128)
        v[i] = 1.0
        for _ in range(2):
            v -= q @ (q.conj().T @ v)
        norm = np.linalg.norm(v)
        if norm < COMPLETION_SKIP:
            continue
        v /= norm
        out[:, col] = v
        leverage += np.abs(v) ** 2
        col += 1
    return out
