"""Quantum channels in operator-sum form, code isometries and density matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidStateError, IsometryError
from .linalg import as_matrix, frob

ISOMETRY_TOL = 1e-10
STATE_TOL = 1e-8
TP_TOL = 1e-10

__all__ = [
    "QuantumChannel",
    "CodeIsometry",
    "DensityMatrix",
    "apply_channel",
    "encode",
    "is_trace_preserving",
    "projector",
]


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuantumChannel:
    """
    Completely positive map ``rho -> sum_j F_j rho F_j^dag``.

    Trace preservation is not required. The order of ``kraus`` is kept, since
    expansion coefficients of derived channels are defined relative to it.
    """

    kraus: tuple
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ops = [as_matrix(f, f"kraus[{j}]") for j, f in enumerate(self.kraus)]
        if not ops:
            raise DimensionError("a channel needs at least one Kraus operator")
        n = ops[0].shape[0]
        for j, f in enumerate(ops):
            if f.shape != (n, n):
                raise DimensionError(f"kraus[{j}] has shape {f.shape}, expected ({n}, {n})")
        object.__setattr__(self, "kraus", tuple(_frozen(f) for f in ops))

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def rank(self) -> int:
        """Number of Kraus operators."""
        return len(self.kraus)

    def stacked(self):
        """Kraus operators as an ``(r, n, n)`` array."""
        return np.stack(self.kraus)

    def __call__(self, rho):
        return apply_channel(self, rho)

    def __eq__(self, other):
        if not isinstance(other, QuantumChannel):
            return NotImplemented
        return self.rank == other.rank and all(
            np.array_equal(a, b) for a, b in zip(self.kraus, other.kraus)
        )

    __hash__ = None


@dataclass(frozen=True)
class CodeIsometry:
    """An ``n x k`` isometry ``W`` whose range is the code subspace."""

    w: np.ndarray
    tol: float = field(default=ISOMETRY_TOL, compare=False)

    def __post_init__(self):
        w = as_matrix(self.w, "w")
        n, k = w.shape
        if k > n:
            raise DimensionError(f"code dimension {k} exceeds ambient dimension {n}")
        residual = frob(w.conj().T @ w - np.eye(k))
        if residual > self.tol * max(1.0, np.sqrt(k)):
            raise IsometryError(f"W is not an isometry: ||W^dag W - I||_F = {residual:.6g}", residual)
        object.__setattr__(self, "w", _frozen(w))

    @property
    def ambient_dim(self) -> int:
        return self.w.shape[0]

    @property
    def code_dim(self) -> int:
        return self.w.shape[1]

    def __eq__(self, other):
        if not isinstance(other, CodeIsometry):
            return NotImplemented
        return np.array_equal(self.w, other.w)

    __hash__ = None


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix (checked at construction)."""

    m: np.ndarray
    tol: float = field(default=STATE_TOL, compare=False)

    def __post_init__(self):
        m = as_matrix(self.m, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        skew = frob(m - m.conj().T)
        if skew > self.tol:
            raise InvalidStateError(f"density matrix is not Hermitian (skew {skew:.3e})")
        tr = np.trace(m)
        if abs(tr - 1) > self.tol:
            raise InvalidStateError(f"density matrix trace is {tr:.6g}, expected 1")
        low = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
        if low < -self.tol:
            raise InvalidStateError(f"density matrix has negative eigenvalue {low:.3e}")
        object.__setattr__(self, "m", _frozen(m))

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    @classmethod
    def from_vector(cls, psi):
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def apply_channel(phi: QuantumChannel, rho):
    """Return ``sum_j F_j rho F_j^dag``. ``rho`` may be any square matrix."""
    rho = as_matrix(rho, "rho")
    if rho.shape != (phi.dim, phi.dim):
        raise DimensionError(f"rho has shape {rho.shape}, channel acts on dimension {phi.dim}")
    f = phi.stacked()
    return np.einsum("jab,bc,jdc->ad", f, rho, f.conj(), optimize=True)


def encode(code: CodeIsometry, data):
    """Encode a ``k x k`` data state as ``W rho W^dag``."""
    m = data.m if isinstance(data, DensityMatrix) else as_matrix(data, "data")
    k = code.code_dim
    if m.shape != (k, k):
        raise DimensionError(f"data state has shape {m.shape}, code dimension is {k}")
    return code.w @ m @ code.w.conj().T


def is_trace_preserving(phi: QuantumChannel, tol: float = TP_TOL):
    """
    Check ``sum_j F_j^dag F_j == I``.

    Returns
    -------
    (bool, float)
        Verdict and the residual ``||sum_j F_j^dag F_j - I||_F``.
    """
    f = phi.stacked()
    total = np.einsum("jba,jbc->ac", f.conj(), f)
    residual = frob(total - np.eye(phi.dim))
    return residual <= tol, residual


def projector(code: CodeIsometry):
    """Orthogonal projector ``P = W W^dag`` onto the code."""
    return code.w @ code.w.conj().T
