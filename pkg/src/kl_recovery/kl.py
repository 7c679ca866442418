"""
Knill-Laflamme correctability check.

For a channel with Kraus operators ``F_1..F_r`` and a code isometry ``W``
the code is correctable iff every block ``W^dag F_i^dag F_j W`` is a scalar
multiple ``lambda_ij`` of the identity. The scalars form a Hermitian PSD
matrix whose eigendecomposition supplies the Kraus rotation and the
ancilla state used by :mod:`kl_recovery.recovery`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import CodeIsometry, QuantumChannel
from .errors import DimensionError
from .linalg import frob, hermitian_eig

KL_TOL = 1e-8
RANK_TOL = 1e-9

__all__ = ["KL_TOL", "RANK_TOL", "KLReport", "compute_lambda", "verify_correctable"]


@dataclass(frozen=True)
class KLReport:
    """
    Outcome of :func:`verify_correctable`.

    ``lam``, the residuals and the verdict are always present. The spectral
    fields (``rotation``, ``xi``, ``q``, ``gamma``) are ``None`` unless the
    code is correctable.
    """

    lam: np.ndarray
    residual: float
    relative_residual: float
    per_pair: np.ndarray
    correctable: bool
    tol: float
    rank_tol: float
    skew: float
    eigenvalues: np.ndarray
    rotation: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None
    q: Optional[int] = None
    gamma: Optional[float] = None
    reason: str = ""

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def _code_blocks(phi: QuantumChannel, code: CodeIsometry):
    if phi.dim != code.ambient_dim:
        raise DimensionError(
            f"channel dimension {phi.dim} does not match code ambient dimension {code.ambient_dim}"
        )
    # (r, n, k): F_j W
    fw = phi.stacked() @ code.w
    # (r, r, k, k): W^dag F_i^dag F_j W
    return np.einsum("inc,jnd->ijcd", fw.conj(), fw, optimize=True)


def compute_lambda(phi: QuantumChannel, code: CodeIsometry):
    """
    Estimate the Knill-Laflamme scalars.

    ``lambda_ij`` is the normalized trace ``tr(W^dag F_i^dag F_j W) / k``,
    the least-squares best scalar for each block.

    Returns
    -------
    lam : numpy.ndarray
        ``r x r`` complex matrix.
    residual : float
        Largest per-pair defect.
    per_pair : numpy.ndarray
        ``r x r`` real matrix of ``||W^dag F_i^dag F_j W - lambda_ij I_k||_F``.
    """
    blocks = _code_blocks(phi, code)
    k = code.code_dim
    lam = np.einsum("ijcc->ij", blocks) / k
    defect = blocks - lam[:, :, None, None] * np.eye(k)
    per_pair = np.sqrt(np.sum(np.abs(defect) ** 2, axis=(2, 3)))
    return lam, float(per_pair.max()), per_pair


def verify_correctable(
    phi: QuantumChannel,
    code: CodeIsometry,
    tol: float = KL_TOL,
    rank_tol: float = RANK_TOL,
) -> KLReport:
    """
    Decide whether ``code`` corrects ``phi``.

    The verdict compares the worst per-pair residual with ``tol * ||lam||_F``.
    When correctable, ``lam`` is symmetrized and diagonalized; eigenvalues
    above ``rank_tol * lambda_max`` are kept, giving ``q``, the diagonal
    ancilla state ``xi`` and the unitary ``rotation`` with
    ``rotation^dag lam rotation = xi (+) 0``.

    A negative verdict is returned in the report, never raised.
    """
    lam, residual, per_pair = compute_lambda(phi, code)
    scale = frob(lam)
    skew = frob(lam - lam.conj().T)
    sym = (lam + lam.conj().T) / 2
    # sym is Hermitian by construction; the reported skew covers the rest
    eigenvalues, rotation = hermitian_eig(sym, tol=np.inf)
    common = dict(
        lam=lam,
        residual=residual,
        per_pair=per_pair,
        tol=tol,
        rank_tol=rank_tol,
        skew=skew,
        eigenvalues=eigenvalues,
    )
    if scale == 0.0:
        return KLReport(
            relative_residual=0.0,
            correctable=False,
            reason="every error operator annihilates the code",
            **common,
        )
    relative = residual / scale
    if relative > tol:
        worst = np.unravel_index(np.argmax(per_pair), per_pair.shape)
        return KLReport(
            relative_residual=relative,
            correctable=False,
            reason=f"pair {tuple(int(i) for i in worst)} is not proportional to the identity on the code",
            **common,
        )
    q = int(np.sum(eigenvalues > rank_tol * eigenvalues[0]))
    xi = np.diag(eigenvalues[:q]).astype(np.complex128)
    return KLReport(
        relative_residual=relative,
        correctable=True,
        rotation=rotation,
        xi=xi,
        q=q,
        gamma=float(np.sum(eigenvalues[:q])),
        **common,
    )
