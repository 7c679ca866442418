"""
Measurement-free recovery: one unitary followed by a partial trace.

Given a correctable (channel, code) pair, :func:`build_recovery` returns a
unitary ``R`` with

    R^dag Phi(W rho W^dag) R = (xi (x) rho) (+) 0

for every data state ``rho``, where ``xi`` is the ``q x q`` ancilla state
found by :func:`kl_recovery.kl.verify_correctable`. Decoding is then a
conjugation by ``R`` and a trace over the ancilla factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import CodeIsometry, QuantumChannel
from .errors import DimensionError, NotCorrectableError, NotUnitaryError, SingularAncillaError, SpanError
from .kl import KLReport
from .linalg import FACTOR_TOL, as_matrix, complete_to_unitary, frob, hermitian_eig, partial_trace_first

SPAN_TOL = 1e-8

__all__ = [
    "RecoveryPlan",
    "Extension",
    "rotate_kraus",
    "build_recovery",
    "conjugate_output",
    "recover",
    "recover_full",
    "extend_plan",
]


@dataclass(frozen=True)
class RecoveryPlan:
    r_unitary: np.ndarray
    xi: np.ndarray
    q: int
    code: CodeIsometry
    rotated_kraus: tuple
    gamma: float

    @property
    def dim(self) -> int:
        return self.r_unitary.shape[0]

    @property
    def block_dim(self) -> int:
        """Size ``q * k`` of the block carrying ``xi (x) rho``."""
        return self.q * self.code.code_dim


@dataclass(frozen=True)
class Extension:
    """Result of reusing a plan for a channel with linearly dependent errors."""

    xi_tilde: np.ndarray
    coeffs: np.ndarray
    residual: float
    relative_residual: float


def rotate_kraus(phi: QuantumChannel, rotation, tol: float = FACTOR_TOL):
    """Return ``G_j = sum_i u_ij F_i`` for a unitary ``u``; the channel is unchanged."""
    u = as_matrix(rotation, "rotation")
    r = phi.rank
    if u.shape != (r, r):
        raise DimensionError(f"rotation must be {r}x{r}, got {u.shape}")
    defect = frob(u.conj().T @ u - np.eye(r))
    if defect > tol * max(1.0, np.sqrt(r)):
        raise NotUnitaryError(f"rotation is not unitary: ||u^dag u - I||_F = {defect:.3e}", defect)
    return list(np.einsum("ij,iab->jab", u, phi.stacked()))


def _sqrt_and_inv_sqrt(xi):
    vals, vecs = hermitian_eig(xi)
    if vals[-1] <= 0:
        raise SingularAncillaError(
            f"ancilla state has eigenvalue {vals[-1]:.3e}; rank_tol is too small for this channel"
        )
    vd = vecs.conj().T
    return (vecs * np.sqrt(vals)) @ vd, (vecs / np.sqrt(vals)) @ vd


def build_recovery(
    phi: QuantumChannel,
    code: CodeIsometry,
    report: KLReport,
    tol: float = FACTOR_TOL,
) -> RecoveryPlan:
    """
    Construct the recovery unitary.

    The Kraus operators are rotated so the Knill-Laflamme matrix becomes
    ``xi (+) 0``. The first ``q*k`` columns of ``R`` are
    ``[G_1 W, ..., G_q W] (xi^{-1/2} (x) I_k)``, which are orthonormal
    because ``(I_q (x) W)^dag G^dag G (I_q (x) W) = xi (x) I_k``; the rest
    complete them to a unitary.

    Raises
    ------
    NotCorrectableError
        If ``report`` carries a negative verdict.
    SingularAncillaError
        If ``xi`` is not positive definite.
    """
    if not report.correctable:
        raise NotCorrectableError(
            f"code is not correctable for this channel: {report.reason}", report.relative_residual
        )
    if phi.dim != code.ambient_dim or report.lam.shape[0] != phi.rank:
        raise DimensionError("report does not belong to this channel and code")
    rotated = rotate_kraus(phi, report.rotation, tol)
    q, k = report.q, code.code_dim
    _, xi_inv_sqrt = _sqrt_and_inv_sqrt(report.xi)
    # columns ordered (ancilla index, code index), ancilla slow
    fw = np.concatenate([g @ code.w for g in rotated[:q]], axis=1)
    r1 = fw @ np.kron(xi_inv_sqrt, np.eye(k))
    r = complete_to_unitary(r1, tol=tol)
    rotated = [np.array(g) for g in rotated]
    for g in rotated:
        g.setflags(write=False)
    return RecoveryPlan(
        r_unitary=r,
        xi=report.xi,
        q=q,
        code=code,
        rotated_kraus=tuple(rotated),
        gamma=float(np.trace(report.xi).real),
    )


def _check_output(plan: RecoveryPlan, phi_output):
    m = as_matrix(phi_output, "channel output")
    n = plan.dim
    if m.shape != (n, n):
        raise DimensionError(f"channel output has shape {m.shape}, plan acts on dimension {n}")
    return m


def conjugate_output(plan: RecoveryPlan, phi_output):
    """Return ``R^dag rho' R``."""
    m = _check_output(plan, phi_output)
    r = plan.r_unitary
    return r.conj().T @ m @ r


def recover(plan: RecoveryPlan, phi_output):
    """
    Decode a channel output back to the data space.

    Returns
    -------
    data : numpy.ndarray
        ``k x k`` decoded state ``tr_1(block) / gamma``, where ``block`` is
        the leading ``q*k`` block of ``R^dag rho' R``.
    leak : float
        Frobenius norm of everything outside that block; near zero for
        outputs of code states.
    """
    m = conjugate_output(plan, phi_output)
    d = plan.block_dim
    block = m[:d, :d]
    leak = np.sqrt(frob(m[d:, :]) ** 2 + frob(m[:d, d:]) ** 2)
    data = partial_trace_first(block, plan.q, plan.code.code_dim) / plan.gamma
    return data, float(leak)


def recover_full(plan: RecoveryPlan, phi_output):
    """
    Apply the recovery channel ``rho' -> W tr_1(R^dag rho' R) W^dag``.

    When ``k`` divides ``n`` the partial trace runs over the whole
    ``n/k``-dimensional ancilla factor, so the map is trace preserving on
    every input. Otherwise only the leading ``q*k`` block is traced. No
    division by ``gamma`` is done, so a code state comes back as
    ``gamma * rho``.
    """
    m = conjugate_output(plan, phi_output)
    n, k = plan.dim, plan.code.code_dim
    if n % k == 0:
        data = partial_trace_first(m, n // k, k)
    else:
        d = plan.block_dim
        data = partial_trace_first(m[:d, :d], plan.q, k)
    w = plan.code.w
    return w @ data @ w.conj().T


def extend_plan(plan: RecoveryPlan, new_phi: QuantumChannel, tol: float = SPAN_TOL) -> Extension:
    """
    Reuse ``plan`` for a channel whose errors are combinations of the old ones.

    Each new operator's action on the code, ``E_j W``, is expanded by least
    squares in the basis ``G_1 W, ..., G_q W`` of the plan's rotated Kraus
    operators, giving the ``q x s`` coefficient matrix ``T``. The new
    ancilla state is ``xi^{1/2} T T^dag xi^{1/2}`` and
    ``R^dag new_phi(W rho W^dag) R = (xi_tilde (x) rho) (+) 0``.

    Raises
    ------
    SpanError
        If some ``E_j W`` lies outside the span, relative to the largest
        ``||E_j W||_F``, by more than ``tol``.
    """
    if new_phi.dim != plan.dim:
        raise DimensionError(f"new channel has dimension {new_phi.dim}, plan has {plan.dim}")
    w = plan.code.w
    basis = np.stack([(g @ w).ravel() for g in plan.rotated_kraus[: plan.q]], axis=1)
    targets = np.stack([(e @ w).ravel() for e in new_phi.kraus], axis=1)
    coeffs, *_ = np.linalg.lstsq(basis, targets, rcond=None)
    defects = np.linalg.norm(targets - basis @ coeffs, axis=0)
    residual = float(defects.max())
    scale = float(np.linalg.norm(targets, axis=0).max())
    relative = residual / scale if scale > 0 else 0.0
    if relative > tol:
        raise SpanError(
            f"new error operators leave the span of the plan's errors on the code "
            f"(relative residual {relative:.3e})",
            relative,
        )
    xi_sqrt, _ = _sqrt_and_inv_sqrt(plan.xi)
    xi_tilde = xi_sqrt @ coeffs @ coeffs.conj().T @ xi_sqrt
    return Extension(xi_tilde=xi_tilde, coeffs=coeffs, residual=residual, relative_residual=relative)
