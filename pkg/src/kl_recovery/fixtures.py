"""
Worked examples and random correctable instances.

Randomness always comes from ``numpy.random.default_rng(seed)`` (the PCG64
bit generator), so every instance is reproducible from its integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import CodeIsometry, QuantumChannel
from .errors import DimensionError, InvalidProbabilityError
from .linalg import complete_to_unitary

__all__ = [
    "CorrectableInstance",
    "PAULI_X",
    "PAULI_Z",
    "example1",
    "example2",
    "example3",
    "example3_xi_tilde",
    "bitflip_recovery_unitary",
    "example1_recovery_unitary",
    "identity_instance",
    "non_correctable_instance",
    "phase_flip_channel",
    "random_isometry",
    "random_unitary",
    "random_pure_state",
    "random_mixed_state",
    "random_data_state",
    "random_correctable",
    "oracle_roundtrip",
    "FIXTURES",
]

I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True)
class CorrectableInstance:
    channel: QuantumChannel
    code: CodeIsometry
    label: str
    expected_xi: Optional[np.ndarray] = None


def _kron_all(*ops):
    out = np.eye(1, dtype=np.complex128)
    for op in ops:
        out = np.kron(out, op)
    return out


def _on_qubit(op, which, nqubits=3):
    return _kron_all(*[op if i == which else I2 for i in range(nqubits)])


def _check_probs(p, count):
    p = np.asarray(p, dtype=float)
    if p.shape != (count,):
        raise InvalidProbabilityError(f"expected {count} probabilities, got {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidProbabilityError(f"probabilities must be non-negative, got {p}")
    if p.sum() > 1 + 1e-12:
        raise InvalidProbabilityError(f"probabilities sum to {p.sum()}, more than 1")
    return p


def example1() -> CorrectableInstance:
    """Mixed-unitary channel ``(rho + U rho U^dag)/2`` with ``U = diag(1, -1, i, -i)``."""
    u = np.diag([1, -1, 1j, -1j]).astype(np.complex128)
    channel = QuantumChannel([np.eye(4) / np.sqrt(2), u / np.sqrt(2)], metadata={"name": "example1"})
    w = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=np.complex128) / np.sqrt(2)
    return CorrectableInstance(channel, CodeIsometry(w), "example1", expected_xi=np.eye(2) / 2)


def example1_recovery_unitary():
    """A recovery unitary for :func:`example1` written out by hand."""
    return np.array(
        [[1, 0, 1, 0], [1, 0, -1, 0], [0, 1, 0, 1j], [0, 1, 0, -1j]], dtype=np.complex128
    ) / np.sqrt(2)


def repetition_code():
    """The three-qubit repetition code spanned by ``|000>`` and ``|111>``."""
    w = np.zeros((8, 2), dtype=np.complex128)
    w[0, 0] = w[7, 1] = 1
    return CodeIsometry(w)


def example2(p=(0.25, 0.25, 0.25, 0.25)) -> CorrectableInstance:
    """Three-qubit bit-flip channel: no flip with ``p[0]``, flip of qubit ``a`` with ``p[a]``."""
    p = _check_probs(p, 4)
    kraus = [np.sqrt(p[0]) * np.eye(8)] + [np.sqrt(p[a]) * _on_qubit(PAULI_X, a - 1) for a in (1, 2, 3)]
    channel = QuantumChannel(kraus, metadata={"name": "example2", "p": [float(x) for x in p]})
    expected = np.diag(np.sort(p[p > 0])[::-1])
    return CorrectableInstance(channel, repetition_code(), "example2", expected_xi=expected.astype(np.complex128))


def bitflip_recovery_unitary():
    """Permutation matrix with ones at (1,1),(2,7),(3,5),(4,4),(5,3),(6,6),(7,8),(8,2), 1-based."""
    r = np.zeros((8, 8), dtype=np.complex128)
    for i, j in [(1, 1), (2, 7), (3, 5), (4, 4), (5, 3), (6, 6), (7, 8), (8, 2)]:
        r[i - 1, j - 1] = 1
    return r


def _rotation(t):
    # exp(i t X) = cos t I + i sin t X
    return np.cos(t) * I2 + 1j * np.sin(t) * PAULI_X


def example3(p_tilde, t) -> QuantumChannel:
    """Rotation-error channel with Kraus operators ``sqrt(p~_a) exp(i t_a X_a)``."""
    p = _check_probs(p_tilde, 4)
    t = np.asarray(t, dtype=float)
    if t.shape != (3,):
        raise ValueError(f"expected three angles, got {t.shape}")
    kraus = [np.sqrt(p[0]) * np.eye(8)] + [
        np.sqrt(p[a]) * _on_qubit(_rotation(t[a - 1]), a - 1) for a in (1, 2, 3)
    ]
    return QuantumChannel(
        kraus, metadata={"name": "example3", "p": [float(x) for x in p], "t": [float(x) for x in t]}
    )


def example3_xi_tilde(p_tilde, t):
    """Closed form of the ancilla state for :func:`example3` under the bit-flip recovery."""
    p = np.asarray(p_tilde, dtype=float)
    c, s = np.cos(t), np.sin(t)
    x = np.zeros((4, 4), dtype=np.complex128)
    x[0, 0] = p[0] + np.sum(p[1:] * c**2)
    for a in (1, 2, 3):
        x[0, a] = -1j * p[a] * c[a - 1] * s[a - 1]
        x[a, 0] = 1j * p[a] * c[a - 1] * s[a - 1]
        x[a, a] = p[a] * s[a - 1] ** 2
    return x


def phase_flip_channel(p=(0.5, 0.5)) -> QuantumChannel:
    """``{sqrt(p0) I, sqrt(p1) Z (x) I (x) I}``; its error is outside the bit-flip span."""
    p = _check_probs(p, 2)
    return QuantumChannel(
        [np.sqrt(p[0]) * np.eye(8), np.sqrt(p[1]) * _on_qubit(PAULI_Z, 0)],
        metadata={"name": "phase_flip"},
    )


def identity_instance(n: int = 2) -> CorrectableInstance:
    return CorrectableInstance(
        QuantumChannel([np.eye(n)], metadata={"name": "identity"}),
        CodeIsometry(np.eye(n)),
        "identity",
        expected_xi=np.eye(1),
    )


def non_correctable_instance():
    """One bit flip on qubit 0 with a code spanned by ``|000>`` and ``|100>``."""
    channel = QuantumChannel(
        [np.sqrt(0.5) * np.eye(8), np.sqrt(0.5) * _on_qubit(PAULI_X, 0)],
        metadata={"name": "non_correctable"},
    )
    w = np.zeros((8, 2), dtype=np.complex128)
    w[0, 0] = w[4, 1] = 1
    return channel, CodeIsometry(w)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _ginibre(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_isometry(n: int, k: int, seed=None):
    """Haar-distributed ``n x k`` isometry (QR of a Gaussian matrix with phase correction)."""
    q, r = np.linalg.qr(_ginibre(_rng(seed), n, k))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_unitary(n: int, seed=None):
    return random_isometry(n, n, seed)


def random_pure_state(k: int, seed=None):
    psi = random_isometry(k, 1, seed)[:, 0]
    return np.outer(psi, psi.conj())


def random_mixed_state(k: int, seed=None):
    """``G G^dag / tr(G G^dag)`` with ``G`` a ``k x k`` standard complex Gaussian."""
    g = _ginibre(_rng(seed), k, k)
    m = g @ g.conj().T
    return m / np.trace(m)


def random_data_state(k: int, trial: int, rng):
    """Even trials draw pure states, odd trials mixed ones."""
    return random_pure_state(k, rng) if trial % 2 == 0 else random_mixed_state(k, rng)


def random_correctable(n: int, k: int, q: int, seed: int = 0, trace_preserving: bool = True) -> CorrectableInstance:
    """
    Random channel with a known correctable code.

    A code isometry ``W`` is drawn first, then an ``n x qk`` isometry split
    into blocks ``A_1..A_q`` with mutually orthogonal ranges, and weights
    ``p`` summing to one. Each Kraus operator maps the code through
    ``sqrt(p_j) A_j W^dag``, so ``W^dag F_i^dag F_j W = p_j delta_ij I``.

    With ``trace_preserving`` the complement of the code is sent through
    ``sqrt(p_j) B_j C^dag`` where ``C`` spans the code complement and
    ``[A_j, B_j]`` is unitary; then every ``F_j`` is ``sqrt(p_j)`` times a
    unitary and the channel is trace preserving. Otherwise the complement
    action is an arbitrary Gaussian matrix.
    """
    if q < 1 or k < 1 or q * k > n:
        raise DimensionError(f"need 1 <= q*k <= n, got n={n}, k={k}, q={q}")
    rng = _rng(seed)
    w = random_isometry(n, k, rng)
    basis = complete_to_unitary(w)
    comp = basis[:, k:]
    a = random_isometry(n, q * k, rng)
    p = rng.dirichlet(np.ones(q))
    kraus = []
    for j in range(q):
        aj = a[:, j * k : (j + 1) * k]
        if trace_preserving:
            bj = complete_to_unitary(aj)[:, k:] @ random_unitary(n - k, rng)
        else:
            bj = _ginibre(rng, n, n - k)
        kraus.append(np.sqrt(p[j]) * (aj @ w.conj().T + bj @ comp.conj().T))
    order = np.argsort(-p)
    channel = QuantumChannel(kraus, metadata={"name": "random", "n": n, "k": k, "q": q, "seed": str(seed)})
    return CorrectableInstance(
        channel, CodeIsometry(w), f"random(n={n}, k={k}, q={q}, seed={seed})",
        expected_xi=np.diag(p[order]).astype(np.complex128),
    )


def oracle_roundtrip(instance: CorrectableInstance, trials: int = 50, seed: int = 0, r_unitary=None) -> float:
    """
    Worst decoding error over random data states, computed independently.

    Only the recovery unitary ``R`` and the code isometry are taken from the
    library (``R`` is built here unless passed in). The channel output is
    formed by an explicit loop over Kraus operators, and the ancilla is
    traced out by summing diagonal blocks of ``R^dag out R`` whose size is
    inferred from the code dimension; the decoded state is normalized by
    its own trace.
    """
    w = np.asarray(instance.code.w)
    n, k = w.shape
    if r_unitary is None:
        from .kl import verify_correctable
        from .recovery import build_recovery

        report = verify_correctable(instance.channel, instance.code)
        r_unitary = build_recovery(instance.channel, instance.code, report).r_unitary
    r = np.asarray(r_unitary)
    rng = _rng(seed)
    worst = 0.0
    for trial in range(trials):
        rho_data = random_data_state(k, trial, rng)
        rho = w @ rho_data @ w.conj().T
        out = np.zeros((n, n), dtype=np.complex128)
        for f in instance.channel.kraus:
            out += f @ rho @ f.conj().T
        m = r.conj().T @ out @ r
        decoded = np.zeros((k, k), dtype=np.complex128)
        for a in range(n // k):
            decoded += m[a * k : (a + 1) * k, a * k : (a + 1) * k]
        decoded /= np.trace(decoded)
        worst = max(worst, float(np.linalg.norm(decoded - rho_data)))
    return worst


FIXTURES = {
    "example1": "mixed-unitary channel (rho + U rho U^dag)/2, U = diag(1,-1,i,-i), two-dimensional code",
    "example2": "three-qubit bit-flip channel with the |000>,|111> repetition code",
    "example3": "rotation errors exp(i t X) on each qubit; extends the example2 recovery",
    "random": "random trace-preserving correctable channel with a known code",
    "identity": "single identity Kraus operator with the full space as code",
    "non_correctable": "single-qubit flip with a code it cannot correct",
    "phase_flip": "Z error on qubit 0; outside the span of the bit-flip errors",
}
