"""
JSON documents for channels, codes, recovery plans and reports.

Matrices are lists of rows; each complex entry is a two-element
``[re, im]`` list. Floats are written with Python's shortest round-trip
representation, so ``load(dump(x))`` reproduces ``x`` bit for bit.

Channel document::

    {"dim": 8, "kraus": [<matrix>, ...], "metadata": {...}}

Code document::

    {"ambient_dim": 8, "code_dim": 2, "w": <matrix>}

Plan document::

    {"kind": "recovery_plan", "r": <matrix>, "xi": <matrix>, "q": 4,
     "gamma": 1.0, "code": <code document>, "rotated_kraus": [<matrix>, ...]}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channel import CodeIsometry, QuantumChannel
from .errors import DimensionError, NotUnitaryError, RecoveryError
from .recovery import RecoveryPlan

__all__ = [
    "MalformedDocumentError",
    "matrix_to_json",
    "matrix_from_json",
    "channel_to_dict",
    "channel_from_dict",
    "code_to_dict",
    "code_from_dict",
    "plan_to_dict",
    "plan_from_dict",
    "load_channel",
    "load_code",
    "load_plan",
    "dumps",
    "write_json",
]


PLAN_UNITARY_TOL = 1e-8


class MalformedDocumentError(RecoveryError, ValueError):
    """The document is not valid JSON or lacks required fields."""


def matrix_to_json(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data, name="matrix"):
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedDocumentError(f"{name}: entries must be [re, im] number pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise MalformedDocumentError(
            f"{name}: expected a list of rows of [re, im] pairs, got array of shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def _require(doc, key, where):
    if not isinstance(doc, dict):
        raise MalformedDocumentError(f"{where}: expected a JSON object")
    if key not in doc:
        raise MalformedDocumentError(f"{where}: missing field {key!r}")
    return doc[key]


def channel_to_dict(phi: QuantumChannel):
    return {
        "dim": phi.dim,
        "kraus": [matrix_to_json(f) for f in phi.kraus],
        "metadata": dict(phi.metadata),
    }


def channel_from_dict(doc):
    dim = _require(doc, "dim", "channel")
    kraus = _require(doc, "kraus", "channel")
    if not isinstance(kraus, list) or not kraus:
        raise MalformedDocumentError("channel: 'kraus' must be a non-empty list")
    ops = [matrix_from_json(f, f"kraus[{j}]") for j, f in enumerate(kraus)]
    for j, f in enumerate(ops):
        if f.shape != (dim, dim):
            raise DimensionError(f"kraus[{j}] has shape {f.shape}, but dim is {dim}")
    return QuantumChannel(ops, metadata=dict(doc.get("metadata") or {}))


def code_to_dict(code: CodeIsometry):
    return {"ambient_dim": code.ambient_dim, "code_dim": code.code_dim, "w": matrix_to_json(code.w)}


def code_from_dict(doc, tol=None):
    w = matrix_from_json(_require(doc, "w", "code"), "w")
    n = doc.get("ambient_dim", w.shape[0])
    k = doc.get("code_dim", w.shape[1])
    if w.shape != (n, k):
        raise DimensionError(f"w has shape {w.shape}, but the document declares ({n}, {k})")
    return CodeIsometry(w) if tol is None else CodeIsometry(w, tol=tol)


def plan_to_dict(plan: RecoveryPlan):
    return {
        "kind": "recovery_plan",
        "r": matrix_to_json(plan.r_unitary),
        "xi": matrix_to_json(plan.xi),
        "q": plan.q,
        "gamma": plan.gamma,
        "code": code_to_dict(plan.code),
        "rotated_kraus": [matrix_to_json(g) for g in plan.rotated_kraus],
    }


def plan_from_dict(doc):
    r = matrix_from_json(_require(doc, "r", "plan"), "r")
    if r.shape[0] != r.shape[1]:
        raise DimensionError(f"plan: R must be square, got {r.shape}")
    defect = float(np.linalg.norm(r.conj().T @ r - np.eye(r.shape[0])))
    if defect > PLAN_UNITARY_TOL:
        raise NotUnitaryError(f"plan: R is not unitary (||R^dag R - I||_F = {defect:.3e})", defect)
    xi = matrix_from_json(_require(doc, "xi", "plan"), "xi")
    rotated = tuple(matrix_from_json(g, f"rotated_kraus[{j}]") for j, g in enumerate(_require(doc, "rotated_kraus", "plan")))
    return RecoveryPlan(
        r_unitary=r,
        xi=xi,
        q=int(_require(doc, "q", "plan")),
        code=code_from_dict(_require(doc, "code", "plan")),
        rotated_kraus=rotated,
        gamma=float(_require(doc, "gamma", "plan")),
    )


def _read(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedDocumentError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"{path}: invalid JSON ({exc})") from exc


def load_channel(path):
    return channel_from_dict(_read(path))


def load_code(path, tol=None):
    return code_from_dict(_read(path), tol=tol)


def load_plan(path):
    return plan_from_dict(_read(path))


def dumps(doc) -> str:
    return json.dumps(doc, allow_nan=False)


def write_json(doc, path):
    Path(path).write_text(dumps(doc) + "\n")
