"""Knill-Laflamme verification and measurement-free recovery for quantum codes."""

from .channel import CodeIsometry, DensityMatrix, QuantumChannel, apply_channel, encode, is_trace_preserving, projector
from .errors import (
    DimensionError,
    IsometryError,
    NotCorrectableError,
    NotHermitianError,
    RecoveryError,
    SingularAncillaError,
    SpanError,
)
from .kl import KLReport, compute_lambda, verify_correctable
from .recovery import (
    Extension,
    RecoveryPlan,
    build_recovery,
    conjugate_output,
    extend_plan,
    recover,
    recover_full,
    rotate_kraus,
)

__version__ = "0.1.0"
