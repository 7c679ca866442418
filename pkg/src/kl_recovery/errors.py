"""Exception types raised by kl_recovery."""


class RecoveryError(Exception):
    """Base class for all library errors."""


class DimensionError(RecoveryError, ValueError):
    """Operand shapes are incompatible."""


class NotHermitianError(RecoveryError, ValueError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class IsometryError(RecoveryError, ValueError):
    """Columns are not orthonormal (W^dag W != I) beyond tolerance."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NotUnitaryError(RecoveryError, ValueError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class InvalidStateError(RecoveryError, ValueError):
    """Matrix is not a valid density matrix."""


class InvalidProbabilityError(RecoveryError, ValueError):
    pass


class NotCorrectableError(RecoveryError):
    """The code does not satisfy the Knill-Laflamme condition for the channel."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularAncillaError(RecoveryError):
    """The ancilla state has a non-positive eigenvalue, so its inverse square root does not exist."""


class SpanError(RecoveryError):
    """New error operators are not in the span of the plan's error operators on the code."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual
