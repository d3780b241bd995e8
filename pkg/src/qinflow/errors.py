"""Exception types shared across the package."""


class QinflowError(Exception):
    """Base class for all library errors."""


class DimensionError(QinflowError):
    """Operands have incompatible shapes or Hilbert-space dimensions."""


class EnsembleError(QinflowError):
    """An ensemble is malformed or does not mix to the required state."""


class ModelError(QinflowError):
    """A system, policy or model file refers to unknown ids or breaks an invariant."""


class OracleError(QinflowError):
    """A supplied unwinding oracle violates its axioms on the tested state set."""


class CommandClashError(QinflowError):
    """Two systems being composed share a command name."""


class IncompatiblePoliciesError(QinflowError):
    """Two policies disagree on their shared agents."""


class ExtensionError(QinflowError):
    """A generalised-composition ingredient fails a cylindrical-extension check."""

    def __init__(self, condition: str, residual: float | None = None, message: str = ""):
        self.condition = condition
        self.residual = residual
        detail = message or condition
        if residual is not None:
            detail = f"{detail} (worst residual {residual:.3e})"
        super().__init__(detail)
