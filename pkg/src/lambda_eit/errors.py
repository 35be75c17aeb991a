"""Exception hierarchy shared by every module.

Each class maps onto one failure mode; the CLI turns them into exit codes.
"""


class LambdaEITError(Exception):
    """Base class for all package errors."""


class DimensionError(LambdaEITError, ValueError):
    pass


class SizeError(LambdaEITError, ValueError):
    pass


class DomainError(LambdaEITError, ValueError):
    pass


class ConfigurationError(LambdaEITError, ValueError):
    """Bad or incomplete configuration (config files, unresolved model constants)."""


class SingularityError(LambdaEITError, ZeroDivisionError):
    pass


class SolverError(LambdaEITError, RuntimeError):
    """Base for numerical solver failures."""


class IntegrationError(SolverError):
    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t = {t:.6g} ns)")
        self.t = t


class AmbiguityError(SolverError):
    pass


class ConvergenceError(SolverError):
    pass


class ResolutionError(SolverError):
    pass


class PeakError(SolverError):
    pass


class CalibrationError(SolverError):
    pass


class FitError(LambdaEITError, RuntimeError):
    def __init__(self, message, residual_norm=None):
        if residual_norm is not None:
            message = f"{message} (residual norm {residual_norm:.3e})"
        super().__init__(message)
        self.residual_norm = residual_norm


class SchemaError(LambdaEITError, ValueError):
    pass
