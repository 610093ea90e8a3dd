"""Exception types raised by the solvers and the harness."""


class ConfigurationError(ValueError):
    """Invalid mesh, problem or run configuration."""


class DataError(ValueError):
    """Non-finite or mis-shaped input data."""


class ParameterError(ValueError):
    """Invalid algorithm parameter (penalty, tolerance, schedule)."""


class NotSPDError(ArithmeticError):
    """CG met a non-positive curvature <Hq, q>; the operator is not SPD."""


class SolverError(RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    ``context`` carries whatever the raiser knows (outer iteration, residual).
    """

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def __str__(self):
        base = super().__str__()
        if not self.context:
            return base
        extra = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{base} ({extra})"
