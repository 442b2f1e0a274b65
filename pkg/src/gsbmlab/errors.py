"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A parameter set violates one of its documented invariants."""


class NumericalError(RuntimeError):
    """A numerical routine cannot certify its result."""


class QveConvergenceError(NumericalError):
    """The self-consistent equation solver did not reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None,
                 iterations: int | None = None) -> None:
        if residual is not None:
            message = f"{message} (last residual {residual:.3e}"
            if iterations is not None:
                message += f" after {iterations} iterations"
            message += ")"
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
