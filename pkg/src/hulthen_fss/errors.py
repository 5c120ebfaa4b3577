class HulthenError(Exception):
    """Base class for errors raised by this package."""


class NoBoundState(HulthenError):
    """No negative, admissible eigenvalue exists (e.g. coupling below threshold)."""


class ConditioningError(HulthenError):
    """The overlap matrix is not positive definite or too ill-conditioned."""


class ConvergenceError(HulthenError):
    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class QuadratureError(HulthenError):
    def __init__(self, message: str, node: float | None = None):
        super().__init__(message)
        self.node = node


class UndefinedPoint(HulthenError):
    """A finite-size-scaling quantity is undefined at this coupling."""


class BracketError(HulthenError):
    def __init__(self, message: str, endpoint_values: tuple[float, float] | None = None):
        super().__init__(message)
        self.endpoint_values = endpoint_values


class SurfaceParseError(HulthenError):
    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class ConfigError(HulthenError):
    pass
