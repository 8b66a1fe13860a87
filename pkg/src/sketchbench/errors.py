"""Exception hierarchy shared by all sketchbench modules."""


class SketchBenchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(SketchBenchError):
    pass


class InvalidRank(SketchBenchError):
    pass


class InvalidParam(SketchBenchError):
    pass


class RankDeficient(SketchBenchError):
    """A factorization input lost column rank beyond tolerance."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"rank deficiency detected at column {column}")


class GapViolation(SketchBenchError):
    """No strict gap between the k-th and (k+1)-th singular values."""

    def __init__(self, sigma_k, sigma_k1):
        self.sigma_k = sigma_k
        self.sigma_k1 = sigma_k1
        super().__init__(f"no spectral gap at split index: sigma_k={sigma_k!r}, sigma_k+1={sigma_k1!r}")


class ConvergenceError(SketchBenchError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class UnsupportedSize(SketchBenchError):
    pass


class Unsupported(SketchBenchError):
    pass


class InvalidProbabilities(SketchBenchError):
    pass


class FactorizationError(SketchBenchError):
    """Sketch Gram matrix stayed indefinite after all shift retries."""


class ParseError(SketchBenchError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message)


class NonNumeric(SketchBenchError):
    def __init__(self, line, column, value):
        self.line = line
        self.column = column
        super().__init__(f"non-numeric value {value!r} at line {line}, column {column}")


class EmptyInput(SketchBenchError):
    pass


class ConfigError(SketchBenchError):
    pass
