"""Exception hierarchy for the identification app."""


class IdentificationError(Exception):
    """Base class for every error raised by the identification app."""


class ConfigurationError(IdentificationError, ValueError):
    pass


class UnstableModelError(IdentificationError, ValueError):
    """An A-polynomial has a root on or outside the unit circle."""


class InsufficientDataError(IdentificationError, ValueError):
    pass


class DataFormatError(IdentificationError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LinAlgError(IdentificationError, ArithmeticError):
    pass


class QZConvergenceError(LinAlgError):
    def __init__(self, message, schur=None):
        super().__init__(message)
        self.schur = schur


class ComplexEigenvalueError(LinAlgError):
    pass


class DegenerateNormalizationError(IdentificationError, ArithmeticError):
    """The y[k] entry of an eigenvector is numerically zero."""


class RankDeficientError(LinAlgError):
    pass


class OrderSearchError(IdentificationError):
    def __init__(self, message, guesses=()):
        super().__init__(message)
        self.guesses = list(guesses)


class BootstrapError(IdentificationError):
    def __init__(self, message, failures=0, replicates=0, reasons=()):
        super().__init__(message)
        self.failures = failures
        self.replicates = replicates
        self.reasons = list(reasons)
