"""Exception types raised across the package."""


class JCHError(Exception):
    """Base class for package errors."""


class DomainError(JCHError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnboundedOccupationError(DomainError):
    """Raised when mu >= omega: the polariton number diverges."""


class DegeneracyError(JCHError, ArithmeticError):
    """A perturbative energy denominator vanishes (point on a lobe boundary)."""


class SizeError(JCHError, ValueError):
    """Requested object exceeds a size guard."""


class TruncationError(JCHError):
    """Ground state leaks into the top photon levels of the truncated basis."""

    def __init__(self, message, top_weight=None, psi=None, n_trunc=None):
        super().__init__(message)
        self.top_weight = top_weight
        self.psi = psi
        self.n_trunc = n_trunc


class IterationLimitError(JCHError):
    """Iterative solver hit its iteration cap; carries the best estimate."""

    def __init__(self, message, estimate=None, residual=None, iterations=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations


class GraphFormatError(JCHError, ValueError):
    """Malformed edge-list file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
