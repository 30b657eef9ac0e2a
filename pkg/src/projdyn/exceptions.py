"""Exception and warning classes raised by projdyn.

Class names are also the error names printed by the command line runner,
so they deliberately omit the usual ``Error`` suffix.
"""


class ProjdynError(Exception):
    """Base class for every error raised by this package."""


class ZeroVector(ProjdynError, ValueError):
    """A zero (or numerically zero) vector was given where a direction is needed."""


class NotProximal(ProjdynError):
    """The matrix has no eigenvalue of strictly maximal modulus.

    Attributes
    ----------
    moduli : tuple of float
        The two largest eigenvalue moduli found, in descending order.
    """

    def __init__(self, moduli, message=None):
        self.moduli = tuple(float(m) for m in moduli)
        if message is None:
            message = "no dominant eigenvalue: top moduli %r" % (self.moduli,)
        super().__init__(message)


class NumericalFailure(ProjdynError, ArithmeticError):
    """An underlying factorization failed to converge."""


class BudgetExceeded(ProjdynError):
    """A word enumeration or search would exceed its configured budget."""


class BadModulus(ProjdynError, ValueError):
    """The modulus is not prime or divides a generator determinant."""


class SearchFailed(ProjdynError):
    """A constructive search ran out of budget without producing a witness."""


class EmptyApprox(ProjdynError):
    """No proximal word was found, so the limit set approximation is empty."""


class InsufficientScales(ProjdynError, ValueError):
    """Fewer than three scales are usable for a box-counting fit."""


class EmptyShell(ProjdynError):
    """The requested annulus contains no orbit point."""


class PrecisionExceeded(ProjdynError):
    """Word length too large for the working precision of a torus orbit."""


class NoApproach(ProjdynError):
    """No orbit point came close enough to the origin."""


class InvalidConfig(ProjdynError, ValueError):
    """Inconsistent experiment or walk configuration."""


class GeneratorFileError(ProjdynError, ValueError):
    """Malformed generator file; ``lineno`` points at the offending line."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += str(path)
        if lineno is not None:
            where += ":%d" % lineno
        super().__init__("%s: %s" % (where, message) if where else message)


class DegenerateSpectrum(UserWarning):
    """All spectrum values are numerically rational multiples of one value."""
