"""
Exceptions raised by the PDFW package.

All of them derive from `PDFWError`, so callers can catch everything
coming from this package with a single `except` clause.
"""


class PDFWError(Exception):
    """Base class for all PDFW errors"""


class ContractViolation(PDFWError, ValueError):
    """Raised when inputs break a precondition (mostly dimension mismatches)"""


class UnsupportedInstance(PDFWError):
    """Raised when an algorithm or oracle cannot handle the given instance"""


class InfeasibleRegion(PDFWError):
    """Raised when the set {v in the achievable-mean polytope: Av <= b} is empty"""


class ConditioningError(PDFWError):
    """Raised when the LP solver meets a pivot that is numerically too small"""


class GenerationError(PDFWError):
    """Raised when an instance generator cannot produce a certified instance"""


class PropertyFailure(PDFWError):
    """Raised when an acceptance property does not hold"""


class PlanError(PDFWError, ValueError):
    """Raised when an experiment plan is invalid"""
