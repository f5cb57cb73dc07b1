"""Exception hierarchy shared by all modules."""


class NclabError(Exception):
    """Base class for every error raised by this package."""


class NotSelfAdjoint(NclabError, ValueError):
    """Operator fails the self-adjointness check."""


class NumericalFailure(NclabError, RuntimeError):
    """A backend routine did not converge."""


class DomainError(NclabError, ValueError):
    """Argument outside the admissible domain."""


class SymbolSingular(NclabError, ValueError):
    """A double operator integral symbol is not finite on the spectrum."""


class DivergentDecomposition(NclabError, ValueError):
    """Summability bound of an integral decomposition is not finite."""


class DegreeError(NclabError, ValueError):
    """Chain degree is not admissible for the requested operation."""


class DimensionMismatch(NclabError, ValueError):
    """Operator dimensions are incompatible."""


class ArityMismatch(NclabError, ValueError):
    """Functional arity does not match chain length."""


class InsufficientData(NclabError, ValueError):
    """Too few samples for a fit."""


class IllConditioned(NclabError, ValueError):
    """Least-squares design matrix is too ill-conditioned."""


class TruncationError(NclabError, ValueError):
    """Truncation of the model dominates the requested quantity.

    Attributes
    ----------
    min_admissible : float or None
        Smallest parameter value for which the truncation check passes.
    """

    def __init__(self, message, min_admissible=None):
        super().__init__(message)
        self.min_admissible = min_admissible


class WindowError(NclabError, ValueError):
    """Probe window extends into the truncation-dominated regime."""


class QuadratureFailure(NclabError, RuntimeError):
    """Quadrature failed to reach the requested tolerance."""


class ConfigError(NclabError, ValueError):
    """Experiment configuration could not be parsed or validated."""


class TruncationWarning(UserWarning):
    """Value is computable but sensitive to the truncation size."""


class CycleWarning(UserWarning):
    """Chain passed where a cycle is expected has a non-negligible boundary."""
