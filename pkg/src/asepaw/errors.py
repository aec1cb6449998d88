"""Exception hierarchy shared by all modules."""


class AsepAWError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(AsepAWError, ValueError):
    pass


class TruncationBudgetExceeded(AsepAWError):
    """An infinite product or series would need more than ``max_terms`` terms."""


class DenominatorPole(AsepAWError, ZeroDivisionError):
    pass


class NonTerminatingDivergent(AsepAWError):
    pass


class RecurrenceDenominatorZero(AsepAWError, ZeroDivisionError):
    pass


class NormalizerZero(AsepAWError, ZeroDivisionError):
    pass


class RequiresNonzeroA(AsepAWError, ValueError):
    pass


class OutsideOmega(AsepAWError, ValueError):
    """Parameters fall outside the region where the signed measure is defined."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainError(AsepAWError, ValueError):
    pass


class SingularCase(AsepAWError, ValueError):
    """ABCD lies on the grid {q^-l}; the matrix ansatz denominator may vanish."""


SingularABCD = SingularCase


class InversionFailure(AsepAWError):
    pass


class InadmissibleTime(AsepAWError, ValueError):
    pass


class InadmissiblePair(AsepAWError, ValueError):
    pass


class XOutsideSupport(AsepAWError, ValueError):
    pass


class SizeCap(AsepAWError, ValueError):
    pass


class SolveFailure(AsepAWError):
    pass


class WrongPhase(AsepAWError, ValueError):
    pass


class GridHit(AsepAWError, ValueError):
    pass


class InvalidGrid(AsepAWError, ValueError):
    pass


class ConfigError(AsepAWError, ValueError):
    pass
