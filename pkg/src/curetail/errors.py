"""Exception types shared across the package."""


class CureTailError(Exception):
    """Base class for all errors raised by curetail."""


class DataError(CureTailError):
    """Input data violates the observed-data contract."""


class MissingColumn(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class BadStatus(DataError):
    pass


class EmptyFile(DataError):
    pass


class NoMass(CureTailError):
    """No covariate falls inside the kernel window around the evaluation point."""


class DegenerateCovariate(CureTailError):
    pass


class NonPositiveTau(CureTailError):
    pass


class EmptyGrid(CureTailError):
    pass


class BadAlpha(CureTailError):
    pass


class DegenerateDenominator(CureTailError):
    """A non-vanishing condition required by the asymptotic formulas fails.

    ``hypothesis`` names the violated condition so the CLI can report it.
    """

    def __init__(self, message, hypothesis=""):
        super().__init__(message)
        self.hypothesis = hypothesis


class IntegrandBlowup(CureTailError):
    pass
