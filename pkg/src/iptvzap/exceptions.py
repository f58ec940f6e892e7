"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument or configuration value is outside its valid range."""


class UndefinedRatioError(ZeroDivisionError):
    """A relative change was requested against a zero reference."""


class IncompleteSweepError(KeyError):
    """A sweep table is missing a cell that a report needs."""
