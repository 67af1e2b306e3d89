"""Exception hierarchy. Each family maps onto one CLI exit code."""


class HeatRiskError(Exception):
    exit_code = 1


class ConfigError(HeatRiskError):
    exit_code = 2


class DataError(HeatRiskError, ValueError):
    exit_code = 3


class InputError(DataError):
    """Argument outside the operation's domain (empty data, bad share, ...)."""


class DomainError(DataError):
    """Value outside the mathematical domain (log of non-positive, zero divisor)."""


class ParseError(DataError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class AlignmentError(DataError):
    """Series that must share a timestamp grid do not."""


class ContractError(HeatRiskError, ValueError):
    """Caller violated an interface contract (schema mismatch, unknown column)."""

    exit_code = 3


class NumericError(HeatRiskError, ArithmeticError):
    exit_code = 4


class CalibrationError(NumericError):
    def __init__(self, message, dependent_columns=()):
        self.dependent_columns = tuple(dependent_columns)
        super().__init__(message)
