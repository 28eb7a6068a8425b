"""Exception types raised across the package.

Exit codes used by the CLI are attached as class attributes so the
command-line layer does not need its own lookup table.
"""


class KMedianError(Exception):
    exit_code = 1


class ValidationError(KMedianError, ValueError):
    """Bad input: malformed files, bad parameters, broken metric axioms."""

    exit_code = 2


class InvalidConfigurationError(ValidationError):
    pass


class DegenerateInstanceError(ValidationError):
    pass


class InputFormatError(ValidationError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class MetricValidationError(ValidationError):
    pass


class UnsupportedMetricError(ValidationError):
    pass


class InfeasibleKError(KMedianError):
    exit_code = 3


class OracleTooLargeError(KMedianError):
    exit_code = 3
