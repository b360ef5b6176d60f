"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ChanstatError(Exception):
    exit_code = 1
    kind = "error"


class ConfigError(ChanstatError, ValueError):
    """Invalid analysis configuration or scenario."""

    exit_code = 2
    kind = "config"


class OracleBudgetError(ConfigError):
    """Problem too large for the dense reference eigen-solve."""

    kind = "budget"


class FormatError(ChanstatError, ValueError):
    """Malformed or truncated input file."""

    exit_code = 3
    kind = "format"


class DegenerateError(ChanstatError, ArithmeticError):
    """Numerical degeneracy, e.g. an all-zero LSF tile."""

    exit_code = 4
    kind = "degenerate"

    def __init__(self, message, tile=None):
        super().__init__(message)
        self.tile = tile
