"""
Error types raised by the toolkit and their CLI exit codes
"""
from typing import Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class TdeError(Exception):
    """Base class for all toolkit errors"""
    exit_code = EXIT_CONFIG


class ConfigError(TdeError, ValueError):
    """Invalid parameters, unknown algorithm, inconsistent options"""
    exit_code = EXIT_CONFIG


class FormatError(TdeError, ValueError):
    """Malformed file: wrong magic, version, or truncated payload"""
    exit_code = EXIT_CONFIG


class ShapeError(TdeError, ValueError):
    """Inconsistent array shapes or mode sizes"""
    exit_code = EXIT_CONFIG


class RankError(TdeError, ValueError):
    """Requested rank exceeds the available matrix dimension or sketch size"""
    exit_code = EXIT_CONFIG


class DomainError(TdeError, ValueError):
    """Samples or evaluation points outside the domain box"""
    exit_code = EXIT_CONFIG

    def __init__(self, message: str, offenders: Optional[int] = None):
        super().__init__(message)
        self.offenders = offenders


class MemoryCapError(TdeError, MemoryError):
    """Dense oracle tensor would exceed the configured entry cap"""
    exit_code = EXIT_NUMERIC


class NumericError(TdeError, ArithmeticError):
    """Non-finite input, degenerate weights, nonpositive mass, divergence"""
    exit_code = EXIT_NUMERIC


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code"""
    if isinstance(error, TdeError):
        return error.exit_code
    if isinstance(error, (ArithmeticError, MemoryError)):
        return EXIT_NUMERIC
    return EXIT_CONFIG
