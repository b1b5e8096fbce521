"""Error hierarchy shared by the core modules and the command layer."""

from __future__ import annotations

EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64


class LabError(RuntimeError):
    """Base error for every failure raised by littlewood-lab."""

    exit_code = EXIT_CONTRACT


class ContractError(LabError):
    """Raised when an operation's precondition does not hold."""

    exit_code = EXIT_CONTRACT


class NumericError(LabError):
    """Raised when a computation cannot be carried out reliably."""

    exit_code = EXIT_NUMERIC


class DomainError(ContractError):
    """Raised for inputs outside an operation's domain (NaN, inf, ...)."""


class DimensionMismatchError(ContractError):
    """Raised when matrix/vector shapes do not agree."""

    def __init__(self, expected: int, got: int, what: str = "dimension") -> None:
        super().__init__(f"{what} mismatch: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class ConfigError(ContractError):
    """Raised for invalid configuration values or files."""


class BudgetError(ContractError):
    """Raised when a scan would exceed its evaluation budget."""
