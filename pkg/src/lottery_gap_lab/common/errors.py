"""
Unified errors and error codes.

Purpose:
- stable codes shared by library calls, the CLI and JSON reports
- one exception style across the project
- mapping from errors to CLI exit codes
"""

from __future__ import annotations

from dataclasses import dataclass


class ErrCode:
    # General
    UNKNOWN = "unknown"
    VALIDATION = "validation"

    # Enumeration / solver limits
    CAPACITY = "capacity_exceeded"
    SOLVER = "solver_failure"

    # Mathematical invariants
    INVARIANT = "invariant_violation"
    NOT_INCENTIVE_COMPATIBLE = "not_incentive_compatible"
    NOT_INDIVIDUALLY_RATIONAL = "not_individually_rational"


@dataclass
class AppError(Exception):
    """
    Base lab error.
    - code: stable error code
    - message: human readable message
    - details: extra data (counts, caps, witness profiles)
    """

    code: str
    message: str
    details: dict | None = None

    def __str__(self) -> str:  # pragma: no cover
        return f"{self.code}: {self.message}"


class ValidationError(AppError):
    def __init__(self, message: str = "Validation failed", details: dict | None = None) -> None:
        super().__init__(ErrCode.VALIDATION, message, details)


class CapacityError(AppError):
    def __init__(
        self, message: str = "Enumeration capacity exceeded", details: dict | None = None
    ) -> None:
        super().__init__(ErrCode.CAPACITY, message, details)


class InvariantViolation(AppError):
    def __init__(self, message: str = "Invariant violated", details: dict | None = None) -> None:
        super().__init__(ErrCode.INVARIANT, message, details)


class IncentiveError(AppError):
    def __init__(
        self,
        message: str = "Mechanism is not incentive compatible",
        details: dict | None = None,
        code: str = ErrCode.NOT_INCENTIVE_COMPATIBLE,
    ) -> None:
        super().__init__(code, message, details)


class SolverError(AppError):
    def __init__(self, message: str = "LP solver failed", details: dict | None = None) -> None:
        super().__init__(ErrCode.SOLVER, message, details)


EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def exit_code_for(err: AppError) -> int:
    if err.code in {ErrCode.VALIDATION, ErrCode.CAPACITY}:
        return EXIT_CONFIG
    if err.code in {
        ErrCode.INVARIANT,
        ErrCode.NOT_INCENTIVE_COMPATIBLE,
        ErrCode.NOT_INDIVIDUALLY_RATIONAL,
    }:
        return EXIT_VIOLATION
    return EXIT_INTERNAL
