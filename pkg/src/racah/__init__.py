"""Weighted discrete Racah polynomial matrices: a stabilized generator,
reference baselines, an extended-precision oracle and an experiment harness."""

from .core import PolyMatrix, RacahParams, validate_params
from .errors import (
    ConstraintViolation,
    DegenerateRow,
    DimensionMismatch,
    DomainError,
    FormatError,
    NonIntegerBeta,
    NonIntegerSize,
    NumericalBreakdown,
    PoleError,
    RacahError,
    RacahOverflowError,
    SizeLimit,
    TimeBudgetExceeded,
    ZeroSignal,
)
from .imst import ImStConfig, StabilizationReport, generate, generate_special

__version__ = "0.1.0"

__all__ = [
    "ConstraintViolation", "DegenerateRow", "DimensionMismatch", "DomainError", "FormatError",
    "ImStConfig", "NonIntegerBeta", "NonIntegerSize", "NumericalBreakdown", "PoleError",
    "PolyMatrix", "RacahError", "RacahOverflowError", "RacahParams", "SizeLimit",
    "StabilizationReport", "TimeBudgetExceeded", "ZeroSignal", "generate",
    "generate_special", "validate_params",
]
