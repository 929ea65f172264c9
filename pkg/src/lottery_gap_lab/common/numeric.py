"""
Numeric layer shared by every module.

Purpose:
- exact rational (Fraction) and float arithmetic behind one small API
- numpy arrays in both modes (dtype=object holds Fractions)
- tolerances for ties and inequality checks
- JSON encoding of exact numbers
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from fractions import Fraction
from typing import Any

import numpy as np

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.domain.enums import NumericMode

Number = Fraction | float

INF = math.inf


def resolve_mode(mode: NumericMode | str | None) -> NumericMode:
    if mode is None:
        return NumericMode(get_settings().numeric_mode)
    return NumericMode(mode)


def is_rational(mode: NumericMode) -> bool:
    return mode is NumericMode.rational


def _parse_str(raw: str) -> Fraction | float:
    s = raw.strip()
    if s.lower() in {"inf", "+inf", "infinity", "+infinity"}:
        return INF
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError("Not a number", {"value": s}) from e


def to_number(x: Any, mode: NumericMode | str | None = None) -> Number:
    """Convert a scalar to the mode's number type. Infinity stays a float in both modes."""
    mode = resolve_mode(mode)
    if isinstance(x, bool):
        raise ValidationError("Booleans are not numbers", {"value": x})
    if isinstance(x, str):
        x = _parse_str(x)
    if isinstance(x, (float, np.floating)):
        xf = float(x)
        if math.isnan(xf):
            raise ValidationError("NaN is not allowed")
        if math.isinf(xf):
            return xf
        return Fraction(repr(xf)) if is_rational(mode) else xf
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x)) if is_rational(mode) else float(x)
    if isinstance(x, Fraction):
        return x if is_rational(mode) else float(x)
    raise ValidationError("Unsupported number type", {"type": type(x).__name__})


def zero(mode: NumericMode) -> Number:
    return Fraction(0) if is_rational(mode) else 0.0


def one(mode: NumericMode) -> Number:
    return Fraction(1) if is_rational(mode) else 1.0


def as_array(values: Iterable[Any] | np.ndarray, mode: NumericMode | str | None = None) -> np.ndarray:
    """numpy array in the given mode; object dtype of Fractions for rational mode."""
    mode = resolve_mode(mode)
    if not is_rational(mode):
        arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
        if arr.dtype == object and arr.size:
            arr = np.vectorize(lambda v: to_number(v, mode), otypes=[float])(arr)
        return np.asarray(arr, dtype=float)
    arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
    if arr.size == 0:
        return np.asarray(arr, dtype=object)
    return np.vectorize(lambda v: to_number(v, mode), otypes=[object])(arr)


def zeros(shape: int | tuple[int, ...], mode: NumericMode) -> np.ndarray:
    if is_rational(mode):
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape, dtype=float)


def total(values: np.ndarray, mode: NumericMode) -> Number:
    """Sum of an array that always comes back in the mode's number type."""
    s = np.asarray(values).sum() if np.size(values) else 0
    if is_rational(mode):
        return s if isinstance(s, Fraction) else to_number(s, mode)
    return float(s)


def dot(a: np.ndarray, b: np.ndarray, mode: NumericMode) -> Number:
    return total(np.asarray(a) * np.asarray(b), mode)


def tolerance(mode: NumericMode) -> Number:
    if is_rational(mode):
        return Fraction(0)
    return float(get_settings().float_tolerance)


def scaled_tolerance(mode: NumericMode, magnitude: Any) -> Number:
    """Tolerance relative to the magnitude of the compared quantities (at least absolute)."""
    if is_rational(mode):
        return Fraction(0)
    return float(get_settings().float_tolerance) * max(1.0, abs(float(magnitude)))


def is_close(a: Number, b: Number, mode: NumericMode) -> bool:
    if is_rational(mode):
        return a == b
    return abs(float(a) - float(b)) <= scaled_tolerance(mode, max(abs(float(a)), abs(float(b))))


def rationalize(x: Number, max_denominator: int | None = None) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if math.isinf(float(x)):
        raise ValidationError("Cannot rationalize infinity")
    limit = max_denominator or get_settings().rationalize_denominator
    return Fraction(float(x)).limit_denominator(limit)


def convert_array(arr: np.ndarray, mode: NumericMode) -> np.ndarray:
    if is_rational(mode):
        return np.vectorize(rationalize, otypes=[object])(arr) if arr.size else arr.astype(object)
    return np.asarray(arr, dtype=float)


def to_json_number(x: Any) -> int | float | str:
    """Exact JSON encoding: integers as ints, other Fractions as "p/q", floats as floats."""
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    xf = float(x)
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return xf


def as_float(x: Any) -> float:
    return float(x)
