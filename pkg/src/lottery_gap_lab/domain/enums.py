"""
Domain enums.

Used across the lab:
- numeric mode of every constructed object
- type-space structure and feasibility tags
- scope of checked inequalities
"""

from __future__ import annotations

import enum


class NumericMode(str, enum.Enum):
    """
    Arithmetic backing all values, probabilities and prices.
    """

    rational = "rational"
    float = "float"


class Structure(str, enum.Enum):
    product = "product"
    additive = "additive"
    explicit = "explicit"


class FeasibilityKind(str, enum.Enum):
    matching = "matching"
    general = "general"


class MatroidKind(str, enum.Enum):
    uniform = "uniform"
    partition = "partition"
    explicit = "explicit"
    free = "free"


class InequalityScope(str, enum.Enum):
    """
    pointwise: checked on every profile (worst case reported)
    expectation: checked on expected values
    derived: composed constant, reported with provenance only
    """

    pointwise = "pointwise"
    expectation = "expectation"
    derived = "derived"
