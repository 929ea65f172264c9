"""Feasibility set systems, matroid oracles and exchange maps."""

from lottery_gap_lab.feas.exchange import exchange_bijection, partial_exchange_maps
from lottery_gap_lab.feas.matroids import GroundElement, MatroidOracle, check_matroid_axioms
from lottery_gap_lab.feas.system import FeasibilitySystem, unit_demand

__all__ = [
    "FeasibilitySystem",
    "GroundElement",
    "MatroidOracle",
    "check_matroid_axioms",
    "exchange_bijection",
    "partial_exchange_maps",
    "unit_demand",
]
