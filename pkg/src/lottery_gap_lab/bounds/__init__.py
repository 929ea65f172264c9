"""Copies instance, the A^L construction and the per-setting inequality checkers."""

from lottery_gap_lab.bounds.al_mechanism import ALRecord, build_A_L
from lottery_gap_lab.bounds.copies import CopiesInstance, build_copies
from lottery_gap_lab.bounds.multi_agent import (
    ThresholdOutcome,
    build_M2_M3,
    check_claim_A2_bounds,
    check_setting3,
    check_setting4,
    compute_A1_A2,
    myerson_vs_dsic_row,
)
from lottery_gap_lab.bounds.reports import GapReport, InequalityRow
from lottery_gap_lab.bounds.setting1 import (
    argmax_sigma,
    check_copies_bound,
    check_setting1,
    copies_bound_rows,
)
from lottery_gap_lab.bounds.setting2 import additive_lift, check_setting2

__all__ = [
    "ALRecord",
    "CopiesInstance",
    "GapReport",
    "InequalityRow",
    "ThresholdOutcome",
    "additive_lift",
    "argmax_sigma",
    "build_A_L",
    "build_M2_M3",
    "build_copies",
    "check_claim_A2_bounds",
    "check_copies_bound",
    "check_setting1",
    "check_setting2",
    "check_setting3",
    "check_setting4",
    "compute_A1_A2",
    "copies_bound_rows",
    "myerson_vs_dsic_row",
]
