"""Mechanism representations, best responses and revenue evaluation."""

from lottery_gap_lab.mech.conversion import (
    LotteryMechanism,
    lottery_mech_feasibility_check,
    mechanism_to_lottery,
)
from lottery_gap_lab.mech.lotteries import (
    ItemPricing,
    Lottery,
    LotteryMenu,
    ProbabilityCap,
    choose_lotteries,
    pick_lotteries,
    menu_best_response,
    menu_choices,
    menu_revenue,
    pricing_best_response,
    pricing_revenue,
    region_masses,
)
from lottery_gap_lab.mech.tables import (
    ConstraintReport,
    MechanismTable,
    check_ic,
    check_ir,
    first_price_table,
    posted_price_table,
    vickrey_table,
)

__all__ = [
    "ConstraintReport",
    "ItemPricing",
    "Lottery",
    "LotteryMechanism",
    "LotteryMenu",
    "MechanismTable",
    "ProbabilityCap",
    "check_ic",
    "check_ir",
    "choose_lotteries",
    "pick_lotteries",
    "first_price_table",
    "lottery_mech_feasibility_check",
    "mechanism_to_lottery",
    "menu_best_response",
    "menu_choices",
    "menu_revenue",
    "posted_price_table",
    "pricing_best_response",
    "pricing_revenue",
    "region_masses",
    "vickrey_table",
]
