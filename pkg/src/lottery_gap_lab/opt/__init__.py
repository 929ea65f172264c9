"""Optimal mechanisms: LP menus, DSIC LP, item pricing, Myerson and Vickrey."""

from lottery_gap_lab.opt.dsic import build_dsic_lp, optimal_dsic_lp
from lottery_gap_lab.opt.lp import LinearProgram, LpSolution, solve, to_lp_format
from lottery_gap_lab.opt.menus import build_menu_lp, optimal_menu_lp, optimal_menu_revenue
from lottery_gap_lab.opt.myerson import (
    VirtualValueTable,
    expected_vickrey,
    monopoly_price,
    myerson,
    myerson_single_item_revenue,
    vickrey,
    virtual_values,
)
from lottery_gap_lab.opt.pricing import (
    optimal_pricing_by_assignment,
    optimal_pricing_exact,
    optimal_symmetric_price,
    pricing_grid_search,
)

__all__ = [
    "LinearProgram",
    "LpSolution",
    "VirtualValueTable",
    "build_dsic_lp",
    "build_menu_lp",
    "expected_vickrey",
    "monopoly_price",
    "myerson",
    "myerson_single_item_revenue",
    "optimal_dsic_lp",
    "optimal_menu_lp",
    "optimal_menu_revenue",
    "optimal_pricing_by_assignment",
    "optimal_pricing_exact",
    "optimal_symmetric_price",
    "pricing_grid_search",
    "solve",
    "to_lp_format",
    "vickrey",
    "virtual_values",
]
