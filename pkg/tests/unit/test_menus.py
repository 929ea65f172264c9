from __future__ import annotations

from fractions import Fraction

import pytest

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.dist.distributions import make_discrete
from lottery_gap_lab.dist.type_space import TypeSpace, explicit_type_space, product_type_space
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.mech.lotteries import ItemPricing, ProbabilityCap, menu_revenue, pricing_revenue
from lottery_gap_lab.opt.lp import to_lp_format
from lottery_gap_lab.opt.menus import build_menu_lp, merged_types, optimal_menu_lp, optimal_menu_revenue

R = NumericMode.rational


def test_single_item_menu_matches_monopoly_price(single_item_space: TypeSpace) -> None:
    menu, sol = optimal_menu_lp(single_item_space)
    assert sol.exact
    assert sol.objective == Fraction(4, 3)
    assert menu_revenue(menu, single_item_space) == Fraction(4, 3)
    assert menu.lotteries[0].is_null


def test_menu_revenue_equals_lp_objective(two_item_space: TypeSpace) -> None:
    menu, sol = optimal_menu_lp(two_item_space)
    assert sol.exact
    assert menu_revenue(menu, two_item_space) == sol.objective
    assert sol.objective >= pricing_revenue(ItemPricing.of([2, 2], R), two_item_space)


def test_menu_never_exceeds_full_surplus(two_item_space: TypeSpace) -> None:
    # E[max_j v_j] = 1/4 * 1 + 3/4 * 2
    assert optimal_menu_revenue(two_item_space) <= Fraction(7, 4)


def test_merged_types_sum_duplicate_mass() -> None:
    ts = explicit_type_space([[1, 2], [1, 2], [3, 0]], [1, 1, 2], R)
    types, probs = merged_types(ts)
    assert types == [(Fraction(1), Fraction(2)), (Fraction(3), Fraction(0))]
    assert probs == [Fraction(1, 2), Fraction(1, 2)]


def test_menu_lp_rejects_multiple_agents() -> None:
    d = make_discrete([1, 2], [1, 1], R)
    with pytest.raises(ValidationError):
        build_menu_lp(product_type_space([[d], [d]], R))


def test_lifted_cap_rows() -> None:
    d = make_discrete([1, 2], [1, 1], R)
    ts = product_type_space([[d, d, d]], R)
    built = build_menu_lp(ts, ProbabilityCap.lifted(3))
    text = to_lp_format(built.lp)
    assert " cap_0_0: 1.0 q_0_0 <= 1.0" in text
    assert " cap_0_1: 1.0 q_0_1 + 1.0 q_0_2 <= 1.0" in text
    lifted = optimal_menu_revenue(ts, ProbabilityCap.lifted(3))
    assert lifted >= optimal_menu_revenue(ts)
