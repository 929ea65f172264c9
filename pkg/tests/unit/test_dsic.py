from __future__ import annotations

from fractions import Fraction

import pytest

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.dist.distributions import make_discrete
from lottery_gap_lab.dist.type_space import TypeSpace, product_type_space
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.feas.matroids import MatroidOracle
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.conversion import lottery_mech_feasibility_check, mechanism_to_lottery
from lottery_gap_lab.mech.tables import check_ic, check_ir
from lottery_gap_lab.opt.dsic import build_dsic_lp, optimal_dsic_lp
from lottery_gap_lab.opt.menus import optimal_menu_lp
from lottery_gap_lab.opt.myerson import myerson

R = NumericMode.rational


@pytest.fixture()
def two_bidders() -> TypeSpace:
    d = make_discrete([1, 2], [1, 1], R)
    return product_type_space([[d], [d]], R)


def test_dsic_lp_matches_myerson_on_single_item(two_bidders: TypeSpace) -> None:
    fs = FeasibilitySystem.single_item(2)
    table, sol = optimal_dsic_lp(two_bidders, fs)
    _, myerson_revenue = myerson(two_bidders, fs)
    assert sol.exact
    assert sol.objective == myerson_revenue == Fraction(3, 2)
    assert table.expected_revenue(two_bidders) == sol.objective
    assert check_ic(table, two_bidders).ok
    assert check_ir(table, two_bidders).ok
    assert lottery_mech_feasibility_check(table, fs, two_bidders).ok


def test_dsic_table_converts_to_lotteries(two_bidders: TypeSpace) -> None:
    table, _ = optimal_dsic_lp(two_bidders, FeasibilitySystem.single_item(2))
    lm = mechanism_to_lottery(table, two_bidders)
    assert lm.induced_table().expected_revenue(two_bidders) == Fraction(3, 2)


def test_single_agent_dsic_equals_menu_lp(two_item_space: TypeSpace) -> None:
    fs = FeasibilitySystem.matching(1, [1, 1])
    _, dsic = optimal_dsic_lp(two_item_space, fs)
    _, menu = optimal_menu_lp(two_item_space)
    assert dsic.objective == menu.objective


def test_general_matroid_rows(two_bidders: TypeSpace) -> None:
    fs = FeasibilitySystem.general(2, 1, MatroidOracle.uniform(2, 2))
    table, sol = optimal_dsic_lp(two_bidders, fs)
    # no shared constraint: two independent monopoly problems
    assert sol.objective == 2
    assert lottery_mech_feasibility_check(table, fs, two_bidders).ok


def test_dsic_lp_rejects_mismatched_feasibility(two_bidders: TypeSpace) -> None:
    with pytest.raises(ValidationError):
        build_dsic_lp(two_bidders, FeasibilitySystem.single_item(3))
