from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.dist.distributions import make_discrete
from lottery_gap_lab.dist.type_space import TypeSpace, product_type_space
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.feas.matroids import MatroidOracle
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.tables import check_ic, check_ir, vickrey_table
from lottery_gap_lab.opt.myerson import (
    expected_vickrey,
    monopoly_price,
    myerson,
    myerson_single_item_revenue,
    vickrey,
    virtual_value_rows,
    virtual_values,
)

R = NumericMode.rational


def test_regular_virtual_values() -> None:
    d = make_discrete([1, 2, 3], [1, 1, 1], R)
    table = virtual_values(d)
    assert table.phi == (-1, 1, 3)
    assert table.phi_bar == table.phi
    assert table.ironed_intervals == []
    assert table.phi_bar_of(2) == 1
    with pytest.raises(ValidationError):
        table.phi_bar_of(Fraction(5, 2))


def test_ironing_flattens_non_monotone_virtual_values() -> None:
    d = make_discrete([1, 2, 3], [4, 1, 5], R)
    table = virtual_values(d)
    assert table.phi == (Fraction(-1, 2), -3, 3)
    assert table.phi_bar == (-1, -1, 3)
    assert table.ironed_intervals == [(0, 1)]


def test_ironed_envelope_dominates_revenue_curve() -> None:
    rng = np.random.default_rng(5)
    for _ in range(80):
        size = int(rng.integers(2, 7))
        support = sorted(int(x) for x in rng.choice(np.arange(1, 13), size=size, replace=False))
        d = make_discrete(support, [int(x) for x in rng.integers(1, 7, size=size)], R)
        table = virtual_values(d)
        f = list(d.probs)
        s = list(d.survival_array)
        assert all(a <= b for a, b in zip(table.phi_bar, table.phi_bar[1:]))

        interior = {k for a, b in table.ironed_intervals for k in range(a + 1, b + 1)}
        envelope = Fraction(0)
        for k in range(size - 1, -1, -1):
            envelope += table.phi_bar[k] * f[k]
            curve = d.support[k] * s[k]
            assert envelope >= curve
            if k not in interior:
                assert envelope == curve


def test_monopoly_price() -> None:
    assert monopoly_price(make_discrete([1, 2, 3], [1, 1, 1], R)) == (2, Fraction(4, 3))
    assert monopoly_price(make_discrete([1, 2, 3], [4, 1, 5], R)) == (3, Fraction(3, 2))


def test_single_bidder_myerson_is_monopoly() -> None:
    d = make_discrete([1, 2, 3], [1, 1, 1], R)
    assert myerson_single_item_revenue([d]) == Fraction(4, 3)


def test_vickrey_helpers() -> None:
    assert vickrey([3, 1, 2]) == 2
    assert vickrey([5]) == 0
    assert vickrey([3, 0]) == 0
    d = make_discrete([1, 2], [1, 1], R)
    assert expected_vickrey([d, d]) == Fraction(5, 4)


@pytest.fixture()
def two_bidders() -> TypeSpace:
    d = make_discrete([1, 2], [1, 1], R)
    return product_type_space([[d], [d]], R)


def test_myerson_table_on_two_bidders(two_bidders: TypeSpace) -> None:
    table, revenue = myerson(two_bidders, FeasibilitySystem.single_item(2))
    assert revenue == Fraction(3, 2)
    assert table.expected_revenue(two_bidders) == revenue
    assert check_ic(table, two_bidders).ok
    assert check_ir(table, two_bidders).ok
    d = two_bidders.item_marginal(0, 0)
    assert myerson_single_item_revenue([d, d]) == revenue
    assert revenue > vickrey_table(two_bidders).expected_revenue(two_bidders)


def test_myerson_zero_virtual_value_wins_greedily(two_bidders: TypeSpace) -> None:
    table, _ = myerson(two_bidders, FeasibilitySystem.single_item(2))
    # both bidders at value 1 have virtual value 0; bidder 0 is added and pays 1
    assert table.alloc[0, 0, 0] == 1
    assert table.payments[0, 0] == 1
    assert table.alloc[0, 1, 0] == 0


def test_myerson_under_rank_two_matroid(two_bidders: TypeSpace) -> None:
    fs = FeasibilitySystem.general(2, 1, MatroidOracle.uniform(2, 2))
    table, revenue = myerson(two_bidders, fs)
    # no competition: each bidder faces its own monopoly problem
    assert revenue == 2
    assert check_ic(table, two_bidders).ok


def test_myerson_needs_single_item(two_item_space: TypeSpace) -> None:
    with pytest.raises(ValidationError):
        myerson(two_item_space, FeasibilitySystem.single_item(1))


def test_virtual_value_rows(single_item_space: TypeSpace) -> None:
    rows = virtual_value_rows(single_item_space)
    assert [r["phi"] for r in rows] == [-1, 1, 3]
    assert {r["agent"] for r in rows} == {0}
