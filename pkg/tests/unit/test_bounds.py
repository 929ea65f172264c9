from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from lottery_gap_lab.bounds import (
    additive_lift,
    argmax_sigma,
    build_A_L,
    build_copies,
    build_M2_M3,
    check_claim_A2_bounds,
    check_copies_bound,
    check_setting1,
    check_setting2,
    check_setting3,
    check_setting4,
    compute_A1_A2,
    myerson_vs_dsic_row,
)
from lottery_gap_lab.bounds.reports import GapReport, count_row, expectation_row, pointwise_row
from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.dist.distributions import make_discrete
from lottery_gap_lab.dist.type_space import (
    TypeSpace,
    additive_type_space,
    explicit_type_space,
    product_type_space,
)
from lottery_gap_lab.domain.enums import InequalityScope, NumericMode
from lottery_gap_lab.feas.matroids import MatroidOracle
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.conversion import LotteryMechanism
from lottery_gap_lab.mech.lotteries import ItemPricing
from lottery_gap_lab.mech.tables import vickrey_table

R = NumericMode.rational


@pytest.fixture()
def two_bidders() -> TypeSpace:
    d = make_discrete([1, 2], [1, 1], R)
    return product_type_space([[d], [d]], R)


@pytest.fixture()
def additive_space() -> TypeSpace:
    t0 = make_discrete([0, 1], [1, 1], R)
    t = make_discrete([1, 2], [1, 1], R)
    return additive_type_space([t0, t, t], R)


# =============================================================================
# report rows
# =============================================================================
def test_expectation_row_slack_and_ratio() -> None:
    row = expectation_row("x", Fraction(1), Fraction(4), R)
    assert row.passed
    assert row.slack == 3
    assert row.ratio == 0.25
    assert not expectation_row("y", Fraction(5), Fraction(4), R).passed


def test_pointwise_row_reports_worst_profile() -> None:
    lhs = np.array([Fraction(1), Fraction(3), Fraction(2)], dtype=object)
    rhs = np.array([Fraction(2), Fraction(2), Fraction(2)], dtype=object)
    values = np.arange(3).reshape(3, 1, 1)
    row = pointwise_row("p", lhs, rhs, values, R)
    assert not row.passed
    assert row.violations == 1
    assert (row.lhs, row.rhs, row.slack) == (3, 2, -1)
    assert row.witness_profile == [[1]]


def test_pointwise_row_with_empty_mask() -> None:
    lhs = np.array([Fraction(1)], dtype=object)
    row = pointwise_row("p", lhs, lhs, np.zeros((1, 1, 1)), R, mask=np.array([False]))
    assert row.passed
    assert row.note == "(no profiles)"


def test_gap_report_doc() -> None:
    report = GapReport("inst", 1)
    report.extend([expectation_row("a", Fraction(1, 3), Fraction(1), R), count_row("b", 2)])
    assert not report.passed
    assert [r.inequality for r in report.failures()] == ["b"]
    doc = report.to_doc()
    assert doc.rows[0].lhs == "1/3"
    assert doc.rows[1].scope is InequalityScope.pointwise
    with pytest.raises(KeyError):
        report.row("missing")


# =============================================================================
# copies and A^L
# =============================================================================
def test_copies_need_product_space() -> None:
    ts = explicit_type_space([[1, 2], [2, 1]], [1, 1], R)
    with pytest.raises(ValidationError):
        build_copies(ts)


def test_copies_profile_order_matches_parent(two_item_space: TypeSpace) -> None:
    ci = build_copies(two_item_space)
    assert ci.size == 2
    assert ci.is_single_sale()
    single = ci.single_item_space()
    assert np.all(single.all_values[:, :, 0] == two_item_space.all_values[:, 0, :])
    assert ci.myerson_single_sale_revenue() == Fraction(3, 2)
    _, full = ci.myerson()
    assert full == Fraction(3, 2)


def test_al_reproduces_pricing_revenue(two_item_space: TypeSpace) -> None:
    lm = LotteryMechanism.from_menu(two_item_space, ItemPricing.of([2, 2], R).as_menu())
    al = build_A_L(lm, build_copies(two_item_space))
    assert al.expected_revenue() == Fraction(3, 2)
    assert all(x >= 0 for x in al.payments.reshape(-1))


def test_al_shift_makes_cheapest_lottery_free(two_item_space: TypeSpace) -> None:
    lm = LotteryMechanism.from_menu(two_item_space, ItemPricing.of([1, 2], R).as_menu())
    al = build_A_L(lm)
    k = two_item_space.profile_index([3])
    # values (2, 2): the item-0 lottery costs 1 - 2 for pseudo-agent (0, 1)
    assert al.delta[k, 0, 1] == 1
    assert al.payments[k, 0, 1] == 0
    assert al.derived_menu(k, 0, 1) == [(0, 1), (0, 0), (1, 3)]


def test_al_rejects_foreign_copies(two_item_space: TypeSpace, single_item_space: TypeSpace) -> None:
    lm = LotteryMechanism.from_menu(two_item_space, ItemPricing.of([2, 2], R).as_menu())
    with pytest.raises(ValidationError):
        build_A_L(lm, build_copies(single_item_space))


def test_copies_bound_on_pricing(two_item_space: TypeSpace) -> None:
    lm = LotteryMechanism.from_menu(two_item_space, ItemPricing.of([2, 2], R).as_menu())
    al = build_A_L(lm)
    report = check_copies_bound(lm, al, argmax_sigma(two_item_space))
    assert report.passed
    assert {r.inequality for r in report.rows} == {
        "copies-bound-pointwise",
        "copies-bound-weak-pointwise",
        "copies-bound-expectation",
    }


def test_argmax_sigma_breaks_ties_low(two_item_space: TypeSpace) -> None:
    sigma = argmax_sigma(two_item_space)
    assert sigma[:, 0].tolist() == [0, 1, 0, 0]


def test_copies_bound_rejects_bad_sigma(two_item_space: TypeSpace) -> None:
    lm = LotteryMechanism.from_menu(two_item_space, ItemPricing.of([2, 2], R).as_menu())
    al = build_A_L(lm)
    with pytest.raises(ValidationError):
        check_copies_bound(lm, al, np.full((4, 1), 5))


# =============================================================================
# settings 1 and 2
# =============================================================================
def test_setting1_passes_on_two_items(two_item_space: TypeSpace) -> None:
    report = check_setting1(two_item_space, "s1")
    assert report.passed, [r.inequality for r in report.failures()]
    names = {r.inequality for r in report.rows}
    assert {"lottery-vs-2-myerson", "lottery-vs-4-pricing", "myerson-closed-form", "pricing-vs-lottery"} <= names
    assert report.metrics["pricing_revenue"] == Fraction(3, 2)
    assert report.metrics["myerson_copies"] == Fraction(3, 2)
    assert report.metrics["lottery_revenue"] >= Fraction(3, 2)


def test_setting1_with_given_menu(two_item_space: TypeSpace) -> None:
    menu = ItemPricing.of([2, 2], R).as_menu()
    report = check_setting1(two_item_space, menu=menu, include_pricing=False)
    assert report.passed
    assert report.metrics["lottery_revenue"] == Fraction(3, 2)
    assert "pricing-vs-lottery" not in {r.inequality for r in report.rows}


def test_setting1_needs_single_agent(two_bidders: TypeSpace) -> None:
    with pytest.raises(ValidationError):
        check_setting1(two_bidders)


def test_additive_lift_keeps_utilities(additive_space: TypeSpace) -> None:
    menu = ItemPricing.of([2, 2], R).as_menu()
    lifted, ts2 = additive_lift(menu, additive_space)
    assert len(lifted) == len(menu)
    assert lifted.lotteries[1].q == (1, 1, 0)
    assert lifted.cap.label == "lifted"
    assert ts2.num_profiles == additive_space.num_profiles == 8


def test_additive_lift_needs_additive_space(two_item_space: TypeSpace) -> None:
    with pytest.raises(ValidationError):
        additive_lift(ItemPricing.of([2, 2], R).as_menu(), two_item_space)


def test_setting2_passes(additive_space: TypeSpace) -> None:
    report = check_setting2(additive_space, "s2")
    assert report.passed, [r.inequality for r in report.failures()]
    assert report.row("lift-choice-identity").violations == 0
    names = {r.inequality for r in report.rows}
    assert {"lottery-vs-9-pricing", "lottery-vs-8-pricing", "factor8-combined"} <= names
    m = report.metrics
    assert m["opt_copies"] == m["rev_base"] + m["rev_items"]


# =============================================================================
# settings 3 and 4
# =============================================================================
def test_a1_a2_and_threshold_mechanisms() -> None:
    fs = FeasibilitySystem.single_item(2)
    values = [[3], [2]]
    a1, a2 = compute_A1_A2(values, fs)
    assert (a1, a2) == (frozenset({0}), frozenset({1}))
    out = build_M2_M3(a1, a2, fs, values)
    assert out.g1 == {1: 0}
    assert out.served2 == frozenset({0})
    assert out.revenue2 == 1
    assert out.unmapped == ()


def _threshold(a: int, g: dict[int, int], flat: list[Fraction]) -> Fraction:
    inverse = {target: e for e, target in g.items()}
    return flat[inverse[a]] / 2 if a in inverse else Fraction(0)


@pytest.mark.parametrize(
    "fs",
    [
        FeasibilitySystem.matching(2, [1, 1]),
        FeasibilitySystem.matching(3, [1, 2]),
        FeasibilitySystem.general(2, 2, MatroidOracle.uniform(4, 2)),
        FeasibilitySystem.general(3, 1, MatroidOracle.uniform(3, 2)),
    ],
    ids=["matching-2x2", "matching-3x2", "uniform-2x2", "uniform-3x1"],
)
def test_threshold_mechanisms_monotone_in_own_value(fs: FeasibilitySystem) -> None:
    rng = np.random.default_rng(17)
    for _ in range(15):
        values = [[Fraction(int(x)) for x in row] for row in rng.integers(0, 7, size=(fs.n, fs.m))]
        flat = [v for row in values for v in row]
        a1, a2 = compute_A1_A2(values, fs)
        base = build_M2_M3(a1, a2, fs, values, strict=False)
        for a in sorted(a1):
            for delta in (Fraction(1, 2), Fraction(3)):
                raised = [list(row) for row in values]
                i, j = divmod(a, fs.m)
                raised[i][j] += delta
                assert compute_A1_A2(raised, fs) == (a1, a2)
                out = build_M2_M3(a1, a2, fs, raised, strict=False)
                assert (out.g1, out.g2) == (base.g1, base.g2)
                pairs = (
                    (base.served2, out.served2, base.revenue2, out.revenue2, base.g1),
                    (base.served3, out.served3, base.revenue3, out.revenue3, base.g2),
                )
                for served, served_after, revenue, revenue_after, g in pairs:
                    threshold = _threshold(a, g, flat)
                    assert served_after - {a} == served - {a}
                    if a in served:
                        assert a in served_after
                        assert revenue_after == revenue
                    elif flat[a] + delta >= threshold:
                        assert a in served_after
                        assert revenue_after == revenue + threshold
                    else:
                        assert a not in served_after
                        assert revenue_after == revenue


def test_claim_a2_on_vickrey(two_bidders: TypeSpace) -> None:
    fs = FeasibilitySystem.single_item(2)
    report = check_claim_A2_bounds(vickrey_table(two_bidders), two_bidders, fs)
    assert report.setting == 3
    assert report.passed


def test_setting3_single_item(two_bidders: TypeSpace) -> None:
    report = check_setting3(two_bidders, FeasibilitySystem.single_item(2), "s3")
    assert report.passed, [r.inequality for r in report.failures()]
    assert report.row("derived-factor-setting3").lhs == Fraction(135, 4)
    assert report.row("mechanism-feasibility").violations == 0
    assert report.metrics["myerson_copies"] == Fraction(3, 2)
    assert report.metrics["lottery_revenue"] == Fraction(3, 2)


def test_setting4_uniform_matroid(two_bidders: TypeSpace) -> None:
    fs = FeasibilitySystem.general(2, 1, MatroidOracle.uniform(2, 1))
    report = check_setting4(two_bidders, fs, "s4")
    assert report.passed, [r.inequality for r in report.failures()]
    assert report.row("derived-factor-setting4").lhs == 40


def test_setting_tags_are_enforced(two_bidders: TypeSpace) -> None:
    general = FeasibilitySystem.general(2, 1, MatroidOracle.uniform(2, 1))
    with pytest.raises(ValidationError):
        check_setting3(two_bidders, general)
    with pytest.raises(ValidationError):
        check_setting4(two_bidders, FeasibilitySystem.single_item(2))


def test_myerson_matches_dsic_lp_on_copies(two_bidders: TypeSpace) -> None:
    report = check_setting3(two_bidders, FeasibilitySystem.single_item(2), "s3")
    row = report.row("myerson-vs-dsic-lp")
    assert row.passed
    assert row.lhs == row.rhs == Fraction(3, 2)


def test_myerson_vs_dsic_on_two_item_matching() -> None:
    d = make_discrete([1, 2], [1, 1], R)
    ts = product_type_space([[d, d], [d, d]], R)
    fs = FeasibilitySystem.matching(2, [1, 1])
    ci = build_copies(ts, fs)
    _, mye = ci.myerson()
    row = myerson_vs_dsic_row(ci, mye)
    assert row is not None
    assert row.passed, (row.lhs, row.rhs)
