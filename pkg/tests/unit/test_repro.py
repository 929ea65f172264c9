from __future__ import annotations

from fractions import Fraction

import pytest

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.services.repro import (
    APPENDIX_COPIES_BOUND,
    appendix_menu,
    refinement_grids,
    repro_appendix,
    repro_uniform56,
)


def test_appendix_menu_prices() -> None:
    menu = appendix_menu(8, NumericMode.rational)
    assert menu.lotteries[0].is_null
    assert menu.lotteries[1].q == (Fraction(1, 2), Fraction(1, 2))
    assert menu.lotteries[1].p == Fraction(5, 2)
    assert [lot.p for lot in menu.lotteries[2:]] == [5, 5]


def test_refinement_grids() -> None:
    assert refinement_grids(16) == [2, 4, 8, 16]
    assert refinement_grids(3) == [1, 3]


def test_appendix_small_grid() -> None:
    doc = repro_appendix(16, 8)
    assert doc.passed
    assert sum(doc.region_masses.values()) == pytest.approx(1.0)
    assert set(doc.checks) == {"masses_sum_to_one", "myerson_within_copies_bound"}
    assert doc.copies_upper_bound == APPENDIX_COPIES_BOUND
    assert [p.grid for p in doc.refinement] == [1, 2, 4, 8]
    assert doc.refinement[-1].menu_revenue == doc.menu_revenue
    assert len(doc.menu) == 4


def test_appendix_rational_matches_float() -> None:
    exact = repro_appendix(4, 2, NumericMode.rational, refine=False)
    approx = repro_appendix(4, 2, NumericMode.float, refine=False)
    assert exact.menu_revenue == pytest.approx(approx.menu_revenue)
    assert exact.refinement == []
    assert exact.refinement_monotone is None


def test_appendix_rejects_small_bound() -> None:
    with pytest.raises(ValidationError):
        repro_appendix(1, 4)


def test_uniform56_coarse_grid() -> None:
    doc = repro_uniform56("0.1", lp_step="0.5")
    assert 5 <= doc.symmetric_price <= 6
    assert "symmetric_price_in_window" not in doc.checks
    assert doc.checks["lp_menu_dominates_augmented"]
    assert "lottery_improves_pricing" in doc.checks
    assert sum(doc.region_masses.values()) == pytest.approx(1.0)
    assert doc.lp_menu_size >= 1
