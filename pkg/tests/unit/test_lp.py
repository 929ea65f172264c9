from __future__ import annotations

from fractions import Fraction

import pytest

from lottery_gap_lab.common.errors import SolverError, ValidationError
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.opt.lp import (
    BACKEND_EXACT,
    LinearProgram,
    residual,
    solve,
    to_lp_format,
)

R = NumericMode.rational
F = NumericMode.float


def _two_var_lp(mode: NumericMode) -> LinearProgram:
    lp = LinearProgram(name="toy", mode=mode)
    x = lp.add_var("x", obj=1)
    y = lp.add_var("y", obj=1)
    lp.add_le({x: 1, y: 2}, 4, name="c1")
    lp.add_le({x: 3, y: 1}, 6, name="c2")
    return lp


def test_exact_simplex_finds_rational_vertex() -> None:
    sol = solve(_two_var_lp(R))
    assert sol.backend == BACKEND_EXACT
    assert sol.exact
    assert sol.objective == Fraction(14, 5)
    assert sol.value("x") == Fraction(8, 5)
    assert sol.value("y") == Fraction(6, 5)
    assert sol.residual == 0


def test_float_mode_uses_highs() -> None:
    sol = solve(_two_var_lp(F))
    assert sol.objective == pytest.approx(2.8)
    assert not sol.exact


def test_equality_rows_recover_exact_vertex() -> None:
    lp = LinearProgram(name="eq", mode=R)
    x = lp.add_var("x", obj=2)
    y = lp.add_var("y", obj=1)
    lp.add_eq({x: 1, y: 1}, 1)
    lp.add_le({x: 1}, Fraction(3, 4))
    sol = solve(lp)
    assert sol.value("x") == Fraction(3, 4)
    assert sol.value("y") == Fraction(1, 4)
    assert sol.objective == Fraction(7, 4)
    assert residual(lp, list(sol.values)) == 0


def test_unbounded_lp_raises() -> None:
    lp = LinearProgram(name="unbounded", mode=R)
    lp.add_var("x", obj=1)
    with pytest.raises(SolverError):
        solve(lp)


def test_infeasible_lp_raises_in_float_mode() -> None:
    lp = LinearProgram(name="infeasible", mode=F)
    x = lp.add_var("x", obj=1)
    lp.add_le({x: 1}, -1)
    with pytest.raises(SolverError):
        solve(lp)


def test_duplicate_and_unknown_variables_rejected() -> None:
    lp = LinearProgram(mode=R)
    lp.add_var("x")
    with pytest.raises(ValidationError):
        lp.add_var("x")
    with pytest.raises(ValidationError):
        lp.add_le({5: 1}, 1)


def test_zero_coefficients_are_dropped() -> None:
    lp = LinearProgram(mode=R)
    x = lp.add_var("x")
    y = lp.add_var("y")
    lp.add_le({x: 1, y: 0}, 1)
    assert lp.rows == [{x: Fraction(1)}]


def test_lp_text_format() -> None:
    lp = _two_var_lp(R)
    lp.add_var("z", lower=None)
    text = to_lp_format(lp)
    lines = text.splitlines()
    assert lines[0] == "\\ toy"
    assert lines[1] == "Maximize"
    assert lines[2] == " obj: 1.0 x + 1.0 y"
    assert " c1: 1.0 x + 2.0 y <= 4.0" in lines
    assert " z free" in lines
    assert lines[-1] == "End"
