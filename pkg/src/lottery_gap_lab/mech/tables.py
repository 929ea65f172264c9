"""
Explicit mechanism tables: allocation probabilities and payments per profile.

Purpose:
- per-agent views indexed by (own type, opponent profile)
- dominant-strategy IC and IR verification with witnesses
- reference tables (Vickrey, first price, posted price)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.common.numeric import (
    Number,
    as_array,
    is_rational,
    one,
    tolerance,
    total,
    zeros,
)
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.mech.lotteries import ItemPricing, menu_choices

_WITNESS_LIMIT = 10


@dataclass(frozen=True, eq=False)
class MechanismTable:
    """
    alloc: (P, n, m) probabilities q_ij(v); payments: (P, n) expected payments.
    Profiles follow TypeSpace enumeration order.
    """

    shape: tuple[int, ...]
    alloc: np.ndarray
    payments: np.ndarray
    mode: NumericMode

    def __post_init__(self) -> None:
        p = int(np.prod(self.shape))
        if self.alloc.ndim != 3 or self.alloc.shape[:2] != (p, len(self.shape)):
            raise ValidationError("alloc must be (profiles, agents, items)")
        if self.payments.shape != (p, len(self.shape)):
            raise ValidationError("payments must be (profiles, agents)")

    @classmethod
    def for_space(cls, ts: TypeSpace, alloc: Any, payments: Any) -> MechanismTable:
        return cls(ts.shape, as_array(alloc, ts.mode), as_array(payments, ts.mode), ts.mode)

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def m(self) -> int:
        return int(self.alloc.shape[2])

    def agent_view(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(T_i, R, m) allocation and (T_i, R) payments, R = flat opponent profile."""
        n, m = self.n, self.m
        a = self.alloc.reshape(*self.shape, n, m)[..., i, :]
        a = np.moveaxis(a, i, 0).reshape(self.shape[i], -1, m)
        pay = self.payments.reshape(*self.shape, n)[..., i]
        pay = np.moveaxis(pay, i, 0).reshape(self.shape[i], -1)
        return a, pay

    def revenue_per_profile(self) -> np.ndarray:
        return self.payments.sum(axis=1)

    def expected_revenue(self, ts: TypeSpace) -> Number:
        return total(ts.all_probs * self.revenue_per_profile(), self.mode)


@dataclass(frozen=True)
class ConstraintReport:
    name: str
    ok: bool
    violations: int
    checked: int
    witnesses: list[dict[str, Any]] = field(default_factory=list)


def _utility_cube(table: MechanismTable, ts: TypeSpace, i: int) -> tuple[np.ndarray, np.ndarray]:
    """U[s, r, t]: utility of true type t reporting s against opponents r; truthful[t, r]."""
    a, pay = table.agent_view(i)
    t_count, r_count, m = a.shape
    vals = ts.agents[i].values
    u = (a.reshape(t_count * r_count, m) @ vals.T).reshape(t_count, r_count, t_count)
    u = u - pay[:, :, None]
    idx = np.arange(t_count)
    truthful = u[idx, :, idx]
    return u, truthful


def _violation_tol(mode: NumericMode, scale: np.ndarray) -> Any:
    if is_rational(mode):
        return 0
    return tolerance(mode) * np.maximum(1.0, np.abs(scale.astype(float)))


def check_ic(table: MechanismTable, ts: TypeSpace) -> ConstraintReport:
    """Ex-post (dominant strategy) IC for every agent, opponent profile and report pair."""
    violations = 0
    checked = 0
    witnesses: list[dict[str, Any]] = []
    for i in range(ts.n):
        u, truthful = _utility_cube(table, ts, i)
        truth = truthful.T[None, :, :]
        gain = u - truth
        bad = np.asarray(gain > _violation_tol(table.mode, truth), dtype=bool)
        checked += gain.size
        violations += int(bad.sum())
        for s, r, t in np.argwhere(bad)[: _WITNESS_LIMIT - len(witnesses)]:
            witnesses.append(
                {
                    "agent": i,
                    "opponents": int(r),
                    "true_type": int(t),
                    "reported_type": int(s),
                    "gain": str(gain[s, r, t]),
                }
            )
    return ConstraintReport("ic", violations == 0, violations, checked, witnesses)


def check_ir(table: MechanismTable, ts: TypeSpace) -> ConstraintReport:
    violations = 0
    checked = 0
    witnesses: list[dict[str, Any]] = []
    for i in range(ts.n):
        _, truthful = _utility_cube(table, ts, i)
        bad = np.asarray(-truthful > _violation_tol(table.mode, truthful), dtype=bool)
        checked += truthful.size
        violations += int(bad.sum())
        for t, r in np.argwhere(bad)[: _WITNESS_LIMIT - len(witnesses)]:
            witnesses.append(
                {"agent": i, "opponents": int(r), "type": int(t), "utility": str(truthful[t, r])}
            )
    return ConstraintReport("ir", violations == 0, violations, checked, witnesses)


# =============================================================================
# REFERENCE TABLES
# =============================================================================
def _single_item(ts: TypeSpace) -> np.ndarray:
    if ts.m != 1:
        raise ValidationError("single-item auction tables need m == 1", {"m": ts.m})
    return ts.all_values[:, :, 0]


def _top_two(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Winner (highest value, lowest index on ties) and second-highest value per row."""
    winner = np.array([max(range(len(row)), key=lambda k, r=row: (r[k], -k)) for row in vals])
    second = []
    for row, w in zip(vals, winner, strict=True):
        rest = [row[k] for k in range(len(row)) if k != w]
        second.append(max(rest) if rest else 0 * row[w])
    return winner, np.array(second, dtype=vals.dtype)


def vickrey_table(ts: TypeSpace) -> MechanismTable:
    """Second-price auction; the highest positive bidder wins."""
    vals = _single_item(ts)
    p_count, n = vals.shape
    alloc = zeros((p_count, n, 1), ts.mode)
    pay = zeros((p_count, n), ts.mode)
    winner, second = _top_two(vals)
    for k in range(p_count):
        w = int(winner[k])
        if vals[k, w] > 0:
            alloc[k, w, 0] = one(ts.mode)
            pay[k, w] = second[k]
    return MechanismTable(ts.shape, alloc, pay, ts.mode)


def first_price_table(ts: TypeSpace) -> MechanismTable:
    """Highest bidder wins and pays its own bid (not truthful)."""
    vals = _single_item(ts)
    p_count, n = vals.shape
    alloc = zeros((p_count, n, 1), ts.mode)
    pay = zeros((p_count, n), ts.mode)
    winner, _ = _top_two(vals)
    for k in range(p_count):
        w = int(winner[k])
        if vals[k, w] > 0:
            alloc[k, w, 0] = one(ts.mode)
            pay[k, w] = vals[k, w]
    return MechanismTable(ts.shape, alloc, pay, ts.mode)


def posted_price_table(ts: TypeSpace, pricing: ItemPricing) -> MechanismTable:
    """Single agent facing an ItemPricing; outcome follows the global tie rule."""
    menu = pricing.as_menu().as_mode(ts.mode)
    choices = menu_choices(menu, ts)
    alloc = menu.q_matrix[choices][:, None, :]
    pay = menu.prices[choices][:, None]
    return MechanismTable(ts.shape, alloc, pay, ts.mode)
