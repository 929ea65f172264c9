"""
Lottery-based mechanisms and the table -> lottery conversion.

Purpose:
- LotteryMechanism: per agent, one menu per opponent profile v_{-i}
- mechanism_to_lottery: IC/IR table -> equivalent lottery mechanism
- lottery_mech_feasibility_check: sum_{(i,j) in S} q_ij(v) <= r(S)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from lottery_gap_lab.common.errors import (
    CapacityError,
    ErrCode,
    IncentiveError,
    InvariantViolation,
)
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import is_rational, tolerance
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import FeasibilityKind
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.lotteries import Lottery, LotteryMenu, ProbabilityCap, choose_lotteries
from lottery_gap_lab.mech.tables import ConstraintReport, MechanismTable, check_ic, check_ir

log = get_project_logger()

_WITNESS_LIMIT = 10


@dataclass(frozen=True, eq=False)
class LotteryMechanism:
    """
    menus[i][r]: menu of agent i against flat opponent profile r.
    choices[p, i]: lottery index agent i buys at profile p.
    """

    ts: TypeSpace
    menus: tuple[tuple[LotteryMenu, ...], ...]
    choices: np.ndarray
    tie_conflicts: int = 0
    conflict_profiles: tuple[int, ...] = field(default=(), repr=False)

    @classmethod
    def from_menus(
        cls,
        ts: TypeSpace,
        menus: tuple[tuple[LotteryMenu, ...], ...],
        prefer: list[np.ndarray] | None = None,
    ) -> LotteryMechanism:
        """
        Best responses of every agent. prefer[i] is a (T_i, R) array of lottery
        indices that win ties when they are among the maximizers.
        """
        choices = np.empty((ts.num_profiles, ts.n), dtype=np.int64)
        conflicts = np.zeros(ts.num_profiles, dtype=bool)
        for i in range(ts.n):
            vals = ts.agents[i].values
            own, opp = ts.split_profiles(i)
            per = np.empty((vals.shape[0], len(menus[i])), dtype=np.int64)
            flag = np.zeros_like(per, dtype=bool)
            for r, menu in enumerate(menus[i]):
                pref = None if prefer is None else prefer[i][:, r]
                per[:, r], flag[:, r] = choose_lotteries(
                    menu.q_matrix, menu.prices, vals, ts.mode, pref
                )
            choices[:, i] = per[own, opp]
            conflicts |= flag[own, opp]
        idx = tuple(int(k) for k in np.flatnonzero(conflicts))
        return cls(ts, menus, choices, len(idx), idx)

    @classmethod
    def from_menu(cls, ts: TypeSpace, menu: LotteryMenu) -> LotteryMechanism:
        """Single agent facing a fixed menu."""
        return cls.from_menus(ts, ((menu.as_mode(ts.mode),),))

    def menu_for(self, profile: int, i: int) -> LotteryMenu:
        _, opp = self.ts.split_profiles(i)
        return self.menus[i][int(opp[profile])]

    def chosen(self, profile: int, i: int) -> Lottery:
        return self.menu_for(profile, i).lotteries[int(self.choices[profile, i])]

    def induced(self) -> tuple[np.ndarray, np.ndarray]:
        """(P, n, m) allocation q_ij(v) and (P, n) payments p_i(v)."""
        ts = self.ts
        alloc = np.empty((ts.num_profiles, ts.n, ts.m), dtype=object if is_rational(ts.mode) else float)
        pay = np.empty((ts.num_profiles, ts.n), dtype=alloc.dtype)
        for i in range(ts.n):
            _, opp = ts.split_profiles(i)
            for r, menu in enumerate(self.menus[i]):
                rows = np.flatnonzero(opp == r)
                picks = self.choices[rows, i]
                alloc[rows, i, :] = menu.q_matrix[picks]
                pay[rows, i] = menu.prices[picks]
        return alloc, pay

    def induced_table(self) -> MechanismTable:
        alloc, pay = self.induced()
        return MechanismTable(self.ts.shape, alloc, pay, self.ts.mode)


def mechanism_to_lottery(
    table: MechanismTable, ts: TypeSpace, cap: ProbabilityCap | None = None
) -> LotteryMechanism:
    """
    Menus {(q_i(v_-i, s), pi_i(v_-i, s)) : s} ∪ {null} per agent and opponent profile.
    The table's own outcome wins ties, so the induced table equals the input.
    """
    ic = check_ic(table, ts)
    if not ic.ok:
        raise IncentiveError(
            "mechanism table is not incentive compatible",
            {"violations": ic.violations, "witness": ic.witnesses[:1]},
        )
    ir = check_ir(table, ts)
    if not ir.ok:
        raise IncentiveError(
            "mechanism table is not individually rational",
            {"violations": ir.violations, "witness": ir.witnesses[:1]},
            code=ErrCode.NOT_INDIVIDUALLY_RATIONAL,
        )

    cap = cap or ProbabilityCap.unit(ts.m)
    menus: list[tuple[LotteryMenu, ...]] = []
    prefer: list[np.ndarray] = []
    for i in range(ts.n):
        a, pay = table.agent_view(i)
        t_count, r_count, _ = a.shape
        agent_menus = []
        pref = np.empty((t_count, r_count), dtype=np.int64)
        for r in range(r_count):
            entries = [(list(a[t, r]), pay[t, r]) for t in range(t_count)]
            raw = LotteryMenu.of(entries, ts.m, ts.mode, cap)
            own = raw.lotteries[len(raw) - t_count :]
            menu = _dedupe(raw)
            lookup = {(*lot.q, lot.p): k for k, lot in enumerate(menu.lotteries)}
            for t, lot in enumerate(own):
                pref[t, r] = lookup[(*lot.q, lot.p)]
            agent_menus.append(menu)
        menus.append(tuple(agent_menus))
        prefer.append(pref)

    lm = LotteryMechanism.from_menus(ts, tuple(menus), prefer)
    if lm.tie_conflicts:
        log.info(
            "tie_conflict_flagged",
            extra={"payload": {"profiles": lm.tie_conflicts, "first": list(lm.conflict_profiles[:5])}},
        )

    alloc, pay = lm.induced()
    if not _same(alloc, table.alloc, ts) or not _same(pay, table.payments, ts):
        raise InvariantViolation("lottery mechanism does not reproduce the table")
    return lm


def _dedupe(menu: LotteryMenu) -> LotteryMenu:
    """Null first, then distinct lotteries in first-seen order."""
    seen: set[tuple] = set()
    lots: list[Lottery] = []
    null = next(lot for lot in menu.lotteries if lot.is_null)
    for lot in (null, *menu.lotteries):
        key = (*lot.q, lot.p)
        if key in seen:
            continue
        seen.add(key)
        lots.append(lot)
    return LotteryMenu(tuple(lots), menu.mode, menu.cap)


def _same(a: np.ndarray, b: np.ndarray, ts: TypeSpace) -> bool:
    if is_rational(ts.mode):
        return bool(np.all(a == b))
    return bool(np.allclose(a.astype(float), b.astype(float), atol=tolerance(ts.mode), rtol=0))


# =============================================================================
# FEASIBILITY
# =============================================================================
def _alloc_of(mech: LotteryMechanism | MechanismTable) -> np.ndarray:
    if isinstance(mech, LotteryMechanism):
        return mech.induced()[0]
    return mech.alloc


def lottery_mech_feasibility_check(
    mech: LotteryMechanism | MechanismTable, fs: FeasibilitySystem, ts: TypeSpace
) -> ConstraintReport:
    """
    Rank constraints on every profile: exhaustive over dependent subsets when
    the ground is small, agent/item rows under the matching tag otherwise.
    """
    alloc = _alloc_of(mech)
    flat = alloc.reshape(alloc.shape[0], -1)
    tol = tolerance(ts.mode)

    rows: list[tuple[tuple[int, ...], int]] = []
    try:
        rows = list(fs.dependent_subsets)
    except CapacityError:
        if fs.kind is not FeasibilityKind.matching:
            raise
        m = fs.m
        rows = [(tuple(i * m + j for j in range(m)), 1) for i in range(fs.n)]
        rows += [(tuple(i * m + j for i in range(fs.n)), fs.capacities[j]) for j in range(m)]

    violations = 0
    witnesses: list[dict[str, Any]] = []
    bounds = np.asarray((flat < -tol) | (flat > 1 + tol), dtype=bool)
    violations += int(bounds.sum())
    for p, e in np.argwhere(bounds)[:_WITNESS_LIMIT]:
        witnesses.append({"profile": int(p), "subset": [int(e)], "sum": str(flat[p, e]), "rank": 1})

    for subset, r in rows:
        sums = flat[:, list(subset)].sum(axis=1)
        bad = np.asarray(sums > r + tol * len(subset), dtype=bool)
        count = int(bad.sum())
        violations += count
        for p in np.flatnonzero(bad)[: max(0, _WITNESS_LIMIT - len(witnesses))]:
            witnesses.append(
                {
                    "profile": int(p),
                    "subset": [list(fs.element(e)) for e in subset],
                    "sum": str(sums[p]),
                    "rank": r,
                }
            )
    checked = flat.shape[0] * (len(rows) + flat.shape[1])
    return ConstraintReport("feasibility", violations == 0, violations, checked, witnesses)
