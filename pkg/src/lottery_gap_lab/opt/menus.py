"""
Revenue-optimal lottery menu for a single unit-demand agent.

Purpose:
- one (q_t, p_t) per distinct type, IC and IR rows, probability-cap rows
- exact optimum in rational mode whenever the LP layer can certify one
- menu extraction (distinct lotteries, null first) and exact revenue
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import Number, is_rational, rationalize, zero
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.mech.lotteries import (
    Lottery,
    LotteryMenu,
    ProbabilityCap,
    menu_revenue,
    null_lottery,
)
from lottery_gap_lab.opt.lp import STATUS_RATIONALIZED, LinearProgram, LpSolution, solve

log = get_project_logger()


@dataclass(frozen=True)
class MenuLp:
    lp: LinearProgram
    types: tuple[tuple[Number, ...], ...]
    probs: tuple[Number, ...]
    cap: ProbabilityCap


def merged_types(ts: TypeSpace) -> tuple[list[tuple[Number, ...]], list[Number]]:
    """Distinct valuation vectors (first-seen order) with summed probability."""
    if ts.n != 1:
        raise ValidationError("menu LP needs a single-agent type space", {"n": ts.n})
    agent = ts.agents[0]
    mass: dict[tuple[Number, ...], Number] = {}
    for row, p in zip(agent.values, agent.probs, strict=True):
        key = tuple(row.tolist())
        mass[key] = mass.get(key, zero(ts.mode)) + p
    types = [t for t, p in mass.items() if p > 0]
    return types, [mass[t] for t in types]


def build_menu_lp(ts: TypeSpace, cap: ProbabilityCap | None = None) -> MenuLp:
    types, probs = merged_types(ts)
    limit = get_settings().lp_type_cap
    if len(types) > limit:
        raise CapacityError("too many types for the menu LP", {"types": len(types), "cap": limit})
    m = ts.m
    cap = cap or ProbabilityCap.unit(m)

    lp = LinearProgram(name="optimal_menu", mode=ts.mode)
    q = [[lp.add_var(f"q_{t}_{j}", lower=0) for j in range(m)] for t in range(len(types))]
    p = [lp.add_var(f"p_{t}", lower=None, obj=probs[t]) for t in range(len(types))]

    for t, vt in enumerate(types):
        # IR: p_t - q_t.v_t <= 0
        ir = {q[t][j]: -vt[j] for j in range(m)}
        ir[p[t]] = 1
        lp.add_le(ir, 0, name=f"ir_{t}")
        for s in range(len(types)):
            if s == t:
                continue
            # IC: q_s.v_t - p_s - q_t.v_t + p_t <= 0
            row: dict[int, Number] = {}
            for j in range(m):
                row[q[s][j]] = vt[j]
                row[q[t][j]] = -vt[j]
            row[p[s]] = -1
            row[p[t]] = 1
            lp.add_le(row, 0, name=f"ic_{t}_{s}")
        for g, group in enumerate(cap.groups):
            lp.add_le({q[t][j]: 1 for j in group}, 1, name=f"cap_{t}_{g}")
    return MenuLp(lp, tuple(types), tuple(probs), cap)


def _clean_lottery(
    qs: list[Number], price: Number, cap: ProbabilityCap, mode: NumericMode, rescale: bool
) -> Lottery:
    if not is_rational(mode):
        qs = [max(0.0, float(x)) for x in qs]
    elif rescale:
        qs = [max(Fraction(0), rationalize(x)) for x in qs]
        price = rationalize(price)
    for group in cap.groups:
        s = sum((qs[j] for j in group), zero(mode))
        if s > 1:
            for j in group:
                qs[j] = qs[j] / s
    return Lottery(tuple(qs), price)


def optimal_menu_lp(ts: TypeSpace, cap: ProbabilityCap | None = None) -> tuple[LotteryMenu, LpSolution]:
    """
    LP-optimal menu. The returned menu always has the null lottery first;
    its exact revenue is menu_revenue(menu, ts).
    """
    built = build_menu_lp(ts, cap)
    sol = solve(built.lp, ts.mode)
    m = ts.m
    rescale = sol.status == STATUS_RATIONALIZED

    seen: set[Lottery] = set()
    lotteries: list[Lottery] = [null_lottery(m, ts.mode)]
    for t in range(len(built.types)):
        qs = [sol.value(f"q_{t}_{j}") for j in range(m)]
        lot = _clean_lottery(qs, sol.value(f"p_{t}"), built.cap, ts.mode, rescale)
        if lot.is_null or lot in seen:
            continue
        seen.add(lot)
        lotteries.append(lot)
    menu = LotteryMenu.of(lotteries, m, ts.mode, built.cap)

    log.info(
        "menu_lp_solved",
        extra={
            "payload": {
                "types": len(built.types),
                "items": m,
                "cap": built.cap.label,
                "lotteries": len(menu),
                "status": sol.status,
                "objective": float(sol.objective),
            }
        },
    )
    return menu, sol


def optimal_menu_revenue(ts: TypeSpace, cap: ProbabilityCap | None = None) -> Number:
    menu, _ = optimal_menu_lp(ts, cap)
    return menu_revenue(menu, ts)
