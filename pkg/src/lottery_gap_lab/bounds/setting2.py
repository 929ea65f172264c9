"""
Additive values v_j = t_0 + t_j: lift to m+1 independent services and bound the menu.

Purpose:
- additive_lift: lottery (q, p) -> (sum q, q, p) over services 0..m; utilities unchanged
- check_setting2: factor-9 chain through the lifted copies, factor-8 split on the
  pseudo-agent with the highest t, and the comparison with optimal item pricing
"""

from __future__ import annotations

import numpy as np

from lottery_gap_lab.bounds.al_mechanism import build_A_L
from lottery_gap_lab.bounds.copies import build_copies
from lottery_gap_lab.bounds.reports import (
    GapReport,
    count_row,
    equality_row,
    expectation_row,
    pointwise_row,
)
from lottery_gap_lab.bounds.setting1 import argmax_sigma, copies_bound_rows
from lottery_gap_lab.common.errors import CapacityError, InvariantViolation, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import Number, is_rational, tolerance, total, to_number
from lottery_gap_lab.dist.type_space import TypeSpace, product_type_space
from lottery_gap_lab.domain.enums import Structure
from lottery_gap_lab.mech.conversion import LotteryMechanism
from lottery_gap_lab.mech.lotteries import Lottery, LotteryMenu, ProbabilityCap
from lottery_gap_lab.opt.menus import optimal_menu_lp
from lottery_gap_lab.opt.myerson import monopoly_price, myerson_single_item_revenue, vickrey_per_profile
from lottery_gap_lab.opt.pricing import optimal_pricing_exact

log = get_project_logger()


def additive_lift(menu: LotteryMenu, ts: TypeSpace) -> tuple[LotteryMenu, TypeSpace]:
    """
    Lifted menu over services 0..m and the product space of (t_0, ..., t_m).
    Profile k of the lifted space is type k of ts.
    """
    if ts.structure is not Structure.additive or ts.base_dists is None:
        raise ValidationError("additive_lift needs an additive type space", {"structure": ts.structure.value})
    menu = menu.as_mode(ts.mode)
    if menu.m != ts.m:
        raise ValidationError("menu and type space disagree on item count", {"menu": menu.m, "items": ts.m})

    lifted_lots = []
    for lot in menu.lotteries:
        q0 = sum(lot.q, 0 * lot.p)
        lifted_lots.append(Lottery((q0, *lot.q), lot.p))
    lifted = LotteryMenu.of(lifted_lots, ts.m + 1, ts.mode, ProbabilityCap.lifted(ts.m + 1))
    if len(lifted) != len(menu):
        raise InvariantViolation("lifted menu lost or gained lotteries")

    ts2 = product_type_space([list(ts.base_dists)], ts.mode, max_profiles=ts.max_profiles)
    bases = ts.agents[0].bases
    t_vals = ts2.agents[0].values
    if not _same(bases, t_vals, ts):
        raise InvariantViolation("lifted profile order differs from the additive type order")

    u = ts.agents[0].values @ menu.q_matrix.T - menu.prices
    u2 = t_vals @ lifted.q_matrix.T - lifted.prices
    if not _same(u, u2, ts):
        raise InvariantViolation("lifted utilities differ from the additive utilities")
    return lifted, ts2


def _same(a: np.ndarray, b: np.ndarray, ts: TypeSpace) -> bool:
    if is_rational(ts.mode):
        return bool(np.all(a == b))
    return bool(np.allclose(a.astype(float), b.astype(float), atol=tolerance(ts.mode), rtol=0))


def check_setting2(
    ts: TypeSpace,
    instance_id: str = "adhoc",
    menu: LotteryMenu | None = None,
    include_pricing: bool = True,
) -> GapReport:
    """Single agent with additive values v_j = t_0 + t_j and independent t."""
    mode = ts.mode
    lp_menu = menu is None
    if menu is None:
        menu, _ = optimal_menu_lp(ts)
    lifted, ts2 = additive_lift(menu, ts)
    lm = LotteryMechanism.from_menu(ts, menu)
    lm2 = LotteryMechanism.from_menu(ts2, lifted)
    report = GapReport(instance_id, 2)
    probs = ts2.all_probs

    revenue = lm.induced()[1][:, 0]
    revenue2 = lm2.induced()[1][:, 0]
    e_rev = total(probs * revenue, mode)
    moved = int(np.count_nonzero(lm.choices[:, 0] != lm2.choices[:, 0]))
    report.extend(
        [
            equality_row("lift-revenue-identity", e_rev, total(probs * revenue2, mode), mode),
            count_row("lift-choice-identity", moved, "types buying a different lottery after the lift"),
        ]
    )

    # factor 9: copies of the lifted instance
    ci2 = build_copies(ts2)
    al = build_A_L(lm2, ci2)
    sigma = argmax_sigma(ts2)
    report.extend(copies_bound_rows(al, sigma, prefix="lifted-copies"))

    values = ts2.all_values
    t = values[:, 0, :]
    second = vickrey_per_profile(t, mode)
    top = sigma[:, 0]
    base_wins = top == 0
    z = 0 * second
    v_base = np.where(base_wins, second, z)
    v_items = np.where(base_wins, z, second)
    pay = al.payments[:, 0, :]
    al_base = pay[:, 0]
    al_items = pay[:, 1:].sum(axis=1)
    al_total = al_base + al_items
    al_top = pay[np.arange(len(top)), top]
    two = to_number(2, mode)

    e_al = total(probs * al_total, mode)
    e_vickrey = total(probs * second, mode)
    rev_base = monopoly_price(ts.base_dists[0])[1]
    rev_items = myerson_single_item_revenue(list(ts.base_dists[1:]))
    opt_copies = rev_base + rev_items

    report.extend(
        [
            pointwise_row(
                "lifted-lottery-vs-al-plus-2vickrey-pointwise", revenue2, al_total + two * second, values, mode
            ),
            expectation_row("lifted-lottery-vs-al-plus-2vickrey", e_rev, e_al + two * e_vickrey, mode),
            expectation_row("al-lifted-vs-opt-copies", e_al, opt_copies, mode, "OPT' = Rev_0 + Rev_-0"),
            expectation_row("vickrey-lifted-vs-opt-copies", e_vickrey, opt_copies, mode),
            expectation_row("lifted-lottery-vs-3-opt-copies", e_rev, 3 * opt_copies, mode),
        ]
    )

    # factor 8: split on the pseudo-agent with the highest t
    e_al_base = total(probs * al_base, mode)
    e_al_items = total(probs * al_items, mode)
    e_v_base = total(probs * v_base, mode)
    e_v_items = total(probs * v_items, mode)
    report.extend(
        [
            pointwise_row(
                "factor8-base-max", revenue2, al_base + second, values, mode, "t_0 highest", mask=base_wins
            ),
            pointwise_row(
                "factor8-item-max", revenue2, al_top + two * second, values, mode, "some t_j highest", mask=~base_wins
            ),
            pointwise_row("factor8-combined", revenue2, al_total + v_base + two * v_items, values, mode),
            expectation_row("al-base-vs-monopoly", e_al_base, rev_base, mode),
            expectation_row("vickrey-base-vs-monopoly", e_v_base, rev_base, mode),
            expectation_row("al-items-vs-myerson", e_al_items, rev_items, mode),
            expectation_row("vickrey-items-vs-myerson", e_v_items, rev_items, mode),
            expectation_row("lottery-vs-2rev0-plus-3rev-0", e_rev, two * rev_base + 3 * rev_items, mode),
        ]
    )

    metrics: dict[str, Number] = {
        "lottery_revenue": e_rev,
        "al_revenue": e_al,
        "al_base": e_al_base,
        "al_items": e_al_items,
        "vickrey_revenue": e_vickrey,
        "vickrey_base": e_v_base,
        "vickrey_items": e_v_items,
        "rev_base": rev_base,
        "rev_items": rev_items,
        "opt_copies": opt_copies,
        "menu_size": len(menu),
    }

    if include_pricing:
        try:
            pricing, price_rev = optimal_pricing_exact(ts)
        except CapacityError as e:
            log.warning("pricing_skipped", extra={"payload": {"instance_id": instance_id, **(e.details or {})}})
        else:
            report.extend(
                [
                    expectation_row("monopoly-base-vs-pricing", rev_base, price_rev, mode),
                    expectation_row("myerson-items-vs-2-pricing", rev_items, two * price_rev, mode),
                    expectation_row("opt-copies-vs-3-pricing", opt_copies, 3 * price_rev, mode),
                    expectation_row("lottery-vs-9-pricing", e_rev, 9 * price_rev, mode),
                    expectation_row("lottery-vs-8-pricing", e_rev, 8 * price_rev, mode),
                ]
            )
            if lp_menu:
                report.rows.append(
                    expectation_row("pricing-vs-lottery", price_rev, e_rev, mode, "menus contain every pricing")
                )
            metrics["pricing_revenue"] = price_rev
            for j, p in enumerate(pricing.prices):
                metrics[f"price_item_{j}"] = p
            if price_rev > 0:
                metrics["lottery_over_pricing"] = float(e_rev) / float(price_rev)

    report.metrics = metrics
    log.info(
        "instance_checked",
        extra={"payload": {"instance_id": instance_id, "setting": 2, "passed": report.passed}},
    )
    return report
