"""
Copies bound and the single-agent lottery-versus-pricing chain.

Purpose:
- copies_bound_rows: Rev[M^L](v) against A^L on the pseudo-agents picked by a
  unit-demand allocation function plus welfare q_ij v_ij on the rest
- check_setting1: optimal menu vs A^L + Vickrey, 2 x Myerson(copies) and 4 x optimal pricing
"""

from __future__ import annotations

import numpy as np

from lottery_gap_lab.bounds.al_mechanism import ALRecord, build_A_L
from lottery_gap_lab.bounds.copies import CopiesInstance, build_copies
from lottery_gap_lab.bounds.reports import (
    GapReport,
    InequalityRow,
    equality_row,
    expectation_row,
    pointwise_row,
)
from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import Number, total, to_number
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.mech.conversion import LotteryMechanism
from lottery_gap_lab.mech.lotteries import LotteryMenu
from lottery_gap_lab.opt.menus import optimal_menu_lp
from lottery_gap_lab.opt.myerson import vickrey_per_profile
from lottery_gap_lab.opt.pricing import optimal_pricing_exact

log = get_project_logger()

FULL_MYERSON_PROFILES = 4096


# =============================================================================
# allocation functions
# =============================================================================
def argmax_sigma(ts: TypeSpace) -> np.ndarray:
    """(P, n): each agent's highest-valued item, lowest index on ties."""
    values = ts.all_values
    p_count, n, m = values.shape
    out = np.empty((p_count, n), dtype=np.int64)
    for k in range(p_count):
        for i in range(n):
            row = values[k, i]
            out[k, i] = max(range(m), key=lambda j, r=row: (r[j], -j))
    return out


def _sigma_mask(sigma: np.ndarray, m: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.ndim != 2 or (sigma >= m).any() or (sigma < -1).any():
        raise ValidationError("allocation function must give one item or -1 per agent and profile")
    mask = np.zeros((*sigma.shape, m), dtype=bool)
    k, i = np.nonzero(sigma >= 0)
    mask[k, i, sigma[k, i]] = True
    return mask


# =============================================================================
# copies bound
# =============================================================================
def copies_bound_rows(al: ALRecord, sigma: np.ndarray, prefix: str = "copies") -> list[InequalityRow]:
    """
    Per profile: Rev[M^L](v) <= sum over sigma of A^L payments + sum off sigma of q_ij v_ij,
    its weaker form with the whole A^L revenue, and the expectation of the first.
    sigma[k, i] is the item picked for agent i at profile k, or -1 for none.
    """
    lm = al.lm
    ts = lm.ts
    mode = ts.mode
    values = ts.all_values
    p_count = ts.num_profiles
    alloc, pay = lm.induced()
    mask = _sigma_mask(sigma, ts.m)
    if mask.shape[:2] != (p_count, ts.n):
        raise ValidationError("allocation function shape disagrees with the type space")

    revenue = pay.sum(axis=1)
    welfare = alloc * values
    picked = np.where(mask, al.payments, 0 * welfare).reshape(p_count, -1).sum(axis=1)
    rest = np.where(mask, 0 * welfare, welfare).reshape(p_count, -1).sum(axis=1)
    strong = picked + rest
    weak = al.revenue_per_profile() + rest
    probs = ts.all_probs
    return [
        pointwise_row(f"{prefix}-bound-pointwise", revenue, strong, values, mode),
        pointwise_row(f"{prefix}-bound-weak-pointwise", revenue, weak, values, mode),
        expectation_row(
            f"{prefix}-bound-expectation", total(probs * revenue, mode), total(probs * strong, mode), mode
        ),
    ]


def check_copies_bound(
    lm: LotteryMechanism, al: ALRecord, sigma: np.ndarray, instance_id: str = "adhoc", setting: int = 0
) -> GapReport:
    if al.lm is not lm:
        raise ValidationError("A^L record belongs to another lottery mechanism")
    report = GapReport(instance_id, setting)
    report.extend(copies_bound_rows(al, sigma))
    return report


# =============================================================================
# setting 1
# =============================================================================
def myerson_copies_revenue(ci: CopiesInstance, report: GapReport | None = None) -> Number:
    """
    Closed form E[max phi_bar^+] for single-sale copies; the full threshold
    mechanism is also run when the copies space is small and compared.
    """
    fast = ci.myerson_single_sale_revenue()
    if report is not None and ci.parent.num_profiles <= FULL_MYERSON_PROFILES:
        _, full = ci.myerson()
        report.rows.append(
            equality_row("myerson-closed-form", fast, full, ci.parent.mode, "threshold mechanism vs E[max phi_bar+]")
        )
    return fast


def check_setting1(
    ts: TypeSpace,
    instance_id: str = "adhoc",
    menu: LotteryMenu | None = None,
    include_pricing: bool = True,
) -> GapReport:
    """Single unit-demand agent with independent item values."""
    if ts.n != 1:
        raise ValidationError("setting 1 has a single agent", {"n": ts.n})
    mode = ts.mode
    ci = build_copies(ts)
    lp_menu = menu is None
    if menu is None:
        menu, _ = optimal_menu_lp(ts)
    lm = LotteryMechanism.from_menu(ts, menu)
    al = build_A_L(lm, ci)
    report = GapReport(instance_id, 1)

    sigma = argmax_sigma(ts)
    report.extend(copies_bound_rows(al, sigma))

    values = ts.all_values
    probs = ts.all_probs
    revenue = lm.induced()[1].sum(axis=1)
    al_rev = al.revenue_per_profile()
    second = vickrey_per_profile(values[:, 0, :], mode)
    e_rev = total(probs * revenue, mode)
    e_al = total(probs * al_rev, mode)
    e_vickrey = total(probs * second, mode)
    mye = myerson_copies_revenue(ci, report)
    two = to_number(2, mode)

    report.extend(
        [
            pointwise_row("lottery-vs-al-plus-vickrey-pointwise", revenue, al_rev + second, values, mode),
            expectation_row("lottery-vs-al-plus-vickrey", e_rev, e_al + e_vickrey, mode),
            expectation_row("al-vs-myerson", e_al, mye, mode, "A^L is truthful on the copies"),
            expectation_row("vickrey-vs-myerson", e_vickrey, mye, mode),
            expectation_row("lottery-vs-2-myerson", e_rev, two * mye, mode),
        ]
    )

    metrics: dict[str, Number] = {
        "lottery_revenue": e_rev,
        "al_revenue": e_al,
        "vickrey_revenue": e_vickrey,
        "myerson_copies": mye,
        "menu_size": len(menu),
    }
    if mye > 0:
        metrics["lottery_over_myerson"] = float(e_rev) / float(mye)

    if include_pricing:
        try:
            pricing, price_rev = optimal_pricing_exact(ts)
        except CapacityError as e:
            log.warning("pricing_skipped", extra={"payload": {"instance_id": instance_id, **(e.details or {})}})
        else:
            report.extend(
                [
                    expectation_row("pricing-vs-half-myerson", mye / two, price_rev, mode, "Mye/2 <= optimal pricing"),
                    expectation_row("lottery-vs-4-pricing", e_rev, 4 * price_rev, mode),
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
        extra={"payload": {"instance_id": instance_id, "setting": 1, "passed": report.passed}},
    )
    return report
