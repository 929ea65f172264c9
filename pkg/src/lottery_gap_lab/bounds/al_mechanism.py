"""
A^L: the single-parameter mechanism on the copies instance induced by a lottery mechanism.

Pseudo-agent (i, j) facing v_{-ij} sees agent i's menu with every lottery
(q, p) turned into (q_j, p - sum_{k != j} q_k v_ik + delta_ij), where delta_ij
is the least shift that makes the cheapest derived lottery free or better.
The shift changes every utility by the same amount, so the pseudo-agent
keeps buying the parent's lottery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from lottery_gap_lab.bounds.copies import CopiesInstance
from lottery_gap_lab.common.errors import InvariantViolation, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import Number, is_rational, tolerance, total, zeros
from lottery_gap_lab.mech.conversion import LotteryMechanism
from lottery_gap_lab.mech.lotteries import pick_lotteries

log = get_project_logger()

_WITNESS_LIMIT = 5


@dataclass(frozen=True, eq=False)
class ALRecord:
    """delta, payments: (P, n, m) per profile and pseudo-agent; choices: (P, n) lottery index."""

    lm: LotteryMechanism
    delta: np.ndarray
    payments: np.ndarray
    choices: np.ndarray

    def revenue_per_profile(self) -> np.ndarray:
        return self.payments.reshape(self.payments.shape[0], -1).sum(axis=1)

    def pseudo_revenue(self, i: int, j: int) -> np.ndarray:
        return self.payments[:, i, j]

    def expected_revenue(self) -> Number:
        ts = self.lm.ts
        return total(ts.all_probs * self.revenue_per_profile(), ts.mode)

    def derived_menu(self, profile: int, i: int, j: int) -> list[tuple[Number, Number]]:
        """(q', p') pairs pseudo-agent (i, j) faces at this profile, shift included."""
        ts = self.lm.ts
        menu = self.lm.menu_for(profile, i)
        v = ts.all_values[profile, i]
        delta = self.delta[profile, i, j]
        out = []
        for lot in menu.lotteries:
            cross = sum((lot.q[k] * v[k] for k in range(ts.m) if k != j), 0 * lot.p)
            out.append((lot.q[j], lot.p - cross + delta))
        return out


def build_A_L(lm: LotteryMechanism, ci: CopiesInstance | None = None) -> ALRecord:
    """
    Derived menus, shifts and payments for every pseudo-agent and profile.
    Raises InvariantViolation when a pseudo-agent would not buy its parent's
    lottery or would pay a negative amount.
    """
    ts = lm.ts
    if ci is not None and ci.parent is not ts:
        raise ValidationError("copies instance was built from another type space")
    mode = ts.mode
    p_count, n, m = ts.num_profiles, ts.n, ts.m
    delta = zeros((p_count, n, m), mode)
    pay = zeros((p_count, n, m), mode)
    tol = tolerance(mode)
    witnesses: list[dict[str, Any]] = []
    mismatches = 0
    negative = 0

    for i in range(n):
        inv = ts.profile_lookup(i)
        vals = ts.agents[i].values
        for r, menu in enumerate(lm.menus[i]):
            rows = inv[:, r]
            q = menu.q_matrix
            prices = menu.prices
            parent = lm.choices[rows, i]
            qv = vals @ q.T  # (T, L)
            for j in range(m):
                own = vals[:, j : j + 1] * q[:, j][None, :]
                pre = prices[None, :] - (qv - own)
                low = pre.min(axis=1)
                d = np.where(low < 0, -low, 0 * low)
                u = qv - prices[None, :] - d[:, None]
                picked, _ = pick_lotteries(u, prices, mode, parent)
                t_idx = np.arange(len(rows))
                paid = pre[t_idx, parent] + d
                chosen_u = u[t_idx, parent]
                if is_rational(mode):
                    bad_pick = np.asarray((picked != parent) | (chosen_u < 0), dtype=bool)
                    bad_pay = np.asarray(paid < 0, dtype=bool)
                else:
                    bad_pick = np.asarray(
                        (picked != parent) | (chosen_u.astype(float) < -tol), dtype=bool
                    )
                    bad_pay = np.asarray(paid.astype(float) < -tol, dtype=bool)
                mismatches += int(bad_pick.sum())
                negative += int(bad_pay.sum())
                for t in np.flatnonzero(bad_pick | bad_pay)[: _WITNESS_LIMIT - len(witnesses)]:
                    witnesses.append(
                        {
                            "profile": int(rows[t]),
                            "agent": i,
                            "item": j,
                            "parent_lottery": int(parent[t]),
                            "pseudo_lottery": int(picked[t]),
                            "payment": str(paid[t]),
                        }
                    )
                delta[rows, i, j] = d
                pay[rows, i, j] = paid

    if mismatches or negative:
        log.warning(
            "al_identity_failed",
            extra={"payload": {"mismatches": mismatches, "negative_payments": negative}},
        )
        raise InvariantViolation(
            "A^L does not reproduce the parent allocation with nonnegative payments",
            {"mismatches": mismatches, "negative_payments": negative, "witnesses": witnesses},
        )
    return ALRecord(lm, delta, pay, lm.choices.copy())
