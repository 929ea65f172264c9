"""
Single-parameter revenue optimization.

Purpose:
- virtual values and ironing over discrete supports (revenue curve in quantile space)
- monopoly price of one buyer
- Myerson's mechanism for copies instances under any FeasibilitySystem,
  with a virtual-surplus / threshold-payment cross-check
- Vickrey revenue, pointwise and in expectation
"""

from __future__ import annotations

import bisect
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from lottery_gap_lab.common.errors import InvariantViolation, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import (
    Number,
    as_array,
    is_close,
    one,
    to_number,
    tolerance,
    zero,
    zeros,
)
from lottery_gap_lab.dist.distributions import DiscreteDist
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import NumericMode, Structure
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.tables import MechanismTable

log = get_project_logger()


@dataclass(frozen=True)
class VirtualValueTable:
    support: tuple[Number, ...]
    phi: tuple[Number, ...]
    phi_bar: tuple[Number, ...]
    mode: NumericMode

    @cached_property
    def ironed_intervals(self) -> list[tuple[int, int]]:
        """Maximal index ranges [a, b] with a < b sharing one ironed value."""
        out = []
        a = 0
        for k in range(1, len(self.phi_bar) + 1):
            if k == len(self.phi_bar) or self.phi_bar[k] != self.phi_bar[a]:
                if k - 1 > a:
                    out.append((a, k - 1))
                a = k
        return out

    def phi_bar_of(self, value: Any) -> Number:
        x = to_number(value, self.mode)
        k = bisect.bisect_left(self.support, x)
        if k == len(self.support) or self.support[k] != x:
            raise ValidationError("value is not a support point", {"value": str(value)})
        return self.phi_bar[k]


def _cross(o: tuple[Number, Number], a: tuple[Number, Number], b: tuple[Number, Number]) -> Number:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def virtual_values(d: DiscreteDist) -> VirtualValueTable:
    v = list(d.support)
    f = list(d.probs)
    s = list(d.survival_array)
    k_count = len(v)
    mode = d.mode

    phi: list[Number] = []
    for k in range(k_count - 1):
        phi.append(v[k] - (v[k + 1] - v[k]) * s[k + 1] / f[k])
    phi.append(v[-1])

    # revenue curve points by ascending quantile: origin, then k = K-1 .. 0
    z = zero(mode)
    pts = [(z, z)] + [(s[k], v[k] * s[k]) for k in range(k_count - 1, -1, -1)]
    hull: list[tuple[Number, Number]] = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) >= 0:
            hull.pop()
        hull.append(p)

    # segment of type k spans quantiles [s[k+1], s[k]] (s[K] = 0)
    phi_bar: list[Number] = [z] * k_count
    h = 0
    for k in range(k_count - 1, -1, -1):
        right = s[k]
        while hull[h + 1][0] < right:
            h += 1
        (x0, y0), (x1, y1) = hull[h], hull[h + 1]
        phi_bar[k] = (y1 - y0) / (x1 - x0)
    return VirtualValueTable(tuple(v), tuple(phi), tuple(phi_bar), mode)


def monopoly_price(d: DiscreteDist) -> tuple[Number, Number]:
    """Revenue-maximizing posted price over the support; ties go to the lower price."""
    revenues = [v * s for v, s in zip(d.support, d.survival_array, strict=True)]
    best = max(revenues)
    tol = tolerance(d.mode)
    k = next(i for i, r in enumerate(revenues) if r >= best - tol)
    return d.support[k], revenues[k]


# =============================================================================
# VICKREY
# =============================================================================
def vickrey(values: Sequence[Any]) -> Number:
    """Second-highest value; 0 with fewer than two positive bids."""
    vals = sorted(values, reverse=True)
    if len(vals) < 2 or not vals[1] > 0:
        return 0 * vals[0] if vals else 0
    return vals[1]


def expected_vickrey(dists: Sequence[DiscreteDist]) -> Number:
    """E[second-highest value] of independent bidders, by level sets."""
    if not dists:
        raise ValidationError("expected_vickrey needs at least one bidder")
    mode = dists[0].mode
    levels = sorted({x for d in dists for x in d.support if x > 0})
    total_: Number = zero(mode)
    prev: Number = zero(mode)
    for u in levels:
        below = [one(mode) - d.survival(u) for d in dists]
        at_least = [d.survival(u) for d in dists]
        none_ = _prod(below, mode)
        exactly_one = zero(mode)
        for i in range(len(dists)):
            exactly_one += at_least[i] * _prod(below[:i] + below[i + 1 :], mode)
        total_ += (u - prev) * (one(mode) - none_ - exactly_one)
        prev = u
    return total_


def _prod(xs: Sequence[Number], mode: NumericMode) -> Number:
    out = one(mode)
    for x in xs:
        out = out * x
    return out


# =============================================================================
# MYERSON
# =============================================================================
def myerson_single_item_revenue(dists: Sequence[DiscreteDist]) -> Number:
    """E[max_i phi_bar_i^+] for one item and independent bidders."""
    if not dists:
        raise ValidationError("myerson_single_item_revenue needs at least one bidder")
    mode = dists[0].mode
    tables = [virtual_values(d) for d in dists]
    prefix = []
    for d in dists:
        acc = [zero(mode)]
        for p in d.probs:
            acc.append(acc[-1] + p)
        prefix.append(acc)

    levels = sorted({x for t in tables for x in t.phi_bar if x > 0})
    total_: Number = zero(mode)
    prev: Number = zero(mode)
    for level in levels:
        below = [prefix[i][bisect.bisect_left(t.phi_bar, level)] for i, t in enumerate(tables)]
        total_ += (level - prev) * (one(mode) - _prod(below, mode))
        prev = level
    return total_


def _single_parameter(ts: TypeSpace, fs: FeasibilitySystem) -> None:
    if ts.m != 1 or ts.structure is not Structure.product or ts.item_dists is None:
        raise ValidationError("Myerson needs a single-item product type space (one value per agent)")
    if fs.size != ts.n:
        raise ValidationError("feasibility ground must have one element per agent", {"size": fs.size, "n": ts.n})


def myerson(ts: TypeSpace, fs: FeasibilitySystem) -> tuple[MechanismTable, Number]:
    """
    Per profile: maximum-weight feasible set on max(phi_bar, 0), then agents with
    phi_bar == 0 added greedily in index order while feasible. Winners pay the
    lowest support value at which they still win, others fixed.
    """
    _single_parameter(ts, fs)
    mode = ts.mode
    n = ts.n
    tables = [virtual_values(ts.item_dists[i][0]) for i in range(n)]
    grid = ts.type_index_grid
    p_count = ts.num_profiles

    cache: dict[tuple[Number, ...], frozenset[int]] = {}

    def winners_for(phis: tuple[Number, ...]) -> frozenset[int]:
        hit = cache.get(phis)
        if hit is not None:
            return hit
        chosen = set(fs.max_weight_feasible([max(x, zero(mode)) for x in phis]))
        for i in range(n):
            if phis[i] == 0 and i not in chosen and fs.is_feasible(chosen | {i}):
                chosen.add(i)
        out = frozenset(chosen)
        cache[phis] = out
        return out

    phi_grid = [tuple(tables[i].phi_bar[int(t)] for i, t in enumerate(row)) for row in grid]
    win = [winners_for(phis) for phis in phi_grid]

    alloc = zeros((p_count, n, 1), mode)
    pay = zeros((p_count, n), mode)
    surplus = zero(mode)
    threshold_revenue = zero(mode)
    probs = ts.all_probs
    for k in range(p_count):
        row = grid[k]
        for i in win[k]:
            alloc[k, i, 0] = one(mode)
            threshold = tables[i].support[int(row[i])]
            types = list(row)
            for t in range(int(row[i])):
                types[i] = t
                if i in win[ts.profile_index(types)]:
                    threshold = tables[i].support[t]
                    break
            pay[k, i] = threshold
            surplus += probs[k] * phi_grid[k][i]
            threshold_revenue += probs[k] * threshold

    if not is_close(surplus, threshold_revenue, mode):
        raise InvariantViolation(
            "virtual surplus and threshold revenue disagree",
            {"virtual_surplus": str(surplus), "threshold_revenue": str(threshold_revenue)},
        )
    log.info(
        "myerson_computed",
        extra={"payload": {"agents": n, "profiles": p_count, "revenue": float(threshold_revenue)}},
    )
    return MechanismTable(ts.shape, alloc, pay, mode), threshold_revenue


def virtual_value_rows(ts: TypeSpace) -> list[dict[str, Any]]:
    """Per agent support with phi and phi_bar, for reports."""
    rows = []
    for i in range(ts.n):
        for j in range(ts.m):
            table = virtual_values(ts.item_marginal(i, j))
            for v, p, pb in zip(table.support, table.phi, table.phi_bar, strict=True):
                rows.append({"agent": i, "item": j, "value": v, "phi": p, "phi_bar": pb})
    return rows


def vickrey_per_profile(values: np.ndarray, mode: NumericMode) -> np.ndarray:
    """Second-highest entry of every row of a (P, k) nonnegative value array."""
    if values.shape[1] < 2:
        return zeros(values.shape[0], mode)
    return as_array(np.sort(values, axis=1)[:, -2], mode)
