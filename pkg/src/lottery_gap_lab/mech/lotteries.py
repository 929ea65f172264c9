"""
Lotteries, lottery menus and item pricings with best responses.

Purpose:
- priced probability vectors (q, p) and menus that always hold the null lottery
- one global tie rule: highest utility, then higher price, then lower menu index
- exact revenue of menus and pricings on single-agent type spaces
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.common.numeric import (
    Number,
    as_array,
    is_rational,
    resolve_mode,
    to_number,
    tolerance,
    total,
    zero,
)
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import NumericMode

_CHUNK = 500_000


@dataclass(frozen=True)
class ProbabilityCap:
    """Item groups whose allocation probabilities must each sum to at most 1."""

    groups: tuple[tuple[int, ...], ...]

    @classmethod
    def unit(cls, m: int) -> ProbabilityCap:
        return cls((tuple(range(m)),))

    @classmethod
    def lifted(cls, m_plus_one: int) -> ProbabilityCap:
        """Item 0 on its own, items 1..m sharing one unit."""
        return cls(((0,), tuple(range(1, m_plus_one))))

    @property
    def label(self) -> str:
        return "lifted" if len(self.groups) == 2 and self.groups[0] == (0,) else "unit"


@dataclass(frozen=True)
class Lottery:
    q: tuple[Number, ...]
    p: Number

    @property
    def is_null(self) -> bool:
        return all(x == 0 for x in self.q) and self.p == 0

    def utility(self, values: Sequence[Number]) -> Number:
        return sum((qj * vj for qj, vj in zip(self.q, values, strict=True)), 0 * self.p) - self.p


def null_lottery(m: int, mode: NumericMode) -> Lottery:
    z = zero(mode)
    return Lottery(tuple([z] * m), z)


@dataclass(frozen=True)
class LotteryMenu:
    lotteries: tuple[Lottery, ...]
    mode: NumericMode
    cap: ProbabilityCap

    @classmethod
    def of(
        cls,
        lotteries: Iterable[Lottery | tuple[Sequence[Any], Any]],
        m: int | None = None,
        mode: NumericMode | str | None = None,
        cap: ProbabilityCap | None = None,
    ) -> LotteryMenu:
        """Validated menu; the null lottery is inserted at index 0 when missing."""
        mode = resolve_mode(mode)
        items: list[Lottery] = []
        for entry in lotteries:
            q, p = (entry.q, entry.p) if isinstance(entry, Lottery) else entry
            items.append(Lottery(tuple(to_number(x, mode) for x in q), to_number(p, mode)))
        if m is None:
            if not items:
                raise ValidationError("empty menu needs an explicit item count")
            m = len(items[0].q)
        cap = cap or ProbabilityCap.unit(m)
        tol = tolerance(mode)
        for lot in items:
            if len(lot.q) != m:
                raise ValidationError("lottery length must equal item count", {"m": m})
            if any(x < -tol for x in lot.q):
                raise ValidationError("allocation probabilities must be nonnegative")
            if isinstance(lot.p, float) and not math.isfinite(lot.p):
                raise ValidationError("lottery prices must be finite")
            for group in cap.groups:
                if sum((lot.q[j] for j in group), zero(mode)) > 1 + tol * len(group):
                    raise ValidationError(
                        "allocation probabilities exceed the cap",
                        {"q": [str(x) for x in lot.q], "group": list(group)},
                    )
        if not any(lot.is_null for lot in items):
            items.insert(0, null_lottery(m, mode))
        return cls(tuple(items), mode, cap)

    def __len__(self) -> int:
        return len(self.lotteries)

    @property
    def m(self) -> int:
        return len(self.lotteries[0].q)

    @cached_property
    def q_matrix(self) -> np.ndarray:
        return as_array([list(lot.q) for lot in self.lotteries], self.mode)

    @cached_property
    def prices(self) -> np.ndarray:
        return as_array([lot.p for lot in self.lotteries], self.mode)

    def with_lottery(self, lottery: Lottery | tuple[Sequence[Any], Any]) -> LotteryMenu:
        return LotteryMenu.of([*self.lotteries, lottery], self.m, self.mode, self.cap)

    def shifted(self, delta: Any) -> LotteryMenu:
        """Adds delta to the price of every non-null lottery."""
        d = to_number(delta, self.mode)
        return LotteryMenu(
            tuple(lot if lot.is_null else Lottery(lot.q, lot.p + d) for lot in self.lotteries),
            self.mode,
            self.cap,
        )

    def as_mode(self, mode: NumericMode | str) -> LotteryMenu:
        mode = NumericMode(mode)
        if mode is self.mode:
            return self
        return LotteryMenu.of(self.lotteries, self.m, mode, self.cap)


@dataclass(frozen=True)
class ItemPricing:
    """One price per item; math.inf means the item is not offered."""

    prices: tuple[Number, ...]
    mode: NumericMode

    @classmethod
    def of(cls, prices: Sequence[Any], mode: NumericMode | str | None = None) -> ItemPricing:
        mode = resolve_mode(mode)
        ps = tuple(to_number(p, mode) for p in prices)
        if not ps or any(p < 0 for p in ps):
            raise ValidationError("item prices must be nonnegative", {"prices": [str(p) for p in ps]})
        return cls(ps, mode)

    @property
    def m(self) -> int:
        return len(self.prices)

    @cached_property
    def offered(self) -> tuple[int, ...]:
        return tuple(j for j, p in enumerate(self.prices) if not _is_inf(p))

    def as_menu(self) -> LotteryMenu:
        one = to_number(1, self.mode)
        z = zero(self.mode)
        lots = [null_lottery(self.m, self.mode)]
        for j in self.offered:
            q = [z] * self.m
            q[j] = one
            lots.append(Lottery(tuple(q), self.prices[j]))
        return LotteryMenu(tuple(lots), self.mode, ProbabilityCap.unit(self.m))


def _is_inf(x: Number) -> bool:
    return isinstance(x, float) and math.isinf(x)


# =============================================================================
# BEST RESPONSE
# =============================================================================
def pick_lotteries(
    u: np.ndarray,
    prices: np.ndarray,
    mode: NumericMode,
    prefer: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Tie rule over a (rows, L) utility matrix: highest utility, then higher price,
    then lower index. When prefer is given, the preferred index wins whenever it
    is tied for the maximum; conflicts marks rows where the default rule would
    have picked something else.
    """
    order_arr = np.asarray(sorted(range(len(prices)), key=lambda k: (-prices[k], k)), dtype=np.int64)
    best = u.max(axis=1)
    if is_rational(mode):
        tied = u == best[:, None]
    else:
        tol = tolerance(mode) * np.maximum(1.0, np.abs(best.astype(float)))
        tied = u >= (best - tol)[:, None]
    tied = np.asarray(tied, dtype=bool)
    default = order_arr[np.argmax(tied[:, order_arr], axis=1)]
    if prefer is None:
        return default, np.zeros(u.shape[0], dtype=bool)
    pref = np.asarray(prefer, dtype=np.int64)
    keep = tied[np.arange(u.shape[0]), pref]
    return np.where(keep, pref, default), keep & (pref != default)


def choose_lotteries(
    q: np.ndarray,
    prices: np.ndarray,
    values: np.ndarray,
    mode: NumericMode,
    prefer: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Utility-maximizing lottery index per valuation row (see pick_lotteries for ties)."""
    rows = values.shape[0]
    choices = np.empty(rows, dtype=np.int64)
    conflicts = np.zeros(rows, dtype=bool)
    for start in range(0, rows, _CHUNK):
        stop = min(rows, start + _CHUNK)
        u = values[start:stop] @ q.T - prices
        pref = None if prefer is None else prefer[start:stop]
        choices[start:stop], conflicts[start:stop] = pick_lotteries(u, prices, mode, pref)
    return choices, conflicts


def menu_best_response(menu: LotteryMenu, values: Sequence[Any]) -> Lottery:
    v = as_array([list(values)], menu.mode)
    if v.shape[1] != menu.m:
        raise ValidationError("valuation length must equal item count", {"m": menu.m})
    choice, _ = choose_lotteries(menu.q_matrix, menu.prices, v, menu.mode)
    return menu.lotteries[int(choice[0])]


def pricing_best_response(pricing: ItemPricing, values: Sequence[Any]) -> int | None:
    """Chosen item index or None for no purchase."""
    menu = pricing.as_menu()
    chosen = menu_best_response(menu, values)
    if chosen.is_null:
        return None
    return next(j for j, x in enumerate(chosen.q) if x != 0)


# =============================================================================
# REVENUE
# =============================================================================
def _single_agent(ts: TypeSpace) -> None:
    if ts.n != 1:
        raise ValidationError("menu evaluation needs a single-agent type space", {"n": ts.n})


def menu_choices(menu: LotteryMenu, ts: TypeSpace) -> np.ndarray:
    _single_agent(ts)
    menu = menu.as_mode(ts.mode)
    if menu.m != ts.m:
        raise ValidationError("menu and type space disagree on item count")
    choices, _ = choose_lotteries(menu.q_matrix, menu.prices, ts.agents[0].values, ts.mode)
    return choices


def menu_revenue(menu: LotteryMenu, ts: TypeSpace) -> Number:
    menu = menu.as_mode(ts.mode)
    choices = menu_choices(menu, ts)
    return total(ts.agents[0].probs * menu.prices[choices], ts.mode)


def pricing_revenue(pricing: ItemPricing, ts: TypeSpace) -> Number:
    return menu_revenue(pricing.as_menu(), ts)


def region_masses(menu: LotteryMenu, ts: TypeSpace) -> list[Number]:
    """Probability mass of the purchase region of every lottery (menu order)."""
    choices = menu_choices(menu, ts)
    probs = ts.agents[0].probs
    if not is_rational(ts.mode):
        return [float(x) for x in np.bincount(choices, weights=probs, minlength=len(menu))]
    masses = [zero(ts.mode)] * len(menu)
    for c, p in zip(choices.tolist(), probs, strict=True):
        masses[c] += p
    return masses
