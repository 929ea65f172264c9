"""
Feasibility set systems J = J1 ∩ J2 over agent-item pairs.

Purpose:
- matching tag: J1 item-capacity partition (k_j), J2 unit demand per agent
- general tag: arbitrary J1 oracle intersected with unit demand
- deterministic maximum-weight feasible sets and ranks
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any

import networkx as nx

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.domain.enums import FeasibilityKind
from lottery_gap_lab.feas.matroids import GroundElement, MatroidOracle, from_mask, to_mask


@dataclass(frozen=True, eq=False)
class FeasibilitySystem:
    """
    Ground element e = i*m + j stands for (agent i, item j).
    pairs[e] gives the bipartite endpoints used under the matching tag
    (J2 block, J1 block); for the copies view they are the parent's (i, j).
    """

    n: int
    m: int
    j1: MatroidOracle
    j2: MatroidOracle
    kind: FeasibilityKind
    capacities: tuple[int, ...] | None = None
    pairs: tuple[GroundElement, ...] | None = None

    # -------------------------------------------------------------------------
    # constructors
    # -------------------------------------------------------------------------
    @classmethod
    def matching(cls, n: int, capacities: Sequence[int]) -> FeasibilitySystem:
        m = len(capacities)
        if n < 1 or m < 1:
            raise ValidationError("matching needs n, m >= 1", {"n": n, "m": m})
        if any(k < 0 for k in capacities):
            raise ValidationError("item capacities must be nonnegative")
        size = n * m
        j1 = MatroidOracle.partition(
            size, [[i * m + j for i in range(n)] for j in range(m)], list(capacities)
        )
        return cls(
            n=n,
            m=m,
            j1=j1,
            j2=unit_demand(n, m),
            kind=FeasibilityKind.matching,
            capacities=tuple(int(k) for k in capacities),
            pairs=tuple(GroundElement(e // m, e % m) for e in range(size)),
        )

    @classmethod
    def general(cls, n: int, m: int, j1: MatroidOracle) -> FeasibilitySystem:
        if j1.size != n * m:
            raise ValidationError("J1 ground must have n*m elements", {"size": j1.size, "nm": n * m})
        return cls(
            n=n,
            m=m,
            j1=j1,
            j2=unit_demand(n, m),
            kind=FeasibilityKind.general,
            pairs=tuple(GroundElement(e // m, e % m) for e in range(n * m)),
        )

    @classmethod
    def single_item(cls, n: int) -> FeasibilitySystem:
        return cls.matching(n, (1,))

    def copies_view(self) -> FeasibilitySystem:
        """
        Same constraint seen as n*m single-item pseudo-agents.
        Pseudo-agent a = i*m + j owns ground element a, so J1/J2 carry over unchanged.
        """
        return FeasibilitySystem(
            n=self.n * self.m,
            m=1,
            j1=self.j1,
            j2=self.j2,
            kind=self.kind,
            capacities=self.capacities,
            pairs=self.pairs,
        )

    # -------------------------------------------------------------------------
    # elements
    # -------------------------------------------------------------------------
    @property
    def size(self) -> int:
        return self.n * self.m

    def element_index(self, e: GroundElement | tuple[int, int] | int) -> int:
        if isinstance(e, int):
            idx = e
        else:
            i, j = e
            if not (0 <= i < self.n and 0 <= j < self.m):
                raise ValidationError("element out of range", {"element": [i, j]})
            idx = i * self.m + j
        if not 0 <= idx < self.size:
            raise ValidationError("element out of range", {"element": idx})
        return idx

    def element(self, idx: int) -> GroundElement:
        return GroundElement(idx // self.m, idx % self.m)

    def _indices(self, elements: Iterable[Any]) -> tuple[int, ...]:
        return tuple(self.element_index(e) for e in elements)

    def _pair(self, idx: int) -> GroundElement:
        return self.pairs[idx] if self.pairs is not None else self.element(idx)

    # -------------------------------------------------------------------------
    # queries
    # -------------------------------------------------------------------------
    def is_feasible(self, elements: Iterable[Any]) -> bool:
        idx = self._indices(elements)
        if len(set(idx)) != len(idx):
            return False
        mask = to_mask(idx)
        return self.j1.independent_mask(mask) and self.j2.independent_mask(mask)

    def is_feasible_mask(self, mask: int) -> bool:
        return self.j1.independent_mask(mask) and self.j2.independent_mask(mask)

    def rank(self, elements: Iterable[Any]) -> int:
        idx = set(self._indices(elements))
        weights = [1 if e in idx else 0 for e in range(self.size)]
        return len(self.max_weight_feasible(weights))

    def rank_mask(self, mask: int) -> int:
        return self.rank(from_mask(mask))

    @cached_property
    def dependent_subsets(self) -> tuple[tuple[tuple[int, ...], int], ...]:
        """
        (S, r(S)) for every S with r(S) < |S|; brute force, small grounds only.
        """
        cap = min(get_settings().subset_cap, 12)
        if self.size > cap:
            raise CapacityError(
                "ground set too large to enumerate dependent subsets",
                {"size": self.size, "cap": cap},
            )
        out = []
        for mask in range(1, 1 << self.size):
            if self.is_feasible_mask(mask):
                continue
            out.append((from_mask(mask), self.rank_mask(mask)))
        return tuple(out)

    # -------------------------------------------------------------------------
    # optimization
    # -------------------------------------------------------------------------
    def max_weight_feasible(self, weights: Sequence[Any]) -> frozenset[int]:
        """
        Feasible set of maximum total weight.
        Ties: fewer elements first, then the lexicographically smallest sorted element list.
        Zero-weight elements are never chosen.
        """
        if len(weights) != self.size:
            raise ValidationError("one weight per ground element", {"size": self.size})
        ws = [Fraction(w) if not isinstance(w, Fraction) else w for w in weights]
        if any(w < 0 for w in ws):
            raise ValidationError("weights must be nonnegative")
        positive = [e for e in range(self.size) if ws[e] > 0]
        if not positive:
            return frozenset()
        if self.kind is FeasibilityKind.matching:
            return self._max_weight_matching(ws, positive)
        return self._max_weight_brute_force(ws, positive)

    def _max_weight_matching(self, ws: list[Fraction], positive: list[int]) -> frozenset[int]:
        scale = math.lcm(*(w.denominator for w in ws))
        size = self.size
        big_s = 1 << (size + 2)
        big_w = big_s * (size + 2)

        g = nx.Graph()
        for e in positive:
            agent, item = self._pair(e)
            key = int(ws[e] * scale) * big_w - big_s + (1 << (size - 1 - e))
            for slot in range(self.capacities[item]):
                g.add_edge(("agent", agent), ("slot", item, slot), weight=key, element=e)
        matched = nx.max_weight_matching(g, maxcardinality=False, weight="weight")
        return frozenset(g.edges[u, v]["element"] for u, v in matched)

    def _max_weight_brute_force(self, ws: list[Fraction], positive: list[int]) -> frozenset[int]:
        by_agent: dict[int, list[int]] = {}
        for e in positive:
            by_agent.setdefault(self._pair(e).agent, []).append(e)
        groups = [[None, *v] for _, v in sorted(by_agent.items())]

        combos = math.prod(len(g) for g in groups)
        cap = 1 << get_settings().subset_cap
        if combos > cap:
            raise CapacityError(
                "too many candidate sets for brute-force feasibility",
                {"candidates": combos, "cap": cap},
            )

        size = self.size
        best: tuple[Fraction, int, int] | None = None
        best_set: tuple[int, ...] = ()
        for choice in itertools.product(*groups):
            chosen = tuple(e for e in choice if e is not None)
            mask = to_mask(chosen)
            if not self.j1.independent_mask(mask):
                continue
            key = (
                sum((ws[e] for e in chosen), Fraction(0)),
                -len(chosen),
                sum(1 << (size - 1 - e) for e in chosen),
            )
            if best is None or key > best:
                best, best_set = key, chosen
        return frozenset(best_set)


def unit_demand(n: int, m: int) -> MatroidOracle:
    """J2: at most one item per agent."""
    return MatroidOracle.partition(
        n * m, [[i * m + j for j in range(m)] for i in range(n)], [1] * n
    )
