"""
Matroid independence oracles over ground elements 0..size-1.

Built-in kinds:
- uniform(r): every set of size <= r
- partition(blocks, capacities): at most capacities[b] elements per block
- explicit: downward closure of a given list of independent sets
- free: every set
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.domain.enums import MatroidKind


class GroundElement(NamedTuple):
    agent: int
    item: int


def to_mask(elements: Iterable[int]) -> int:
    mask = 0
    for e in elements:
        mask |= 1 << e
    return mask


def from_mask(mask: int) -> tuple[int, ...]:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return tuple(out)


@dataclass(frozen=True)
class MatroidOracle:
    kind: MatroidKind
    size: int
    rank_limit: int | None = None
    block_of: tuple[int, ...] | None = None
    capacities: tuple[int, ...] | None = None
    independent_masks: frozenset[int] | None = None

    # -------------------------------------------------------------------------
    # constructors
    # -------------------------------------------------------------------------
    @classmethod
    def uniform(cls, size: int, r: int) -> MatroidOracle:
        if size < 0 or r < 0:
            raise ValidationError("uniform matroid needs size, rank >= 0", {"size": size, "rank": r})
        return cls(MatroidKind.uniform, size, rank_limit=r)

    @classmethod
    def partition(
        cls, size: int, blocks: Sequence[Iterable[int]], capacities: Sequence[int]
    ) -> MatroidOracle:
        blocks = [tuple(b) for b in blocks]
        if len(blocks) != len(capacities):
            raise ValidationError("blocks and capacities must align")
        if any(c < 0 for c in capacities):
            raise ValidationError("block capacities must be nonnegative")
        block_of = [-1] * size
        for b, members in enumerate(blocks):
            for e in members:
                if not 0 <= e < size:
                    raise ValidationError("block element out of range", {"element": e, "size": size})
                if block_of[e] != -1:
                    raise ValidationError("blocks must be disjoint", {"element": e})
                block_of[e] = b
        if -1 in block_of:
            raise ValidationError(
                "blocks must cover the ground set", {"uncovered": block_of.index(-1)}
            )
        return cls(
            MatroidKind.partition, size, block_of=tuple(block_of), capacities=tuple(capacities)
        )

    @classmethod
    def explicit(cls, size: int, independent_sets: Iterable[Iterable[int]]) -> MatroidOracle:
        closed: set[int] = {0}
        for s in independent_sets:
            s = tuple(s)
            if any(not 0 <= e < size for e in s):
                raise ValidationError("independent set element out of range", {"set": list(s)})
            mask = to_mask(s)
            # all submasks
            sub = mask
            while True:
                closed.add(sub)
                if sub == 0:
                    break
                sub = (sub - 1) & mask
        oracle = cls(MatroidKind.explicit, size, independent_masks=frozenset(closed))
        violations = check_matroid_axioms(oracle, limit=1)
        if violations:
            raise ValidationError("explicit set system is not a matroid", {"violation": violations[0]})
        return oracle

    @classmethod
    def free(cls, size: int) -> MatroidOracle:
        return cls(MatroidKind.free, size)

    # -------------------------------------------------------------------------
    # queries
    # -------------------------------------------------------------------------
    @property
    def ground(self) -> range:
        return range(self.size)

    def _check_range(self, elements: Iterable[int]) -> tuple[int, ...]:
        elems = tuple(elements)
        for e in elems:
            if not 0 <= e < self.size:
                raise ValidationError("element out of range", {"element": e, "size": self.size})
        return elems

    def independent_mask(self, mask: int) -> bool:
        if self.kind is MatroidKind.free:
            return True
        if self.kind is MatroidKind.uniform:
            return mask.bit_count() <= (self.rank_limit or 0)
        if self.kind is MatroidKind.partition:
            used: dict[int, int] = {}
            for e in from_mask(mask):
                b = self.block_of[e]
                used[b] = used.get(b, 0) + 1
                if used[b] > self.capacities[b]:
                    return False
            return True
        return mask in self.independent_masks

    def is_independent(self, elements: Iterable[int]) -> bool:
        elems = self._check_range(elements)
        if len(set(elems)) != len(elems):
            return False
        return self.independent_mask(to_mask(elems))

    def rank(self, elements: Iterable[int]) -> int:
        """Greedy maximal independent subset (every maximal one has the same size)."""
        chosen = 0
        for e in sorted(set(self._check_range(elements))):
            if self.independent_mask(chosen | (1 << e)):
                chosen |= 1 << e
        return chosen.bit_count()

    def relabel(self, mapping: Sequence[int], size: int) -> MatroidOracle:
        """Element e renamed to mapping[e]; unmapped elements of the new ground are free."""
        if len(mapping) != self.size or len(set(mapping)) != len(mapping):
            raise ValidationError("relabel mapping must be injective over the ground")
        if any(not 0 <= x < size for x in mapping):
            raise ValidationError("relabel target out of range")
        if self.kind is MatroidKind.uniform:
            if size != self.size:
                extra = [x for x in range(size) if x not in set(mapping)]
                return MatroidOracle.partition(
                    size, [list(mapping), extra], [self.rank_limit or 0, len(extra)]
                ) if extra else MatroidOracle.uniform(size, self.rank_limit or 0)
            return self
        if self.kind is MatroidKind.free:
            return MatroidOracle.free(size)
        if self.kind is MatroidKind.partition:
            covered = set(mapping)
            blocks: list[list[int]] = [[] for _ in self.capacities]
            for e, b in enumerate(self.block_of):
                blocks[b].append(mapping[e])
            caps = list(self.capacities)
            extra = [x for x in range(size) if x not in covered]
            if extra:
                blocks.append(extra)
                caps.append(len(extra))
            return MatroidOracle.partition(size, blocks, caps)
        sets = [[mapping[e] for e in from_mask(mask)] for mask in self.independent_masks]
        extra = [x for x in range(size) if x not in set(mapping)]
        return MatroidOracle.explicit(
            size, [s + extra for s in sets] if extra else sets
        )


def check_matroid_axioms(oracle: MatroidOracle, limit: int | None = None) -> list[str]:
    """
    Exhaustive heredity / augmentation check over all subset pairs.
    Returns human-readable violations (empty list = matroid).
    """
    n = oracle.size
    if n > get_settings().subset_cap:
        raise CapacityError(
            "ground set too large for exhaustive axiom check",
            {"size": n, "cap": get_settings().subset_cap},
        )
    indep = [mask for mask in range(1 << n) if oracle.independent_mask(mask)]
    indep_set = set(indep)
    violations: list[str] = []

    def _full() -> bool:
        return limit is not None and len(violations) >= limit

    if 0 not in indep_set:
        violations.append("empty set is not independent")
    for mask in indep:
        for e in from_mask(mask):
            if mask & ~(1 << e) not in indep_set:
                violations.append(f"heredity: {from_mask(mask)} minus {e}")
                if _full():
                    return violations
    for a in indep:
        for b in indep:
            if a.bit_count() <= b.bit_count():
                continue
            if not any((b | (1 << e)) in indep_set for e in from_mask(a & ~b)):
                violations.append(f"augmentation: A={from_mask(a)} B={from_mask(b)}")
                if _full():
                    return violations
    return violations
