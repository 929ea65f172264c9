"""
Exchange maps between independent sets of one matroid.

- exchange_bijection: g: B1∖B2 -> B2∖B1 with B1 - e + g(e) independent
- partial_exchange_maps: injection B2' -> A1 (augment to equal size, then exchange)
Choices are lexicographic so repeated runs give the same maps.
"""

from __future__ import annotations

from collections.abc import Iterable

import networkx as nx

from lottery_gap_lab.common.errors import InvariantViolation, ValidationError
from lottery_gap_lab.feas.matroids import MatroidOracle, to_mask


def _exchange_graph(
    oracle: MatroidOracle, b1: frozenset[int], left: list[int], right: list[int]
) -> dict[int, list[int]]:
    base = to_mask(b1)
    return {
        e: [f for f in right if oracle.independent_mask((base & ~(1 << e)) | (1 << f))]
        for e in left
    }


def _has_perfect_matching(adj: dict[int, list[int]], left: list[int], used: set[int]) -> bool:
    if not left:
        return True
    g = nx.Graph()
    top = [("l", e) for e in left]
    g.add_nodes_from(top)
    for e in left:
        for f in adj[e]:
            if f not in used:
                g.add_edge(("l", e), ("r", f))
    matching = nx.bipartite.hopcroft_karp_matching(g, top_nodes=top)
    return all(("l", e) in matching for e in left)


def exchange_bijection(
    oracle: MatroidOracle, b1: Iterable[int], b2: Iterable[int]
) -> dict[int, int]:
    s1, s2 = frozenset(b1), frozenset(b2)
    if len(s1) != len(s2):
        raise ValidationError("exchange needs equal-size sets", {"b1": len(s1), "b2": len(s2)})
    if not oracle.is_independent(s1) or not oracle.is_independent(s2):
        raise ValidationError("exchange needs independent sets")

    left = sorted(s1 - s2)
    right = sorted(s2 - s1)
    adj = _exchange_graph(oracle, s1, left, right)
    if not _has_perfect_matching(adj, left, set()):
        raise InvariantViolation(
            "exchange graph has no perfect matching",
            {"b1": sorted(s1), "b2": sorted(s2)},
        )

    g: dict[int, int] = {}
    used: set[int] = set()
    for pos, e in enumerate(left):
        for f in adj[e]:
            if f in used:
                continue
            if _has_perfect_matching(adj, left[pos + 1 :], used | {f}):
                g[e] = f
                used.add(f)
                break
        else:  # pragma: no cover
            raise InvariantViolation("lexicographic exchange failed", {"element": e})
    return g


def _augment(oracle: MatroidOracle, base: set[int], source: frozenset[int], target: int) -> set[int]:
    out = set(base)
    while len(out) < target:
        mask = to_mask(out)
        for e in sorted(source - out):
            if oracle.independent_mask(mask | (1 << e)):
                out.add(e)
                break
        else:
            raise InvariantViolation(
                "augmentation property failed", {"base": sorted(out), "source": sorted(source)}
            )
    return out


def partial_exchange_maps(
    oracle: MatroidOracle, a1: Iterable[int], a2: Iterable[int]
) -> tuple[frozenset[int], dict[int, int]]:
    """
    Returns (B2', g) with:
    - A1 - g(e) + e independent for e in B2'
    - A1 + e independent for e in A2 ∖ B2'
    """
    s1, s2 = frozenset(a1), frozenset(a2)
    if not oracle.is_independent(s1) or not oracle.is_independent(s2):
        raise ValidationError("partial exchange needs independent sets")

    b1 = _augment(oracle, set(s1), s2, len(s2))
    b2 = _augment(oracle, set(s2), s1, len(s1))
    h = exchange_bijection(oracle, b1, b2)
    g = {f: e for e, f in h.items()}
    b2_prime = frozenset(s2 - b1)
    return b2_prime, {e: g[e] for e in sorted(b2_prime)}
