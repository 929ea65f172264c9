"""
Optimal item pricing for a single unit-demand buyer.

Purpose:
- exact optimum by enumerating vertex prices of the difference-constraint arrangement
- literal assignment-LP oracle (types -> chosen item or none) for cross-checks
- grid search over support values and pairwise differences (fast path)
- common price for i.i.d. items

Ties between optimal pricings go to the lexicographically smallest price vector
(an unoffered item, price inf, sorts last).
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Sequence

import networkx as nx
import numpy as np

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import INF, Number, one, tolerance, zero
from lottery_gap_lab.dist.distributions import DiscreteDist
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import NumericMode
from lottery_gap_lab.mech.lotteries import ItemPricing, pricing_revenue
from lottery_gap_lab.opt.menus import merged_types

log = get_project_logger()

_EVAL_CHUNK_CELLS = 4_000_000
_SHORTLIST_REL = 1e-7


# =============================================================================
# candidate evaluation
# =============================================================================
def _float_revenues(values: np.ndarray, probs: np.ndarray, cands: np.ndarray) -> np.ndarray:
    """Expected revenue of each candidate price row under the global tie rule (float)."""
    t_count, m = values.shape
    tol = float(get_settings().float_tolerance)
    out = np.empty(cands.shape[0], dtype=float)
    step = max(1, _EVAL_CHUNK_CELLS // max(1, t_count * m))
    for start in range(0, cands.shape[0], step):
        prices = cands[start : start + step]
        u = values[None, :, :] - prices[:, None, :]
        best = np.maximum(u.max(axis=2), 0.0)
        tied = u >= (best - tol * np.maximum(1.0, np.abs(best)))[:, :, None]
        paid = np.where(tied, np.broadcast_to(prices[:, None, :], u.shape), 0.0).max(axis=2)
        out[start : start + step] = paid @ probs
    return out


def _as_float_prices(cands: Sequence[tuple[Number, ...]]) -> np.ndarray:
    return np.asarray([[float(x) for x in c] for c in cands], dtype=float)


def _pick_best(ts: TypeSpace, cands: list[tuple[Number, ...]]) -> tuple[ItemPricing, Number]:
    """Float screening, then exact evaluation of the shortlist."""
    agent = ts.agents[0]
    values = np.asarray(agent.values, dtype=float)
    probs = np.asarray(agent.probs, dtype=float)
    rev = _float_revenues(values, probs, _as_float_prices(cands))
    best = float(rev.max())
    cut = best - _SHORTLIST_REL * max(1.0, abs(best))
    shortlist = [cands[k] for k in np.flatnonzero(rev >= cut)]

    chosen: tuple[Number, ...] | None = None
    chosen_rev: Number = zero(ts.mode)
    tol = tolerance(ts.mode)
    for cand in sorted(shortlist):
        r = pricing_revenue(ItemPricing.of(cand, ts.mode), ts)
        if chosen is None or r > chosen_rev + tol:
            chosen, chosen_rev = cand, r
    return ItemPricing.of(chosen, ts.mode), chosen_rev


def _single_agent(ts: TypeSpace) -> None:
    if ts.n != 1:
        raise ValidationError("item pricing needs a single-agent type space", {"n": ts.n})


# =============================================================================
# vertex enumeration
# =============================================================================
def _prufer_trees(nodes: int) -> Iterator[list[tuple[int, int]]]:
    """All labeled trees on range(nodes) as edge lists."""
    if nodes == 1:
        yield []
        return
    if nodes == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(nodes), repeat=nodes - 2):
        degree = [1] * nodes
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = next(k for k in range(nodes) if degree[k] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, w = (k for k in range(nodes) if degree[k] == 1)
        edges.append((u, w))
        yield edges


def _orient(edges: list[tuple[int, int]], nodes: int) -> list[tuple[int, int]]:
    """(parent, child) pairs in BFS order from node 0."""
    adj: dict[int, list[int]] = {k: [] for k in range(nodes)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    out = []
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for a in frontier:
            for b in sorted(adj[a]):
                if b not in seen:
                    seen.add(b)
                    out.append((a, b))
                    nxt.append(b)
        frontier = nxt
    return out


def vertex_price_candidates(ts: TypeSpace) -> list[tuple[Number, ...]]:
    """
    Every vertex of the price arrangement: for an offered set O, a spanning tree on
    {0} u O fixes each price either at a type's value (or 0) or at another price
    plus a type's value difference.
    """
    _single_agent(ts)
    types, _ = merged_types(ts)
    m = ts.m
    z = zero(ts.mode)
    root_labels = [sorted({t[j] for t in types} | {z}) for j in range(m)]
    diff_labels = {
        (a, b): sorted({t[b] - t[a] for t in types}) for a in range(m) for b in range(m) if a != b
    }

    cap = get_settings().pricing_candidate_cap
    estimate = 0
    for size in range(1, m + 1):
        trees = (size + 1) ** (size - 1)
        widest = max(len(root_labels[j]) for j in range(m))
        widest = max([widest, *(len(v) for v in diff_labels.values())])
        estimate += math.comb(m, size) * trees * widest**size
    if estimate > cap:
        raise CapacityError("too many vertex price candidates", {"candidates": estimate, "cap": cap})

    seen: set[tuple[Number, ...]] = {tuple([INF] * m)}
    out: list[tuple[Number, ...]] = [tuple([INF] * m)]
    for size in range(1, m + 1):
        for offered in itertools.combinations(range(m), size):
            for edges in _prufer_trees(size + 1):
                oriented = _orient(edges, size + 1)
                label_sets = []
                for parent, child in oriented:
                    item = offered[child - 1]
                    if parent == 0:
                        label_sets.append(root_labels[item])
                    else:
                        label_sets.append(diff_labels[(offered[parent - 1], item)])
                for labels in itertools.product(*label_sets):
                    price: dict[int, Number] = {0: z}
                    ok = True
                    for (parent, child), lab in zip(oriented, labels, strict=True):
                        x = lab if parent == 0 else price[parent] + lab
                        if x < 0:
                            ok = False
                            break
                        price[child] = x
                    if not ok:
                        continue
                    vec = [INF] * m
                    for node in range(1, size + 1):
                        vec[offered[node - 1]] = price[node]
                    key = tuple(vec)
                    if key not in seen:
                        seen.add(key)
                        out.append(key)
    return out


def optimal_pricing_exact(ts: TypeSpace) -> tuple[ItemPricing, Number]:
    """
    Exact revenue-optimal item pricing (vertex enumeration, exact final evaluation).

    Every optimum of the assignment LP behind optimal_pricing_by_assignment sits on one
    of these vertices, so both return the same revenue.
    """
    cands = vertex_price_candidates(ts)
    pricing, revenue = _pick_best(ts, cands)
    log.info(
        "pricing_optimized",
        extra={
            "payload": {
                "method": "vertices",
                "candidates": len(cands),
                "prices": [str(p) for p in pricing.prices],
                "revenue": float(revenue),
            }
        },
    )
    return pricing, revenue


# =============================================================================
# grid search
# =============================================================================
def pricing_grid_search(ts: TypeSpace) -> tuple[ItemPricing, Number]:
    """Product grid of per-item prices: 0, inf, item values and one-step value differences."""
    _single_agent(ts)
    types, _ = merged_types(ts)
    m = ts.m
    z = zero(ts.mode)
    per_item = []
    for j in range(m):
        own = {t[j] for t in types}
        shifted = {t[j] - t[k] + s[k] for t in types for s in types for k in range(m) if k != j}
        per_item.append(sorted({z, *own, *(x for x in shifted if x >= 0)}) + [INF])

    count = math.prod(len(c) for c in per_item)
    cap = get_settings().pricing_candidate_cap
    if count > cap:
        raise CapacityError("price grid too large", {"candidates": count, "cap": cap})
    cands = [tuple(c) for c in itertools.product(*per_item)]
    return _pick_best(ts, cands)


# =============================================================================
# assignment LPs
# =============================================================================
def _assignment_prices(
    types: list[tuple[Number, ...]], assign: tuple[int, ...], m: int, mode: NumericMode
) -> tuple[Number, ...] | None:
    """
    Componentwise-maximal prices making every type prefer its assigned option
    (item index, or -1 for nothing); None when infeasible. Node 0 is the zero price,
    node j+1 is item j.
    """
    used = sorted({a for a in assign if a >= 0})
    g = nx.DiGraph()
    g.add_node(0)
    z = zero(mode)

    def tighten(src: int, dst: int, w: Number) -> None:
        # p_dst - p_src <= w
        if g.has_edge(src, dst):
            if w < g.edges[src, dst]["weight"]:
                g.edges[src, dst]["weight"] = w
        else:
            g.add_edge(src, dst, weight=w)

    for j in used:
        tighten(j + 1, 0, z)
    for t, a in zip(types, assign, strict=True):
        if a < 0:
            for k in used:
                tighten(k + 1, 0, -t[k])
            continue
        tighten(0, a + 1, t[a])
        for k in used:
            if k != a:
                tighten(k + 1, a + 1, t[a] - t[k])
    try:
        dist = nx.single_source_bellman_ford_path_length(g, 0, weight="weight")
    except nx.NetworkXUnbounded:
        return None
    prices: list[Number] = [INF] * m
    for j in used:
        prices[j] = dist[j + 1]
    return tuple(prices)


def optimal_pricing_by_assignment(ts: TypeSpace) -> tuple[ItemPricing, Number]:
    """Best over all maps type -> item-or-none of the assignment LP (exactness oracle)."""
    _single_agent(ts)
    types, probs = merged_types(ts)
    m = ts.m
    count = (m + 1) ** len(types)
    cap = get_settings().assignment_cap
    if count > cap:
        raise CapacityError("too many type assignments", {"assignments": count, "cap": cap})

    best: tuple[Number, ...] | None = None
    best_value: Number = zero(ts.mode)
    for assign in itertools.product(range(-1, m), repeat=len(types)):
        prices = _assignment_prices(types, assign, m, ts.mode)
        if prices is None:
            continue
        value = sum((p * prices[a] for p, a in zip(probs, assign, strict=True) if a >= 0), zero(ts.mode))
        if best is None or value > best_value or (value == best_value and prices < best):
            best, best_value = prices, value
    pricing = ItemPricing.of(best, ts.mode)
    return pricing, pricing_revenue(pricing, ts)


# =============================================================================
# i.i.d. items
# =============================================================================
def optimal_symmetric_price(d: DiscreteDist, m: int) -> tuple[Number, Number]:
    """Common price x over the support maximizing x * Pr[max of m draws >= x]; ties to the lower price."""
    if m < 1:
        raise ValidationError("need at least one item", {"m": m})
    best_price: Number | None = None
    best_rev: Number = zero(d.mode)
    tol = tolerance(d.mode)
    for x, s in zip(d.support, d.survival_array, strict=True):
        rev = x * (one(d.mode) - (one(d.mode) - s) ** m)
        if best_price is None or rev > best_rev + tol:
            best_price, best_rev = x, rev
    return best_price, best_rev


def pricing_revenue_float(ts: TypeSpace, prices: Sequence[Number]) -> float:
    """Float revenue of one price vector (used on large float grids)."""
    agent = ts.agents[0]
    rev = _float_revenues(
        np.asarray(agent.values, dtype=float),
        np.asarray(agent.probs, dtype=float),
        _as_float_prices([tuple(prices)]),
    )
    return float(rev[0])