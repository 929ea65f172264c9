from __future__ import annotations

import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.domain.enums import FeasibilityKind
from lottery_gap_lab.feas.exchange import exchange_bijection, partial_exchange_maps
from lottery_gap_lab.feas.matroids import MatroidOracle, check_matroid_axioms, from_mask, to_mask
from lottery_gap_lab.feas.system import FeasibilitySystem, unit_demand


def _forests_of_k4() -> MatroidOracle:
    edges = list(itertools.combinations(range(4), 2))
    forests = []
    for mask in range(1 << len(edges)):
        g = nx.Graph()
        g.add_nodes_from(range(4))
        g.add_edges_from(edges[e] for e in from_mask(mask))
        if nx.is_forest(g):
            forests.append(from_mask(mask))
    return MatroidOracle.explicit(len(edges), forests)


def _builtin_oracles() -> list[MatroidOracle]:
    out = [MatroidOracle.free(5), unit_demand(2, 3), unit_demand(3, 2)]
    out += [MatroidOracle.uniform(size, r) for size in (0, 3, 6) for r in range(0, size + 1, 2)]
    out.append(MatroidOracle.partition(8, [[0, 1, 2], [3, 4], [5, 6, 7]], [1, 2, 2]))
    out.append(MatroidOracle.partition(8, [[0, 1, 2, 3], [4, 5, 6, 7]], [2, 2]))
    out.append(MatroidOracle.explicit(3, [[0, 1], [0, 2], [1, 2]]))
    out.append(_forests_of_k4())
    return out


def _oracle_id(oracle: MatroidOracle) -> str:
    return f"{oracle.kind.value}-{oracle.size}-r{oracle.rank(oracle.ground)}"


def _independent_masks(oracle: MatroidOracle) -> list[int]:
    return [mask for mask in range(1 << oracle.size) if oracle.independent_mask(mask)]


def _pair_params() -> list[object]:
    # the widest independence systems take seconds to pair up exhaustively
    return [
        pytest.param(
            o, marks=[pytest.mark.slow] if len(_independent_masks(o)) > 64 else [], id=_oracle_id(o)
        )
        for o in _builtin_oracles()
    ]


@pytest.mark.parametrize("oracle", _builtin_oracles(), ids=_oracle_id)
def test_builtin_oracles_satisfy_axioms(oracle: MatroidOracle) -> None:
    assert check_matroid_axioms(oracle) == []


@pytest.mark.parametrize("oracle", _builtin_oracles(), ids=_oracle_id)
def test_rank_is_monotone_and_submodular(oracle: MatroidOracle) -> None:
    full = 1 << oracle.size
    rank = [oracle.rank(from_mask(mask)) for mask in range(full)]
    assert rank[0] == 0
    for mask in range(full):
        assert rank[mask] <= mask.bit_count()
        assert (rank[mask] == mask.bit_count()) == oracle.independent_mask(mask)
        for e in range(oracle.size):
            grown = mask | (1 << e)
            assert rank[mask] <= rank[grown] <= rank[mask] + 1
    for a in range(full):
        for b in range(a, full):
            assert rank[a | b] + rank[a & b] <= rank[a] + rank[b]


@pytest.mark.parametrize("oracle", _builtin_oracles(), ids=_oracle_id)
def test_exchange_bijection_on_all_base_pairs(oracle: MatroidOracle) -> None:
    r = oracle.rank(oracle.ground)
    bases = [frozenset(from_mask(m)) for m in _independent_masks(oracle) if m.bit_count() == r]
    assert bases
    for b1, b2 in itertools.product(bases, repeat=2):
        g = exchange_bijection(oracle, b1, b2)
        assert set(g) == set(b1 - b2)
        assert sorted(g.values()) == sorted(b2 - b1)
        for e, f in g.items():
            assert oracle.is_independent((b1 - {e}) | {f})


@pytest.mark.parametrize("oracle", _pair_params())
def test_partial_exchange_maps_on_all_independent_pairs(oracle: MatroidOracle) -> None:
    sets = [frozenset(from_mask(m)) for m in _independent_masks(oracle)]
    for a1, a2 in itertools.product(sets, repeat=2):
        b2p, g = partial_exchange_maps(oracle, a1, a2)
        assert b2p <= a2 - a1
        assert set(g) == set(b2p)
        assert len(set(g.values())) == len(g)
        assert set(g.values()) <= a1
        for e, f in g.items():
            assert oracle.is_independent((a1 - {f}) | {e})
        for e in a2 - b2p:
            assert oracle.is_independent(a1 | {e})


@pytest.mark.parametrize("oracle", _builtin_oracles(), ids=_oracle_id)
def test_builtin_oracles_satisfy_axioms(oracle: MatroidOracle) -> None:
    assert check_matroid_axioms(oracle) == []


def test_explicit_non_matroid_rejected() -> None:
    with pytest.raises(ValidationError):
        MatroidOracle.explicit(3, [[0, 1], [2]])


def test_partition_validation() -> None:
    with pytest.raises(ValidationError):
        MatroidOracle.partition(3, [[0, 1]], [1])
    with pytest.raises(ValidationError):
        MatroidOracle.partition(3, [[0, 1], [1, 2]], [1, 1])


def test_rank_and_masks() -> None:
    u = MatroidOracle.uniform(5, 2)
    assert u.rank([0, 1, 4]) == 2
    assert u.is_independent([3])
    assert not u.is_independent([1, 1])
    assert from_mask(to_mask([0, 3, 4])) == (0, 3, 4)


def test_relabel_keeps_independence() -> None:
    p = MatroidOracle.partition(2, [[0, 1]], [1])
    r = p.relabel([2, 0], 3)
    assert r.is_independent([0, 1])
    assert not r.is_independent([0, 2])


def test_exchange_forced_on_partition() -> None:
    # blocks {a, c}, {b, d} with a, b, c, d = 0, 1, 2, 3
    oracle = MatroidOracle.partition(4, [[0, 2], [1, 3]], [1, 1])
    assert exchange_bijection(oracle, [0, 1], [2, 3]) == {0: 2, 1: 3}


def test_exchange_bijection_valid_on_all_uniform_bases() -> None:
    oracle = MatroidOracle.uniform(5, 3)
    bases = [frozenset(c) for c in itertools.combinations(range(5), 3)]
    for b1, b2 in itertools.product(bases, repeat=2):
        g = exchange_bijection(oracle, b1, b2)
        assert set(g) == set(b1 - b2)
        assert set(g.values()) == set(b2 - b1)
        for e, f in g.items():
            assert oracle.is_independent((b1 - {e}) | {f})


def test_exchange_rejects_unequal_sizes() -> None:
    with pytest.raises(ValidationError):
        exchange_bijection(MatroidOracle.free(3), [0], [1, 2])


def test_partial_exchange_maps() -> None:
    oracle = MatroidOracle.uniform(4, 2)
    b2p, g = partial_exchange_maps(oracle, [0, 1], [2])
    assert b2p == frozenset({2})
    assert g == {2: 1}
    assert oracle.is_independent({0, 1} - {g[2]} | {2})


def test_partial_exchange_leaves_augmentable_elements_unmapped() -> None:
    oracle = MatroidOracle.uniform(4, 3)
    b2p, g = partial_exchange_maps(oracle, [0], [1, 2])
    assert b2p == frozenset({2})
    assert g == {2: 0}
    # 1 needs no image: A1 + 1 stays independent
    assert oracle.is_independent({0, 1})


def _brute_force_best(fs: FeasibilitySystem, w: list[Fraction]) -> Fraction:
    best = Fraction(0)
    for mask in range(1 << fs.size):
        if fs.is_feasible_mask(mask):
            best = max(best, sum((w[e] for e in from_mask(mask)), Fraction(0)))
    return best


def test_max_weight_matches_brute_force() -> None:
    rng = np.random.default_rng(11)
    systems = [
        FeasibilitySystem.matching(2, [1, 2]),
        FeasibilitySystem.matching(3, [1, 1, 2]),
        FeasibilitySystem.general(2, 3, MatroidOracle.uniform(6, 2)),
        FeasibilitySystem.general(3, 2, MatroidOracle.partition(6, [[0, 2, 4], [1, 3, 5]], [1, 2])),
    ]
    for fs in systems:
        for _ in range(25):
            w = [Fraction(int(x)) for x in rng.integers(0, 6, size=fs.size)]
            chosen = fs.max_weight_feasible(w)
            assert fs.is_feasible(chosen)
            assert sum((w[e] for e in chosen), Fraction(0)) == _brute_force_best(fs, w)
            assert all(w[e] > 0 for e in chosen)


def test_max_weight_tie_prefers_lower_index() -> None:
    fs = FeasibilitySystem.single_item(2)
    assert fs.max_weight_feasible([5, 5]) == frozenset({0})
    g = FeasibilitySystem.general(2, 1, MatroidOracle.uniform(2, 1))
    assert g.max_weight_feasible([3, 3]) == frozenset({0})


def test_max_weight_rejects_negative_weights() -> None:
    with pytest.raises(ValidationError):
        FeasibilitySystem.single_item(2).max_weight_feasible([1, -1])


def test_system_shapes_and_dependent_subsets() -> None:
    fs = FeasibilitySystem.matching(1, [1, 1])
    assert fs.kind is FeasibilityKind.matching
    assert fs.dependent_subsets == (((0, 1), 1),)
    assert fs.element(1) == (0, 1)
    assert fs.element_index((0, 1)) == 1
    cv = FeasibilitySystem.matching(2, [1, 1]).copies_view()
    assert (cv.n, cv.m) == (4, 1)
    assert not cv.is_feasible([0, 1])  # one parent agent, two items
    with pytest.raises(ValidationError):
        FeasibilitySystem.general(2, 2, MatroidOracle.uniform(3, 1))
