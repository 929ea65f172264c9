from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.dist.distributions import (
    convolve,
    equal_revenue_discrete,
    make_discrete,
    point_mass,
    uniform_grid,
)
from lottery_gap_lab.dist.type_space import (
    additive_type_space,
    explicit_type_space,
    product_type_space,
)
from lottery_gap_lab.domain.enums import NumericMode, Structure

R = NumericMode.rational


def test_make_discrete_sorts_merges_and_normalizes() -> None:
    d = make_discrete([3, 1, 3, 2], [1, 1, 1, 0], R)
    assert d.support == (Fraction(1), Fraction(3))
    assert d.probs == (Fraction(1, 3), Fraction(2, 3))


@pytest.mark.parametrize(
    ("support", "probs"),
    [([], []), ([1, 2], [1]), ([-1], [1]), ([1], [-1]), ([1, 2], [0, 0])],
)
def test_make_discrete_rejects_bad_input(support, probs) -> None:
    with pytest.raises(ValidationError):
        make_discrete(support, probs, R)


def test_cdf_survival_moments() -> None:
    d = make_discrete([1, 2, 4], [2, 1, 1], R)
    assert d.cdf(2) == Fraction(3, 4)
    assert d.survival(2) == Fraction(1, 2)
    assert d.survival(3) == Fraction(1, 4)
    assert d.mean() == Fraction(2)
    assert d.variance() == Fraction(3, 2)
    assert d.as_float().as_rational().probs == d.probs


def test_point_mass() -> None:
    d = point_mass(5, R)
    assert d.support == (Fraction(5),)
    assert d.probs == (Fraction(1),)


def test_equal_revenue_small_grid() -> None:
    d = equal_revenue_discrete(4, 2, R)
    assert d.support == (Fraction(1), Fraction(2), Fraction(4))
    assert d.probs == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    # every grid price earns revenue 1
    for x in d.support:
        assert x * d.survival(x) == 1


def test_equal_revenue_rejects_bad_bound() -> None:
    with pytest.raises(ValidationError):
        equal_revenue_discrete(1, 4, R)
    with pytest.raises(ValidationError):
        equal_revenue_discrete(4, 0, R)


def test_uniform_grid_midpoints() -> None:
    d = uniform_grid(0, 1, "1/4", R)
    assert d.support == (Fraction(1, 8), Fraction(3, 8), Fraction(5, 8), Fraction(7, 8))
    assert all(p == Fraction(1, 4) for p in d.probs)
    f = uniform_grid(5, 6, "0.001", NumericMode.float)
    assert len(f) == 1000
    assert f.support[0] == pytest.approx(5.0005)


def test_uniform_grid_rejects_non_dividing_step() -> None:
    with pytest.raises(ValidationError):
        uniform_grid(0, 1, "0.3", R)


def test_convolve_small() -> None:
    a = make_discrete([0, 1], [1, 1], R)
    s = convolve(a, a)
    assert s.support == (Fraction(0), Fraction(1), Fraction(2))
    assert s.probs == (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def test_product_space_enumeration_order() -> None:
    d1 = make_discrete([1, 2], [1, 3], R)
    d2 = make_discrete([5, 7, 9], [1, 1, 2], R)
    ts = product_type_space([[d1, d2]], R)
    assert ts.n == 1 and ts.m == 2
    assert ts.num_profiles == 6
    assert ts.total_probability() == 1
    values = ts.all_values
    assert list(values[0, 0]) == [1, 5]
    assert list(values[1, 0]) == [1, 7]
    assert list(values[3, 0]) == [2, 5]
    assert ts.item_marginal(0, 1) is ts.item_dists[0][1]


def test_two_agent_profiles_and_lookup() -> None:
    d = make_discrete([1, 2], [1, 1], R)
    ts = product_type_space([[d], [d]], R)
    assert ts.shape == (2, 2)
    profiles = list(ts.profiles())
    assert [p.types for p in profiles] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert ts.profile_index((1, 0)) == 2
    inv = ts.profile_lookup(1)
    assert inv[1, 0] == 1  # agent 1 type 1, agent 0 type 0
    opp = list(ts.opponent_profiles(0))
    assert [o[1] for o in opp] == [(0,), (1,)]
    assert sum(o[2] for o in opp) == 1


def test_capacity_cap_and_override() -> None:
    d = make_discrete(list(range(10)), [1] * 10, R)
    with pytest.raises(CapacityError):
        product_type_space([[d, d]], R, max_profiles=50)
    ts = product_type_space([[d, d]], R, max_profiles=100)
    assert ts.num_profiles == 100


def test_additive_space_matches_convolution() -> None:
    t0 = make_discrete([0, 1, 3], [1, 2, 1], R)
    t1 = make_discrete([0, 2], [1, 1], R)
    t2 = make_discrete([1, 4], [3, 1], R)
    ts = additive_type_space([t0, t1, t2], R)
    assert ts.structure is Structure.additive
    assert ts.m == 2
    bases = ts.agents[0].bases
    assert np.all(ts.agents[0].values == bases[:, :1] + bases[:, 1:])
    assert ts.item_marginal(0, 0) == convolve(t0, t1)
    assert ts.item_marginal(0, 1) == convolve(t0, t2)


def test_explicit_space_normalizes() -> None:
    ts = explicit_type_space([[1, 0], [0, 1], [2, 2]], [1, 1, 2], R)
    assert ts.structure is Structure.explicit
    assert list(ts.agents[0].probs) == [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
    with pytest.raises(ValidationError):
        explicit_type_space([[1, 0], [1]], [1, 1], R)
