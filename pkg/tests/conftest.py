from __future__ import annotations

import pytest

from lottery_gap_lab.dist.distributions import make_discrete
from lottery_gap_lab.dist.type_space import TypeSpace, product_type_space
from lottery_gap_lab.domain.enums import NumericMode


@pytest.fixture()
def two_item_space() -> TypeSpace:
    """Single agent, two i.i.d. items uniform on {1, 2}."""
    d = make_discrete([1, 2], [1, 1], NumericMode.rational)
    return product_type_space([[d, d]], NumericMode.rational)


@pytest.fixture()
def single_item_space() -> TypeSpace:
    """Single agent, one item uniform on {1, 2, 3}."""
    d = make_discrete([1, 2, 3], [1, 1, 1], NumericMode.rational)
    return product_type_space([[d]], NumericMode.rational)
