import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eigenmc import StateGrid, index_to_value, value_to_index
from eigenmc.grid import CorruptStateError


@pytest.mark.parametrize(
    "grid, value, expected",
    [
        (StateGrid(0.0, 0.1, 21), 1.0, 10),
        (StateGrid(80.0, 1.0, 41), 79.0, 0),
        (StateGrid(0.0, 0.1, 21), 5.0, 20),
        (StateGrid(0.0, 0.1, 21), 1.14, 11),
        (StateGrid(80.0, 1.0, 41), 80.0, 0),
        (StateGrid(80.0, 1.0, 41), -1e9, 0),
    ],
)
def test_value_to_index(grid, value, expected):
    assert value_to_index(grid, value) == expected


@pytest.mark.parametrize(
    "grid, index, expected",
    [
        (StateGrid(0.0, 0.1, 21), 10, 1.0),
        (StateGrid(80.0, 1.0, 41), 0, 80.0),
        (StateGrid(0.0, 0.1, 21), 20, 2.0),
    ],
)
def test_index_to_value(grid, index, expected):
    assert index_to_value(grid, index) == pytest.approx(expected, abs=1e-12)


def test_ties_round_to_lower_index():
    g = StateGrid(0.0, 1.0, 5)
    assert value_to_index(g, 1.5) == 1
    assert value_to_index(g, 2.5) == 2
    assert value_to_index(g, 2.5000001) == 3


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_values_rejected(grid21, bad):
    with pytest.raises(CorruptStateError):
        value_to_index(grid21, bad)
    with pytest.raises(CorruptStateError):
        grid21.indices([1.0, bad])


@pytest.mark.parametrize("index", [-1, 21, 2.5])
def test_index_out_of_range(grid21, index):
    with pytest.raises(IndexError):
        index_to_value(grid21, index)


@pytest.mark.parametrize("args", [(0.0, 0.0, 5), (0.0, -1.0, 5), (0.0, 1.0, 1), (math.nan, 1.0, 5)])
def test_invalid_grids(args):
    with pytest.raises(ValueError):
        StateGrid(*args)


def test_forty_state_variant_is_available():
    g = StateGrid(80.0, 1.0, 40)
    assert g.upper_value == 119.0
    assert value_to_index(g, 120.0) == 39


grids = st.builds(
    StateGrid,
    st.floats(-1e3, 1e3),
    st.floats(1e-3, 1e2),
    st.integers(2, 200),
)


@given(grids)
def test_round_trip_every_index(g):
    idx = np.arange(g.n_states)
    assert np.array_equal(g.indices(g.values), idx)
    for i in (0, g.n_states // 2, g.n_states - 1):
        assert value_to_index(g, index_to_value(g, i)) == i


@given(grids, st.floats(0, 1))
def test_nearest_state_within_half_increment(g, frac):
    v = g.lower_value + frac * (g.upper_value - g.lower_value)
    assert abs(index_to_value(g, value_to_index(g, v)) - v) <= g.increment / 2 * (1 + 1e-9)


@given(grids, st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_monotone_and_clamped(g, a, b):
    lo, hi = sorted((a, b))
    i, j = value_to_index(g, lo), value_to_index(g, hi)
    assert 0 <= i <= j <= g.n_states - 1
    if lo < g.lower_value:
        assert i == 0
    if hi > g.upper_value:
        assert j == g.n_states - 1
