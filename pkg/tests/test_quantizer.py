import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaquant.quantizer import QuantizerSpec, cell_bounds, cell_index, quantize

finite = st.floats(-1e6, 1e6, allow_nan=False)
thresholds = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=6).map(sorted)


@pytest.mark.parametrize("x, ts, level", [
    (0.3, [0.5], 1),
    (0.7, [0.5], 2),
    (0.5, [0.5], 1),
    (0.0, [-1, 1], 2),
    (-2, [-1, 1], 1),
    (3, [-1, 1], 3),
    (1, [-1, 1], 2),
    (-1, [-1, 1], 1),
])
def test_quantize_examples(x, ts, level):
    q = QuantizerSpec(ts)
    assert quantize(x, q) == level
    assert cell_index(x, q) == level


@pytest.mark.parametrize("level, ts, bounds", [
    (1, [0.5], (-math.inf, 0.5)),
    (2, [-1, 1], (-1, 1)),
    (3, [-1, 1], (1, math.inf)),
])
def test_cell_bounds(level, ts, bounds):
    assert cell_bounds(level, QuantizerSpec(ts)) == bounds


@pytest.mark.parametrize("level", [0, 4, -1])
def test_cell_bounds_out_of_range(level):
    with pytest.raises(ValueError):
        cell_bounds(level, QuantizerSpec([-1, 1]))


def test_unsorted_thresholds_rejected():
    with pytest.raises(ValueError, match="not sorted"):
        QuantizerSpec([1, -1])


def test_empty_and_nonfinite_rejected():
    with pytest.raises(ValueError):
        QuantizerSpec([])
    with pytest.raises(ValueError):
        QuantizerSpec([0.0, math.inf])


def test_equal_thresholds_give_empty_cell():
    q = QuantizerSpec([0.0, 0.0, 1.0])
    assert quantize(0.0, q) == 1
    assert quantize(1e-12, q) == 3
    assert all(quantize(x, q) != 2 for x in np.linspace(-3, 3, 1001))


def test_bound_and_levels():
    q = QuantizerSpec([-2.0, 0.5, 1.0])
    assert q.m == 3 and q.levels == 4
    assert q.bound() == 2.0


@given(finite, finite, thresholds)
def test_monotone(x, y, ts):
    q = QuantizerSpec(ts)
    lo, hi = min(x, y), max(x, y)
    assert quantize(lo, q) <= quantize(hi, q)


@given(finite, thresholds)
def test_partition(x, ts):
    q = QuantizerSpec(ts)
    level = quantize(x, q)
    inside = [j for j in range(1, q.levels + 1)
              if cell_bounds(j, q)[0] < x <= cell_bounds(j, q)[1]]
    assert inside == [level]


def test_cell_index_matches_case_split():
    rng = np.random.default_rng(1)
    q = QuantizerSpec(sorted(rng.normal(size=4)))
    ts = q.thresholds
    for x in rng.normal(scale=2, size=100_000):
        if x <= ts[0]:
            ref = 1
        elif x > ts[-1]:
            ref = len(ts) + 1
        else:
            ref = next(i for i in range(2, len(ts) + 1) if ts[i - 2] < x <= ts[i - 1])
        assert cell_index(x, q) == ref
