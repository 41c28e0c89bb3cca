import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latwalk.errors import ConfigurationError
from latwalk.grid import (GridDims, apply_cz, basis_state, canonical_vertex_map, from_canonical,
                          inner, piz_state, random_state, selfloop_state, square_state,
                          to_canonical, uniform_state)

even = st.integers(1, 12).map(lambda k: 2 * k)


@pytest.mark.parametrize("rows,cols", [(3, 4), (4, 5), (0, 4), (-2, 4), (4.0, 4), ("4", 4)])
def test_griddims_rejects_bad_sizes(rows, cols):
    with pytest.raises(ConfigurationError):
        GridDims(rows, cols)


def test_griddims_basic():
    d = GridDims(4, 6)
    assert d.N == 24 and d.size == 25 and d.selfloop == 24
    assert not d.is_square()
    with pytest.raises(ConfigurationError):
        d.require_square()
    assert GridDims.square(8) == GridDims(8, 8)


@given(even, even)
def test_index_is_bijection(rows, cols):
    d = GridDims(rows, cols)
    seen = {d.index(i, j) for i in range(rows) for j in range(cols)}
    assert seen == set(range(d.N))
    for idx in range(d.N):
        assert d.index(*d.coords(idx)) == idx


def test_uniform_state_2x2():
    np.testing.assert_allclose(uniform_state(GridDims(2, 2)), [0.5, 0.5, 0.5, 0.5, 0.0])


@given(even, even)
def test_uniform_state_unit_and_no_selfloop(rows, cols):
    d = GridDims(rows, cols)
    pi = uniform_state(d)
    assert abs(np.linalg.norm(pi) - 1) < 1e-14
    assert inner(selfloop_state(d), pi) == 0


def test_cz_examples():
    d = GridDims(4, 4)
    np.testing.assert_array_equal(apply_cz(basis_state(d, (0, 0)), d), -basis_state(d, (0, 0)))
    np.testing.assert_array_equal(apply_cz(basis_state(d, (0, 1)), d), basis_state(d, (0, 1)))
    np.testing.assert_array_equal(apply_cz(selfloop_state(d), d), selfloop_state(d))
    pi = uniform_state(GridDims(8, 8))
    assert abs(inner(pi, apply_cz(pi, GridDims(8, 8))) - 0.5) < 1e-15


@settings(max_examples=30)
@given(even, even, st.integers(0, 2 ** 32 - 1))
def test_cz_involution_and_isometry(rows, cols, seed):
    d = GridDims(rows, cols)
    x = random_state(d, seed)
    y = apply_cz(x, d)
    np.testing.assert_array_equal(apply_cz(y, d), x)
    assert np.linalg.norm(y) == np.linalg.norm(x)


def test_inner_examples():
    d = GridDims(4, 4)
    pi = uniform_state(d)
    assert abs(inner(pi, pi) - 1) < 1e-15
    assert inner(basis_state(d, (0, 0)), basis_state(d, (0, 1))) == 0
    a, b = random_state(d, 1), random_state(d, 2)
    assert inner(1j * a, b) == pytest.approx(-1j * inner(a, b))
    with pytest.raises(ConfigurationError):
        inner(pi, uniform_state(GridDims(4, 6)))


def test_piz_is_cz_of_uniform():
    d = GridDims(6, 8)
    np.testing.assert_allclose(piz_state(d), apply_cz(uniform_state(d), d))


def test_square_state_block():
    d = GridDims(4, 4)
    a = square_state(d, 0, 0)
    assert abs(np.linalg.norm(a) - 1) < 1e-15
    assert sorted(np.flatnonzero(a)) == [0, 1, 4, 5]
    b = square_state(d, 1, 1, odd=True)   # wraps around
    assert sorted(np.flatnonzero(b)) == [0, 3, 12, 15]


@settings(max_examples=40)
@given(st.integers(0, 7), st.integers(0, 9))
def test_canonical_map_moves_mark_to_origin(i, j):
    d = GridDims(8, 10)
    perm = canonical_vertex_map(d, (i, j))
    assert perm[d.index(i, j)] == 0 and perm[d.N] == d.N
    assert sorted(perm) == list(range(d.size))
    x = random_state(d, 3)
    np.testing.assert_array_equal(from_canonical(to_canonical(x, d, (i, j)), d, (i, j)), x)
    np.testing.assert_array_equal(to_canonical(uniform_state(d), d, (i, j)), uniform_state(d))


def test_vertex_out_of_range():
    with pytest.raises(ConfigurationError):
        basis_state(GridDims(4, 4), (4, 0))
