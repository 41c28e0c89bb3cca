import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latwalk import dense
from latwalk.errors import ConfigurationError
from latwalk.grid import (GridDims, apply_cz, basis_state, piz_state, random_state,
                          selfloop_state, square_state, uniform_state)
from latwalk.operators import (InterpolationParams, MarkedConfig, apply_A, apply_B, apply_F,
                               apply_F1, apply_F2, apply_F_direct, apply_Gt, apply_U, apply_W,
                               apply_WF, build_F_vectors)
from latwalk.spectra import EigLabel, eigenphase, eigenvector_w

SIZES = [4, 8, 16]


def _ops(d, marked=(0, 0), s=None):
    cfg = MarkedConfig(d, marked, None if s is None else InterpolationParams(s))
    fv = build_F_vectors(MarkedConfig(d, (0, 0), cfg.params))
    return cfg, fv, {
        "A": lambda x: apply_A(x, d),
        "B": lambda x: apply_B(x, d),
        "Gt": lambda x: apply_Gt(x, cfg),
        "F1": lambda x: apply_F1(x, fv),
        "F2": lambda x: apply_F2(x, fv),
    }


def test_interpolation_params():
    d = GridDims.square(16)
    p = InterpolationParams.default(d)
    assert p.s == 1 - 1 / 257
    assert abs(math.sin(p.eta) ** 2 - 0.75 * p.s) < 1e-14
    assert abs(abs(p.lam) - 1) < 1e-15
    assert InterpolationParams(1.0).eta == pytest.approx(math.pi / 3)
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ConfigurationError):
            InterpolationParams(bad)


def test_A_examples():
    d = GridDims(4, 4)
    loop = selfloop_state(d)
    np.testing.assert_allclose(apply_A(loop, d), loop)
    a = square_state(d)
    np.testing.assert_allclose(apply_A(a, d), a, atol=1e-15)
    y = apply_A(basis_state(d, (0, 0)), d)
    expect = np.zeros(d.size)
    expect[[0, 1, 4, 5]] = [-0.5, 0.5, 0.5, 0.5]
    np.testing.assert_allclose(y, expect, atol=1e-15)


def test_B_uses_wraparound_blocks():
    d = GridDims(4, 6)
    y = apply_B(basis_state(d, (0, 0)), d)
    assert sorted(np.flatnonzero(np.abs(y) > 1e-15)) == sorted(
        [d.index(0, 0), d.index(0, 5), d.index(3, 0), d.index(3, 5)])
    np.testing.assert_allclose(apply_B(selfloop_state(d), d), selfloop_state(d))


def test_Gt_examples():
    d = GridDims(8, 8)
    cfg = MarkedConfig(d, (2, 3))
    gt = cfg.gt_state()
    np.testing.assert_allclose(apply_Gt(gt, cfg), -gt, atol=1e-15)
    one = MarkedConfig(d, (2, 3), InterpolationParams(1.0))
    g = basis_state(d, (2, 3))
    np.testing.assert_allclose(apply_Gt(g, one), -g)
    np.testing.assert_allclose(apply_Gt(selfloop_state(d), one), selfloop_state(d))
    other = basis_state(d, (5, 5))
    np.testing.assert_array_equal(apply_Gt(other, cfg), other)


@pytest.mark.parametrize("n", SIZES)
@pytest.mark.parametrize("name", ["A", "B", "Gt", "F1", "F2"])
def test_reflections_are_involutions(n, name, rng):
    d = GridDims.square(n)
    _, _, ops = _ops(d, (1, 2))
    op = ops[name]
    for _ in range(3):
        x = random_state(d, rng)
        assert np.linalg.norm(op(op(x)) - x) <= 1e-12
        assert abs(np.linalg.norm(op(x)) - 1) <= 1e-12


@pytest.mark.parametrize("n", SIZES)
def test_U_W_F_preserve_norm(n, rng):
    d = GridDims.square(n)
    cfg, fv, _ = _ops(d, (3, 1))
    for op in (lambda x: apply_U(x, cfg), lambda x: apply_W(x, d), lambda x: apply_F(x, fv)):
        x = random_state(d, rng)
        assert abs(np.linalg.norm(op(x)) - 1) <= 1e-12


@pytest.mark.parametrize("n", [4, 8])
def test_U_equals_cz_WF_cz_full_matrix(n):
    d = GridDims.square(n)
    cfg = MarkedConfig(d)
    cz = dense.matrix_cz(d)
    M = cz @ dense.matrix_W(d) @ dense.matrix_F(cfg) @ cz
    assert np.abs(dense.matrix_U(cfg) - M).max() <= 1e-12
    assert np.abs(dense.matrix_of(lambda x: apply_U(x, cfg), d) - dense.matrix_U(cfg)).max() <= 1e-12


def test_U_on_uniform_matches_dense_at_256():
    d = GridDims.square(16)
    cfg = MarkedConfig(d)
    y = apply_U(uniform_state(d), cfg)
    oracle = dense.matrix_U(cfg) @ uniform_state(d)
    assert np.abs(y - oracle).max() <= 1e-14
    # frozen values: the state stays real and takes few distinct amplitudes
    assert np.abs(y.imag).max() == 0
    np.testing.assert_allclose(
        np.unique(np.round(y.real, 13)),
        [-0.0301584808248, -0.0232554618541, 0.0313715953307, 0.0625, 0.0936284046693, 0.1551584808248],
        atol=1e-12)
    assert y[d.N].real == pytest.approx(-0.023255461854077987, abs=1e-15)


def test_W_fixed_vectors_and_eigenvector():
    d = GridDims.square(16)
    pz, loop = piz_state(d), selfloop_state(d)
    np.testing.assert_allclose(apply_W(pz, d), pz, atol=1e-14)
    np.testing.assert_allclose(apply_W(loop, d), loop)
    w = eigenvector_w(d, EigLabel(1, 0, "00"))
    th = eigenphase(d, 1, 0)
    assert np.linalg.norm(apply_W(w, d) - np.exp(1j * th) * w) <= 1e-10


def test_W_is_real(rng):
    d = GridDims(6, 8)
    x = random_state(d, rng, real=True)
    assert np.abs(apply_W(x, d).imag).max() <= 1e-14


def test_W_matches_definition():
    d = GridDims(4, 6)
    cz = dense.matrix_cz(d)
    M = cz @ dense.matrix_B(d) @ dense.matrix_A(d) @ cz
    assert np.abs(dense.matrix_of(lambda x: apply_W(x, d), d) - M).max() <= 1e-14


def test_F_vectors_default_form():
    d = GridDims.square(8)
    N = d.N
    fv = build_F_vectors(MarkedConfig(d))
    expect = math.sqrt(N / (N + 4)) * fv.kminus - 2 / math.sqrt(N + 4) * selfloop_state(d)
    assert np.abs(fv.f1 - expect).max() <= 1e-15
    for v in (fv.f1, fv.f2, fv.kplus, fv.kminus):
        assert abs(np.linalg.norm(v) - 1) <= 1e-14
    assert abs(np.vdot(fv.kplus, fv.kminus)) <= 1e-15
    assert abs(np.vdot(fv.f1, fv.kplus)) <= 1e-15
    eta = InterpolationParams.default(d).eta
    assert np.abs(fv.f2 - (math.sin(2 * eta) * fv.kplus + math.cos(2 * eta) * fv.f1)).max() <= 1e-15


def test_F_vectors_need_even_mark():
    with pytest.raises(ConfigurationError):
        build_F_vectors(MarkedConfig(GridDims(8, 8), (1, 2)))
    build_F_vectors(MarkedConfig(GridDims(8, 8), (2, 4)))


def test_F_identity_at_s_zero():
    d = GridDims.square(4)
    cfg = MarkedConfig(d, (0, 0), InterpolationParams(0.0))
    fv = build_F_vectors(cfg)
    for idx in range(d.size):
        e = np.zeros(d.size, dtype=complex)
        e[idx] = 1
        assert np.abs(apply_F_direct(e, cfg) - e).max() <= 1e-14
        assert np.abs(apply_F(e, fv) - e).max() <= 1e-14


def test_F_eigenvectors():
    d = GridDims.square(4)
    cfg = MarkedConfig(d)
    fv = build_F_vectors(cfg)
    lam = cfg.params.lam
    assert np.linalg.norm(apply_F(fv.f_plus(), fv) - lam * fv.f_plus()) <= 1e-12
    assert np.linalg.norm(apply_F(fv.f_minus(), fv) - np.conj(lam) * fv.f_minus()) <= 1e-12


@pytest.mark.parametrize("n", SIZES)
def test_F_is_product_of_reflections(n, rng):
    d = GridDims.square(n)
    cfg = MarkedConfig(d, (2, 0))
    fv = build_F_vectors(cfg)
    for _ in range(3):
        x = random_state(d, rng)
        assert np.linalg.norm(apply_F_direct(x, cfg) - apply_F(x, fv)) <= 1e-12


def test_F_identity_off_span(rng):
    d = GridDims.square(8)
    fv = build_F_vectors(MarkedConfig(d))
    Q, _ = np.linalg.qr(np.array([fv.kplus, fv.f1]).T)
    x = random_state(d, rng)
    y = x - Q @ (Q.conj().T @ x)
    assert np.linalg.norm(apply_F(y, fv) - y) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 7), st.integers(0, 7), st.floats(0.01, 0.99))
def test_U_conjugated_by_canonical_map(i, j, s):
    from latwalk.grid import to_canonical
    d = GridDims.square(8)
    x = random_state(d, 7)
    p = InterpolationParams(s)
    lhs = to_canonical(apply_U(x, MarkedConfig(d, (i, j), p)), d, (i, j))
    rhs = apply_U(to_canonical(x, d, (i, j)), MarkedConfig(d, (0, 0), p))
    assert np.linalg.norm(lhs - rhs) <= 1e-12


def test_walk_power_relation():
    d = GridDims.square(8)
    cfg = MarkedConfig(d)
    fv = build_F_vectors(cfg)
    x = uniform_state(d).astype(complex)
    z = piz_state(d).astype(complex)
    for _ in range(3):
        x, z = apply_U(x, cfg), apply_WF(z, fv)
        assert np.linalg.norm(x - apply_cz(z, d)) <= 1e-10


def test_dense_guard():
    from latwalk.errors import ConfigurationError as CE
    with pytest.raises(CE):
        dense.matrix_A(GridDims.square(34))
