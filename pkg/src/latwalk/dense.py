"""Explicit (N+1)x(N+1) matrices for small grids.

Built from outer products of the tessellation and interpolation states, not
from the kernels in ``operators``, so they serve as an independent check.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .grid import GridDims, cz_signs, square_state

MAX_DENSE_N = 1024


def _guard(dims: GridDims) -> None:
    if dims.N > MAX_DENSE_N:
        raise ConfigurationError(
            f"dense matrices limited to N <= {MAX_DENSE_N}, got N = {dims.N}")


def _selfloop_projector(dims):
    P = np.zeros((dims.size, dims.size))
    P[dims.N, dims.N] = 1.0
    return P


def tessellation_projector(dims: GridDims, odd: bool) -> np.ndarray:
    _guard(dims)
    P = np.zeros((dims.size, dims.size))
    for i in range(dims.n_rows // 2):
        for j in range(dims.n_cols // 2):
            a = square_state(dims, i, j, odd=odd).real
            P += np.outer(a, a)
    return P


def matrix_A(dims: GridDims) -> np.ndarray:
    return 2 * tessellation_projector(dims, False) + 2 * _selfloop_projector(dims) - np.eye(dims.size)


def matrix_B(dims: GridDims) -> np.ndarray:
    return 2 * tessellation_projector(dims, True) + 2 * _selfloop_projector(dims) - np.eye(dims.size)


def matrix_cz(dims: GridDims) -> np.ndarray:
    _guard(dims)
    return np.diag(cz_signs(dims))


def reflection(v) -> np.ndarray:
    """``I - 2|v><v|`` for a unit vector ``v``."""
    v = np.asarray(v)
    return np.eye(v.size) - 2 * np.outer(v, v.conj())


def matrix_Gt(config) -> np.ndarray:
    _guard(config.dims)
    return reflection(config.gt_state().real)


def matrix_U(config) -> np.ndarray:
    d = config.dims
    G = matrix_Gt(config)
    return matrix_B(d) @ G @ matrix_A(d) @ G


def matrix_W(dims: GridDims) -> np.ndarray:
    Z = matrix_cz(dims)
    return Z @ matrix_B(dims) @ matrix_A(dims) @ Z


def matrix_F(config) -> np.ndarray:
    d = config.dims
    Z = matrix_cz(d)
    A = matrix_A(d)
    G = matrix_Gt(config)
    return Z @ A @ G @ A @ G @ Z


def matrix_of(op, dims: GridDims) -> np.ndarray:
    """Materialize a kernel ``op(x) -> y`` column by column."""
    _guard(dims)
    cols = []
    for k in range(dims.size):
        e = np.zeros(dims.size, dtype=complex)
        e[k] = 1.0
        cols.append(op(e))
    return np.array(cols).T


def eigenphases(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in (-pi, pi] and eigenvectors of a unitary matrix."""
    vals, vecs = np.linalg.eig(M)
    return np.angle(vals), vecs


def smallest_positive_eigenphase(M: np.ndarray, floor: float = 1e-9) -> float:
    ph, _ = eigenphases(M)
    return float(ph[ph > floor].min())
