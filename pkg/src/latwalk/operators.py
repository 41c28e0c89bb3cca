"""Walk operators as O(N) kernels on state vectors.

Tessellation reflections ``A`` and ``B``, the interpolated marked reflection
``Gt``, the walk step ``U = B Gt A Gt`` and the cz-conjugated operators
``W = cz B A cz`` and ``F = cz A Gt A Gt cz = F1 F2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .grid import GridDims, apply_cz, basis_state, check_state, selfloop_state, square_state


@dataclass(frozen=True)
class InterpolationParams:
    """Selfloop weight ``s`` with derived angle ``eta`` and phase ``lam = exp(4i eta)``."""

    s: float

    def __post_init__(self):
        s = float(self.s)
        if not 0.0 <= s <= 1.0 or not np.isfinite(s):
            raise ConfigurationError(f"s must lie in [0, 1], got {self.s!r}")
        object.__setattr__(self, "s", s)

    @classmethod
    def default(cls, dims: GridDims) -> "InterpolationParams":
        return cls(1.0 - 1.0 / (dims.N + 1))

    @property
    def eta(self) -> float:
        # sin^2(eta) = 3s/4, eta in [0, pi/3]
        return float(np.arcsin(np.sqrt(0.75 * self.s)))

    @property
    def lam(self) -> complex:
        return complex(np.exp(4j * self.eta))


@dataclass(frozen=True)
class MarkedConfig:
    dims: GridDims
    marked: tuple = (0, 0)
    params: InterpolationParams = None

    def __post_init__(self):
        object.__setattr__(self, "marked", self.dims.check_vertex(self.marked))
        if self.params is None:
            object.__setattr__(self, "params", InterpolationParams.default(self.dims))
        elif not isinstance(self.params, InterpolationParams):
            object.__setattr__(self, "params", InterpolationParams(self.params))

    @property
    def s(self) -> float:
        return self.params.s

    @property
    def marked_index(self) -> int:
        return self.dims.index(*self.marked)

    def g_state(self) -> np.ndarray:
        return basis_state(self.dims, self.marked)

    def gt_state(self) -> np.ndarray:
        """``|g~> = sqrt(s)|g> + sqrt(1-s)|selfloop>``."""
        x = np.zeros(self.dims.size, dtype=complex)
        x[self.marked_index] = np.sqrt(self.s)
        x[self.dims.selfloop] = np.sqrt(1.0 - self.s)
        return x


def _block_reflect(grid: np.ndarray) -> np.ndarray:
    # 2P - I on each 2x2 block: v_m -> sum(v)/2 - v_m
    nr, nc = grid.shape
    blocks = grid.reshape(nr // 2, 2, nc // 2, 2)
    half_sum = 0.5 * blocks.sum(axis=(1, 3), keepdims=True)
    return (half_sum - blocks).reshape(nr, nc)


def apply_A(state, dims: GridDims) -> np.ndarray:
    """Reflection about the even tessellation (blocks at even corners); fixes the selfloop."""
    x = check_state(state, dims)
    out = np.empty_like(x, dtype=np.result_type(x, float))
    out[:dims.N] = _block_reflect(x[:dims.N].reshape(dims.n_rows, dims.n_cols)).ravel()
    out[dims.N] = x[dims.N]
    return out


def apply_B(state, dims: GridDims) -> np.ndarray:
    """Reflection about the odd tessellation (blocks at odd corners, wrapping around)."""
    x = check_state(state, dims)
    out = np.empty_like(x, dtype=np.result_type(x, float))
    grid = np.roll(x[:dims.N].reshape(dims.n_rows, dims.n_cols), (-1, -1), axis=(0, 1))
    out[:dims.N] = np.roll(_block_reflect(grid), (1, 1), axis=(0, 1)).ravel()
    out[dims.N] = x[dims.N]
    return out


def apply_Gt(state, config: MarkedConfig) -> np.ndarray:
    """``I - 2|g~><g~|``; touches only the marked and selfloop amplitudes."""
    dims = config.dims
    x = check_state(state, dims).astype(np.result_type(state, float), copy=True)
    m, loop = config.marked_index, dims.selfloop
    a, b = np.sqrt(config.s), np.sqrt(1.0 - config.s)
    c = a * x[m] + b * x[loop]
    x[m] -= 2 * c * a
    x[loop] -= 2 * c * b
    return x


def apply_U(state, config: MarkedConfig) -> np.ndarray:
    """One walk step ``B Gt A Gt`` (rightmost first)."""
    dims = config.dims
    x = apply_Gt(state, config)
    x = apply_A(x, dims)
    x = apply_Gt(x, config)
    return apply_B(x, dims)


def apply_W(state, dims: GridDims) -> np.ndarray:
    """``cz B A cz``; real, input independent."""
    return apply_cz(apply_B(apply_A(apply_cz(state, dims), dims), dims), dims)


def apply_F_direct(state, config: MarkedConfig) -> np.ndarray:
    """``cz A Gt A Gt cz`` composed from the kernels (no rank-one shortcut)."""
    dims = config.dims
    x = apply_cz(state, dims)
    x = apply_Gt(x, config)
    x = apply_A(x, dims)
    x = apply_Gt(x, config)
    x = apply_A(x, dims)
    return apply_cz(x, dims)


@dataclass(frozen=True)
class FVectors:
    """Reflection axes of ``F = F1 F2`` and the states they are built from.

    ``kplus = (|g> + |a>)/sqrt(3)`` and ``kminus = |g> - |a>`` where ``|a>`` is
    the even block containing the marked vertex.
    """

    config: MarkedConfig
    f1: np.ndarray
    f2: np.ndarray
    kplus: np.ndarray
    kminus: np.ndarray
    support: np.ndarray = field(repr=False)

    @property
    def dims(self) -> GridDims:
        return self.config.dims

    def f_plus(self) -> np.ndarray:
        """Eigenvector of ``F`` with eigenvalue ``lam``."""
        return (self.kplus - 1j * self.f1) / np.sqrt(2)

    def f_minus(self) -> np.ndarray:
        return (self.kplus + 1j * self.f1) / np.sqrt(2)


def build_F_vectors(config: MarkedConfig) -> FVectors:
    """Build ``|f1>``, ``|f2>``, ``|+>``, ``|->`` for a mark with even coordinates.

    The cz frame singles out even-even vertices, so the decomposition only
    holds as written when the marked vertex sits at a corner of an even block.
    """
    dims = config.dims
    mi, mj = config.marked
    if mi % 2 or mj % 2:
        raise ConfigurationError(
            "F decomposition needs a marked vertex with even coordinates; "
            "map the problem with grid.canonical_vertex_map first")
    s = config.s
    eta = config.params.eta
    g = config.g_state()
    a = square_state(dims, mi // 2, mj // 2)
    loop = selfloop_state(dims)
    kplus = (g + a) / np.sqrt(3)
    kminus = g - a
    f1 = (np.sqrt(s) * kminus - 2 * np.sqrt(1 - s) * loop) / np.sqrt(4 - 3 * s)
    f2 = np.sin(2 * eta) * kplus + np.cos(2 * eta) * f1
    support = np.flatnonzero(np.abs(a) + np.abs(loop) > 0)
    return FVectors(config, f1, f2, kplus, kminus, support)


def _reflect_sparse(state, axis: np.ndarray, support: np.ndarray) -> np.ndarray:
    x = np.array(state, dtype=np.result_type(state, axis, float), copy=True)
    v = axis[support]
    x[support] -= 2 * np.vdot(v, x[support]) * v
    return x


def apply_F1(state, fvecs: FVectors) -> np.ndarray:
    """``I - 2|f1><f1|`` (rank-one, at most five amplitudes touched)."""
    return _reflect_sparse(check_state(state, fvecs.dims), fvecs.f1, fvecs.support)


def apply_F2(state, fvecs: FVectors) -> np.ndarray:
    return _reflect_sparse(check_state(state, fvecs.dims), fvecs.f2, fvecs.support)


def apply_F(state, fvecs: FVectors) -> np.ndarray:
    return apply_F1(apply_F2(state, fvecs), fvecs)


def apply_WF1(state, fvecs: FVectors) -> np.ndarray:
    return apply_W(apply_F1(state, fvecs), fvecs.dims)


def apply_WF(state, fvecs: FVectors) -> np.ndarray:
    return apply_W(apply_F(state, fvecs), fvecs.dims)
