"""State space of the walk: torus grid vertices plus one selfloop state.

States are plain complex numpy arrays of length ``N + 1``. Vertex ``(i, j)``
lives at index ``i * n_cols + j`` and the selfloop at index ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class GridDims:
    """Dimensions of an ``n_rows x n_cols`` torus; both must be even."""

    n_rows: int
    n_cols: int

    def __post_init__(self):
        for name in ("n_rows", "n_cols"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {v!r}")
            if v <= 0 or v % 2:
                raise ConfigurationError(f"{name} must be a positive even integer, got {v}")
        object.__setattr__(self, "n_rows", int(self.n_rows))
        object.__setattr__(self, "n_cols", int(self.n_cols))

    @classmethod
    def square(cls, n: int) -> "GridDims":
        return cls(n, n)

    @property
    def N(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def size(self) -> int:
        """Length of a state vector (vertices plus selfloop)."""
        return self.N + 1

    @property
    def selfloop(self) -> int:
        return self.N

    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def require_square(self) -> None:
        if not self.is_square():
            raise ConfigurationError(
                f"square grid required, got {self.n_rows}x{self.n_cols}")

    def index(self, i: int, j: int) -> int:
        self.check_vertex((i, j))
        return i * self.n_cols + j

    def coords(self, idx: int) -> tuple[int, int]:
        if not 0 <= idx < self.N:
            raise ConfigurationError(f"index {idx} is not a grid vertex")
        return divmod(idx, self.n_cols)

    def check_vertex(self, v) -> tuple[int, int]:
        try:
            i, j = (int(x) for x in v)
        except (TypeError, ValueError):
            raise ConfigurationError(f"vertex must be a pair (i, j), got {v!r}") from None
        if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
            raise ConfigurationError(
                f"vertex {(i, j)} outside {self.n_rows}x{self.n_cols} grid")
        return i, j


def check_state(state, dims: GridDims) -> np.ndarray:
    x = np.asarray(state)
    if x.shape != (dims.size,):
        raise ConfigurationError(
            f"state has shape {x.shape}, expected ({dims.size},)")
    return x


def basis_state(dims: GridDims, vertex=None) -> np.ndarray:
    """``|i,j>`` for a vertex, or the selfloop state when ``vertex`` is None."""
    x = np.zeros(dims.size, dtype=complex)
    x[dims.selfloop if vertex is None else dims.index(*vertex)] = 1.0
    return x


def selfloop_state(dims: GridDims) -> np.ndarray:
    return basis_state(dims, None)


def uniform_state(dims: GridDims) -> np.ndarray:
    """``|pi>``: amplitude ``1/sqrt(N)`` on every vertex, zero on the selfloop."""
    x = np.full(dims.size, 1.0 / np.sqrt(dims.N), dtype=complex)
    x[dims.selfloop] = 0.0
    return x


def square_state(dims: GridDims, i: int = 0, j: int = 0, odd: bool = False) -> np.ndarray:
    """Uniform state on one 2x2 tessellation block.

    ``odd=False`` gives ``|a_ij>`` (block with top-left corner ``(2i, 2j)``),
    ``odd=True`` gives ``|b_ij>`` (corner ``(2i+1, 2j+1)``, wrapping around).
    """
    x = np.zeros(dims.size, dtype=complex)
    off = 1 if odd else 0
    for di in (0, 1):
        for dj in (0, 1):
            r = (2 * i + off + di) % dims.n_rows
            c = (2 * j + off + dj) % dims.n_cols
            x[r * dims.n_cols + c] = 0.5
    return x


def cz_signs(dims: GridDims) -> np.ndarray:
    """Diagonal of the cz basis change (-1 on vertices with both coordinates even)."""
    d = np.ones(dims.size)
    grid = d[:dims.N].reshape(dims.n_rows, dims.n_cols)
    grid[::2, ::2] = -1.0
    return d


def apply_cz(state, dims: GridDims) -> np.ndarray:
    x = check_state(state, dims).copy()
    grid = x[:dims.N].reshape(dims.n_rows, dims.n_cols)
    grid[::2, ::2] *= -1
    return x


def piz_state(dims: GridDims) -> np.ndarray:
    """``|pi_z> = cz |pi>``."""
    return apply_cz(uniform_state(dims), dims)


def inner(a, b) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ConfigurationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def norm(x) -> float:
    return float(np.linalg.norm(x))


def random_state(dims: GridDims, rng=None, real: bool = False) -> np.ndarray:
    rng = np.random.default_rng(rng)
    x = rng.standard_normal(dims.size).astype(complex)
    if not real:
        x += 1j * rng.standard_normal(dims.size)
    return x / np.linalg.norm(x)


def canonical_vertex_map(dims: GridDims, marked) -> np.ndarray:
    """Vertex permutation sending ``marked`` to ``(0, 0)`` and preserving both tessellations.

    Even coordinates are shifted (``x -> x - m``); odd ones are mirrored
    (``x -> m - x``), since an odd shift would swap the even and odd
    tessellations. Returns ``perm`` with ``y[perm] = x`` moving a state into
    the canonical frame; the selfloop is fixed. ``|pi>`` is invariant.
    """
    mi, mj = dims.check_vertex(marked)
    rows = np.arange(dims.n_rows)
    cols = np.arange(dims.n_cols)
    rows = (rows - mi) % dims.n_rows if mi % 2 == 0 else (mi - rows) % dims.n_rows
    cols = (cols - mj) % dims.n_cols if mj % 2 == 0 else (mj - cols) % dims.n_cols
    perm = (rows[:, None] * dims.n_cols + cols[None, :]).ravel()
    return np.concatenate([perm, [dims.N]])


def to_canonical(state, dims: GridDims, marked) -> np.ndarray:
    x = check_state(state, dims)
    y = np.empty_like(x)
    y[canonical_vertex_map(dims, marked)] = x
    return y


def from_canonical(state, dims: GridDims, marked) -> np.ndarray:
    y = check_state(state, dims)
    return y[canonical_vertex_map(dims, marked)]
