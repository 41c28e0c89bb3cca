"""Running the walks: main search ``U`` on ``|pi>``, the intermediate ``W F1`` on ``|pi_z>``,
the ``s = 1`` baseline and the selfloop-to-mark amplification stage."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import secular
from .errors import ConfigurationError, NumericError
from .grid import GridDims, piz_state, selfloop_state, uniform_state
from .operators import (InterpolationParams, MarkedConfig, apply_Gt, apply_U,
                        apply_WF1, build_F_vectors)

MAX_STEPS = 10_000_000
NORM_DRIFT_LIMIT = 1e-9
OUTPUT_POINTS = 10_000
POLICIES = ("auto", "fixed", "sweep")


@dataclass(frozen=True)
class RunConfig:
    """What to run and for how long.

    ``policy`` is ``auto`` (stop at ``floor(pi/beta)`` or ``floor(pi/phi1)``),
    ``fixed`` (exactly ``steps``) or ``sweep`` (run ``steps`` and report the peak).
    ``s = None`` means the default ``1 - 1/(N+1)``.
    """

    dims: GridDims
    marked: tuple = (0, 0)
    s: float | None = None
    policy: str = "auto"
    steps: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "marked", self.dims.check_vertex(self.marked))
        if self.policy not in POLICIES:
            raise ConfigurationError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if self.policy != "auto":
            if self.steps is None or int(self.steps) != self.steps or not 0 <= self.steps <= MAX_STEPS:
                raise ConfigurationError(f"policy {self.policy!r} needs 0 <= steps <= {MAX_STEPS}")
        else:
            self.dims.require_square()
        if self.s is not None and not 0.0 < float(self.s) <= 1.0:
            raise ConfigurationError(f"s must lie in (0, 1], got {self.s}")

    @property
    def s_value(self) -> float:
        return InterpolationParams.default(self.dims).s if self.s is None else float(self.s)

    def marked_config(self) -> MarkedConfig:
        return MarkedConfig(self.dims, self.marked, InterpolationParams(self.s_value))


@dataclass
class SearchTrajectory:
    """Per-step probabilities; index ``t`` is the state after ``t`` steps."""

    steps: int
    p_selfloop: np.ndarray
    p_marked: np.ndarray
    norm_drift: np.ndarray
    final_state: np.ndarray = field(repr=False)
    phi1: float | None = None
    beta: float | None = None

    @property
    def peak_step(self) -> int:
        return int(np.argmax(self.p_selfloop))

    @property
    def peak_value(self) -> float:
        return float(self.p_selfloop.max())

    @property
    def marked_peak_step(self) -> int:
        return int(np.argmax(self.p_marked))

    @property
    def marked_peak_value(self) -> float:
        return float(self.p_marked.max())

    @property
    def final_p_selfloop(self) -> float:
        return float(self.p_selfloop[-1])

    def downsample_stride(self) -> int:
        return max(1, -(-self.steps // OUTPUT_POINTS))

    def rows(self):
        """``(step, p_selfloop, p_marked, norm_drift)`` rows, down-sampled, last step always kept."""
        idx = list(range(0, self.steps + 1, self.downsample_stride()))
        if idx[-1] != self.steps:
            idx.append(self.steps)
        for t in idx:
            yield t, float(self.p_selfloop[t]), float(self.p_marked[t]), float(self.norm_drift[t])


def _run(step, state, n_steps, marked_index, loop_index, check_drift=True):
    if n_steps > MAX_STEPS:
        raise ConfigurationError(f"step count {n_steps} exceeds the cap {MAX_STEPS}")
    p_loop = np.empty(n_steps + 1)
    p_mark = np.empty(n_steps + 1)
    drift = np.empty(n_steps + 1)
    x = state
    for t in range(n_steps + 1):
        if t:
            x = step(x)
        p_loop[t] = abs(x[loop_index]) ** 2
        p_mark[t] = abs(x[marked_index]) ** 2
        drift[t] = abs(np.linalg.norm(x) - 1.0)
        if check_drift and drift[t] > NORM_DRIFT_LIMIT:
            raise NumericError(f"norm drift {drift[t]:.3e} exceeds {NORM_DRIFT_LIMIT} at step {t}")
    return p_loop, p_mark, drift, x


def main_walk_phases(dims: GridDims, s=None) -> tuple[float, float]:
    """``(phi1, beta)`` for the walk; both are independent of where the mark sits."""
    if s is not None and float(s) >= 1.0:
        raise ConfigurationError("auto step policy needs s < 1 (no rotational subspace at s = 1)")
    wf1 = secular.analyze_wf1(dims, s)
    return wf1.phi1, secular.beta(dims, s, wf1).alpha


def _resolve_steps(config: RunConfig, which: str):
    if config.policy != "auto":
        return int(config.steps), None, None
    phi1, beta = main_walk_phases(config.dims, config.s)
    rate = beta if which == "main" else phi1
    return int(math.floor(math.pi / rate)), phi1, beta


def run_main_walk(config: RunConfig) -> SearchTrajectory:
    """Apply ``U`` to ``|pi>`` and record what a measurement would see each step."""
    n_steps, phi1, beta = _resolve_steps(config, "main")
    mc = config.marked_config()
    dims = config.dims
    p_loop, p_mark, drift, x = _run(lambda v: apply_U(v, mc), uniform_state(dims).astype(complex),
                                    n_steps, mc.marked_index, dims.selfloop)
    return SearchTrajectory(n_steps, p_loop, p_mark, drift, x, phi1, beta)


def run_intermediate_walk(config: RunConfig) -> SearchTrajectory:
    """Apply ``W F1`` to ``|pi_z>``.

    This walk lives in the cz frame where the mark sits at an even block corner,
    so it is run with the mark at the origin; ``config.marked`` only labels output.
    """
    n_steps, phi1, beta = _resolve_steps(config, "intermediate")
    dims = config.dims
    mc = MarkedConfig(dims, (0, 0), InterpolationParams(config.s_value))
    fv = build_F_vectors(mc)
    p_loop, p_mark, drift, x = _run(lambda v: apply_WF1(v, fv), piz_state(dims).astype(complex),
                                    n_steps, 0, dims.selfloop)
    return SearchTrajectory(n_steps, p_loop, p_mark, drift, x, phi1, beta)


def baseline_sweep_length(dims: GridDims) -> int:
    """Steps covering the first marked-vertex peak of the ``s = 1`` walk."""
    N = dims.N
    return int(math.ceil(2 * math.sqrt(N * math.log(N))))


def run_baseline(config: RunConfig) -> SearchTrajectory:
    """The ``s = 1`` walk (selfloop decoupled); the figure of merit is the ``p_marked`` peak."""
    if config.s is not None and float(config.s) != 1.0:
        raise ConfigurationError(f"baseline runs at s = 1, got s = {config.s}")
    steps = config.steps if config.policy != "auto" else baseline_sweep_length(config.dims)
    cfg = RunConfig(config.dims, config.marked, 1.0, "sweep", steps)
    mc = cfg.marked_config()
    p_loop, p_mark, drift, x = _run(lambda v: apply_U(v, mc), uniform_state(cfg.dims).astype(complex),
                                    int(steps), mc.marked_index, cfg.dims.selfloop)
    return SearchTrajectory(int(steps), p_loop, p_mark, drift, x)


def scan_peak(config: RunConfig) -> tuple[SearchTrajectory, int]:
    """Run the main walk to twice the auto count; return the trajectory and the auto count."""
    n_auto, phi1, beta = _resolve_steps(RunConfig(config.dims, config.marked, config.s), "main")
    traj = run_main_walk(RunConfig(config.dims, config.marked, config.s, "fixed", 2 * n_auto))
    traj.phi1, traj.beta = phi1, beta
    return traj, n_auto


# --- amplitude amplification ---------------------------------------------------


def amplification_steps(dims: GridDims, s=None) -> int:
    """``floor(pi / (2 gamma))`` with ``sin(gamma) = <selfloop|g~>``."""
    s = InterpolationParams.default(dims).s if s is None else float(s)
    if not 0.0 <= s < 1.0:
        raise ConfigurationError(f"amplification needs s in [0, 1), got {s}")
    gamma = math.asin(math.sqrt(1.0 - s))
    return int(math.floor(math.pi / (2 * gamma)))


def reflect_selfloop(state, dims: GridDims) -> np.ndarray:
    """``2|selfloop><selfloop| - I``."""
    x = -np.asarray(state, dtype=complex)
    x[dims.selfloop] = -x[dims.selfloop]
    return x


def reflect_marked(state, config: MarkedConfig) -> np.ndarray:
    """``2|g><g| - I``."""
    x = -np.asarray(state, dtype=complex)
    i = config.marked_index
    x[i] = -x[i]
    return x


def amplify_state(state, config: MarkedConfig, steps: int, about: str = "selfloop") -> np.ndarray:
    """Alternate ``Gt`` with the reflection about ``|selfloop>`` or ``|g>``; ``steps`` reflections, ``Gt`` first.

    Both partners rotate the plane ``{|g>, |selfloop>}`` by the same angle, so
    the marked probability does not depend on ``about``.
    """
    if about not in ("selfloop", "marked"):
        raise ConfigurationError(f"about must be 'selfloop' or 'marked', got {about!r}")
    other = (lambda v: reflect_selfloop(v, config.dims)) if about == "selfloop" else (
        lambda v: reflect_marked(v, config))
    x = np.asarray(state, dtype=complex)
    for t in range(steps):
        x = apply_Gt(x, config) if t % 2 == 0 else other(x)
    return x


def amplify_selfloop_to_marked(dims: GridDims, s=None, marked=(0, 0), about: str = "selfloop") -> tuple[float, int]:
    """Rotate ``|selfloop>`` onto the mark; returns ``(p_marked, steps)``."""
    params = InterpolationParams.default(dims) if s is None else InterpolationParams(s)
    mc = MarkedConfig(dims, marked, params)
    steps = amplification_steps(dims, params.s)
    x = amplify_state(selfloop_state(dims), mc, steps, about)
    return float(abs(x[mc.marked_index]) ** 2), steps


def amplification_closed_form(dims: GridDims, reflections: int, s=None) -> float:
    """Marked probability after ``reflections`` single reflections started from ``|selfloop>``.

    Each ``Gt`` followed by the selfloop reflection rotates the plane
    ``{|g>, |selfloop>}`` by ``2 gamma``; a trailing lone ``Gt`` only changes signs.
    """
    s = InterpolationParams.default(dims).s if s is None else float(s)
    gamma = math.asin(math.sqrt(1.0 - s))
    return math.sin(2 * math.ceil(reflections / 2) * gamma) ** 2


# --- estimator facade ----------------------------------------------------------


class WalkSearch(BaseEstimator):
    """Search for a marked vertex on an ``n x n`` torus.

    ``fit`` solves for the slow eigenphases and the step count; ``predict``
    takes marked coordinates (the oracle for each instance), runs the walk and
    the amplification stage, and returns the most likely vertex per row.
    """

    def __init__(self, n: int = 16, s="auto", steps="auto", amplify: bool = True):
        self.n = n
        self.s = s
        self.steps = steps
        self.amplify = amplify

    def _s(self):
        return None if self.s == "auto" else float(self.s)

    def fit(self, X=None, y=None):
        dims = GridDims.square(int(self.n))
        self.dims_ = dims
        self.s_ = InterpolationParams.default(dims).s if self._s() is None else self._s()
        if self.steps == "auto":
            self.phi1_, self.beta_ = main_walk_phases(dims, self._s())
            self.n_steps_ = int(math.floor(math.pi / self.beta_))
        else:
            self.phi1_ = self.beta_ = None
            self.n_steps_ = int(self.steps)
        self.amplification_steps_ = amplification_steps(dims, self.s_) if self.amplify else 0
        return self

    def _final_states(self, X):
        check_is_fitted(self, "n_steps_")
        X = check_array(X, dtype=np.int64, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ConfigurationError("X must have two columns (row, col) of marked vertices")
        for i, j in X:
            yield (int(i), int(j)), self._one(int(i), int(j))

    def _one(self, i, j):
        cfg = RunConfig(self.dims_, (i, j), self.s_, "fixed", self.n_steps_)
        traj = run_main_walk(cfg)
        x = traj.final_state
        if self.amplify:
            x = amplify_state(x, cfg.marked_config(), self.amplification_steps_)
        return np.abs(x) ** 2

    def predict_proba(self, X) -> np.ndarray:
        """Vertex probabilities (selfloop last) for each marked instance."""
        return np.array([p for _, p in self._final_states(X)])

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        idx = np.argmax(probs[:, :-1], axis=1)
        return np.stack(np.divmod(idx, self.dims_.n_cols), axis=1)

    def score(self, X, y=None) -> float:
        """Mean probability of measuring the true mark."""
        X = check_array(X, dtype=np.int64)
        probs = self.predict_proba(X)
        flat = X[:, 0] * self.dims_.n_cols + X[:, 1]
        return float(probs[np.arange(len(flat)), flat].mean())
