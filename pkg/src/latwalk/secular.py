"""Flip-flop machinery: a real unitary ``T`` composed with the reflection about a real state ``|s>``.

If ``|s> = s0|T0> + sum_k s_k(|T_k+> + |T_k->) + s_{-1}|T_{-1}>`` then every
root ``alpha`` of the secular function

    s0^2 cot(a/2) + sum_k s_k^2 [cot((a - phi_k)/2) + cot((a + phi_k)/2)] - s_{-1}^2 tan(a/2)

is an eigenphase of ``T (I - 2|s><s|)`` with eigenvector
``sum_j (1 + i cot((alpha - phi_j)/2)) P_j |s>`` over the eigenspaces ``P_j`` of ``T``.

Both ``W F1`` (``T = W``, ``s = f1``) and ``W F`` (``T = W F1``, ``s = f2``)
are handled this way. Every quantity is computed from the per-eigenphase
weights alone (the collapsed basis), so cost grows with the number of
distinct eigenphases of ``W`` rather than with ``N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericError, PoleError
from .grid import GridDims
from .spectra import enumerate_subspaces

ZERO_WEIGHT = 1e-14
POLE_MARGIN = 1e-13
PHASE_MERGE_TOL = 1e-12
MAX_BISECT = 200
BISECT_RTOL = 1e-12


@dataclass(frozen=True)
class ReflectionDecomposition:
    """Overlaps of a real unit state with the eigenspaces of a real unitary.

    ``phis`` are the distinct eigenphases in ``(0, pi)`` (ascending) and
    ``weights[k] = s_k^2`` is the squared overlap with *one* of the two
    conjugate eigenspaces at ``+-phis[k]``.
    """

    s0: float
    s_minus1: float
    phis: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if phis.shape != weights.shape:
            raise ConfigurationError("phis and weights must have the same length")
        if phis.size and (np.any(np.diff(phis) <= 0) or phis[0] <= 0 or phis[-1] >= math.pi):
            raise ConfigurationError("phis must be strictly increasing inside (0, pi)")
        if self.s0 < 0 or self.s_minus1 < 0 or np.any(weights < 0):
            raise ConfigurationError("overlaps must be non-negative")
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "weights", weights)

    @property
    def s(self) -> np.ndarray:
        return np.sqrt(self.weights)

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.phis.tolist(), self.s.tolist()))

    def total(self) -> float:
        """``s0^2 + s_{-1}^2 + 2 sum s_k^2`` (1 for a unit state)."""
        return self.s0 ** 2 + self.s_minus1 ** 2 + 2 * float(self.weights.sum())

    def all_phases(self) -> tuple[np.ndarray, np.ndarray]:
        """Every eigenphase with its squared overlap, including ``0``, ``pi`` and the negatives."""
        ph = np.concatenate([[0.0], self.phis, -self.phis[::-1], [math.pi]])
        w = np.concatenate([[self.s0 ** 2], self.weights, self.weights[::-1], [self.s_minus1 ** 2]])
        return ph, w

    def support(self) -> "ReflectionDecomposition":
        """Drop eigenphases whose overlap is floating-point dust."""
        keep = self.weights > ZERO_WEIGHT
        return ReflectionDecomposition(
            self.s0 if self.s0 ** 2 > ZERO_WEIGHT else 0.0,
            self.s_minus1 if self.s_minus1 ** 2 > ZERO_WEIGHT else 0.0,
            self.phis[keep], self.weights[keep])


def merge_phases(phases, weights, tol: float = PHASE_MERGE_TOL) -> ReflectionDecomposition:
    """Collect squared overlaps on signed eigenphases into a decomposition.

    Phases are folded into ``(-pi, pi]``; ``|phase| < tol`` counts as +1 and
    ``|phase| > pi - tol`` as -1. Positive phases closer than ``tol`` are merged.
    Negative phases are assumed to mirror the positive ones (real state and
    real operator) and are only used for a consistency check.
    """
    phases = np.asarray(phases, dtype=float)
    weights = np.asarray(weights, dtype=float)
    phases = np.angle(np.exp(1j * phases))
    zero = np.abs(phases) < tol
    neg1 = np.abs(phases) > math.pi - tol
    s0_sq = weights[zero].sum()
    sm_sq = weights[neg1].sum()
    rest = ~(zero | neg1)
    pos = rest & (phases > 0)
    neg = rest & (phases < 0)
    pp, pw = _group(phases[pos], weights[pos], tol)
    _, nw = _group(-phases[neg], weights[neg], tol)
    if pw.size != nw.size or (pw.size and np.abs(pw - nw).max() > 1e-9 * max(1.0, pw.max())):
        raise NumericError("eigenphase weights are not conjugate-symmetric; state or operator not real")
    return ReflectionDecomposition(math.sqrt(s0_sq), math.sqrt(sm_sq), pp, pw)


def _group(ph, w, tol):
    if ph.size == 0:
        return ph, w
    order = np.argsort(ph, kind="stable")
    ph, w = ph[order], w[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(ph) > tol) + 1])
    sums = np.add.reduceat(w, starts)
    # representative phase: weighted mean of the group
    means = np.add.reduceat(ph * np.maximum(w, 1e-300), starts) / np.add.reduceat(np.maximum(w, 1e-300), starts)
    return means, sums


def _cot(x):
    return np.cos(x) / np.sin(x)


def _secular_vec(alpha, dec: ReflectionDecomposition):
    a = np.asarray(alpha, dtype=float)[..., None]
    half = a[..., 0] / 2
    val = dec.s0 ** 2 * _cot(half) - dec.s_minus1 ** 2 * np.tan(half)
    if dec.phis.size:
        val = val + (dec.weights * (_cot((a - dec.phis) / 2) + _cot((a + dec.phis) / 2))).sum(axis=-1)
    return val


def secular_eval(alpha: float, dec: ReflectionDecomposition) -> float:
    """Value of the secular function at ``alpha``; strictly decreasing between poles."""
    alpha = float(alpha)
    poles = np.concatenate([[0.0, math.pi], dec.phis])
    if not 0.0 < alpha < math.pi or np.min(np.abs(poles - alpha)) < 1e-15:
        raise PoleError(f"alpha = {alpha!r} is at or outside a pole of the secular function")
    return float(_secular_vec(alpha, dec))


@dataclass(frozen=True)
class SecularSolution:
    """A root of the secular function together with the ``|e_perp>`` coefficients.

    ``coeffs`` holds ``cot((alpha - phi)/2)`` for every entry of
    ``dec.all_phases()`` (``cot(alpha/2)`` for +1, ``-tan(alpha/2)`` for -1).
    """

    alpha: float
    bracket: tuple
    value: float
    iterations: int
    dec: ReflectionDecomposition = field(repr=False)

    @property
    def cot_coeffs(self) -> np.ndarray:
        ph, _ = self.dec.all_phases()
        return _cot((self.alpha - ph) / 2)

    def eperp_norm_sq(self) -> float:
        _, w = self.dec.all_phases()
        c = self.cot_coeffs
        return float(np.sum(w * c * c))

    def e_norm_sq(self) -> float:
        return 1.0 + self.eperp_norm_sq()


def _brackets(dec: ReflectionDecomposition):
    edges = np.concatenate([[0.0], dec.phis, [math.pi]])
    lo, hi = edges[:-1], edges[1:]
    margin = np.minimum(POLE_MARGIN * np.maximum(1.0, np.abs(hi)), (hi - lo) / 4)
    return lo + margin, hi - margin, lo, hi


def _bisect(dec, lo, hi):
    flo = _secular_vec(lo, dec)
    fhi = _secular_vec(hi, dec)
    bad = ~((flo > 0) & (fhi < 0))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NumericError(
            f"no sign change in bracket ({lo[i]!r}, {hi[i]!r}): "
            f"f(lo) = {flo[i]!r}, f(hi) = {fhi[i]!r}")
    lo, hi = lo.copy(), hi.copy()
    it = 0
    for it in range(1, MAX_BISECT + 1):
        mid = 0.5 * (lo + hi)
        fm = _secular_vec(mid, dec)
        pos = fm > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= BISECT_RTOL * np.abs(mid) * 1e-3):
            break
    root = 0.5 * (lo + hi)
    return root, it


def _require_interlacing(dec: ReflectionDecomposition) -> ReflectionDecomposition:
    dec = dec.support()
    # with no rotational overlap there is still exactly one root in (0, pi)
    if dec.s0 == 0 or dec.s_minus1 == 0:
        raise NumericError(
            "interlacing hypotheses fail: need nonzero overlap with the +1 and -1 "
            f"eigenspaces (s0={dec.s0}, s_-1={dec.s_minus1})")
    return dec


def secular_roots(dec: ReflectionDecomposition) -> np.ndarray:
    """All positive eigenphases ``alpha_0 < ... < alpha_m`` of ``T S``, one per gap."""
    dec = _require_interlacing(dec)
    lo, hi, _, _ = _brackets(dec)
    roots, _ = _bisect(dec, lo, hi)
    return roots


def smallest_eigenphase(dec: ReflectionDecomposition) -> SecularSolution:
    """Unique root in ``(0, phi_1)``."""
    dec = _require_interlacing(dec)
    lo, hi, a, b = _brackets(dec)
    root, it = _bisect(dec, lo[:1], hi[:1])
    alpha = float(root[0])
    return SecularSolution(alpha, (float(a[0]), float(b[0])), float(_secular_vec(alpha, dec)), it, dec)


@dataclass
class SpectralComponents:
    """Unit vectors ``P_j|s> / ||P_j|s>||`` aligned with ``dec.all_phases()``."""

    vectors: list

    def assemble(self, dec: ReflectionDecomposition, coeffs) -> np.ndarray:
        _, w = dec.all_phases()
        out = 0
        for v, wt, c in zip(self.vectors, w, coeffs):
            if v is not None and wt > 0:
                out = out + math.sqrt(wt) * c * v
        return out


def slow_eigenvector(dec: ReflectionDecomposition, solution: SecularSolution,
                     basis_provider: SpectralComponents) -> np.ndarray:
    """Unnormalized eigenvector ``|s> + i|e_perp>`` rebuilt in the full space."""
    coeffs = 1 + 1j * solution.cot_coeffs
    return basis_provider.assemble(solution.dec, coeffs)


def group_components(dec: ReflectionDecomposition, phases, vectors,
                     tol: float = PHASE_MERGE_TOL) -> SpectralComponents:
    """Sum full-space projections ``P_j|s>`` onto the phases of ``dec.all_phases()`` and normalize."""
    ph_all, w_all = dec.all_phases()
    phases = np.angle(np.exp(1j * np.asarray(phases, dtype=float)))
    slots = [None] * ph_all.size
    for ph, v in zip(phases, vectors):
        d = np.abs(np.angle(np.exp(1j * (ph_all - ph))))
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise NumericError(f"projection at phase {ph!r} has no slot in the decomposition")
        slots[j] = v if slots[j] is None else slots[j] + v
    out = []
    for v, w in zip(slots, w_all):
        out.append(None if v is None or w <= 0 else v / math.sqrt(w))
    return SpectralComponents(out)


# --- W and its reflection axes -------------------------------------------------


def _s_params(dims: GridDims, s):
    dims.require_square()
    if s is None:
        s = 1.0 - 1.0 / (dims.N + 1)
    s = float(s)
    if not 0.0 < s < 1.0:
        raise ConfigurationError(f"s must lie in (0, 1) for the flip-flop analysis, got {s}")
    return s


@dataclass(frozen=True)
class WSpectrum:
    """Distinct eigenphases of ``W`` with the subspace dimensions collected on each."""

    dims: GridDims
    phases: np.ndarray    # signed, includes 0 and pi
    dims_on: np.ndarray   # total dimension on each phase (the (+1) entry includes the selfloop)

    @classmethod
    def of(cls, dims: GridDims) -> "WSpectrum":
        subs = enumerate_subspaces(dims)
        ph = np.array([sub.theta for sub in subs])
        dm = np.array([sub.dim for sub in subs], dtype=float)
        ph = np.angle(np.exp(1j * ph))
        ph[np.abs(ph) > math.pi - PHASE_MERGE_TOL] = math.pi
        order = np.argsort(ph, kind="stable")
        ph, dm = ph[order], dm[order]
        starts = np.concatenate([[0], np.flatnonzero(np.diff(ph) > PHASE_MERGE_TOL) + 1])
        return cls(dims, ph[starts], np.add.reduceat(dm, starts))

    @property
    def nonzero(self) -> np.ndarray:
        return np.abs(self.phases) > PHASE_MERGE_TOL

    def smallest_positive(self) -> float:
        return float(self.phases[self.phases > PHASE_MERGE_TOL].min())


def _weights_minus(wspec: WSpectrum) -> np.ndarray:
    """``||Pi |->||^2`` on every distinct phase."""
    N = wspec.dims.N
    w = 2 * wspec.dims_on / N
    w[~wspec.nonzero] = 4 / N
    return w


def _weights_plus(wspec: WSpectrum) -> np.ndarray:
    N = wspec.dims.N
    w = 2 * wspec.dims_on / (3 * N)
    w[~wspec.nonzero] = 2 * (N + 2) / (3 * N)
    return w


def _f1_weights(wspec: WSpectrum, s: float) -> np.ndarray:
    N = wspec.dims.N
    w = s * _weights_minus(wspec) / (4 - 3 * s)
    w[~wspec.nonzero] = (4 * s / N + 4 * (1 - s)) / (4 - 3 * s)
    return w


def decompose_f1(dims: GridDims, s=None) -> ReflectionDecomposition:
    """Overlaps of ``|f1>`` with the eigenspaces of ``W``."""
    s = _s_params(dims, s)
    wspec = WSpectrum.of(dims)
    return merge_phases(wspec.phases, _f1_weights(wspec, s))


@dataclass
class WF1Analysis:
    """Spectral data of ``W F1`` needed for ``W F``: flip-flop roots and their eigenvector norms."""

    dims: GridDims
    s: float
    wspec: WSpectrum
    f1_dec: ReflectionDecomposition
    roots: np.ndarray          # positive flip-flop eigenphases of W F1
    e_norm_sq: np.ndarray      # ||s + i e_perp||^2 for each root

    @property
    def eta(self) -> float:
        return math.asin(math.sqrt(0.75 * self.s))

    @property
    def phi1(self) -> float:
        return float(self.roots[0])

    def cot_matrix(self, alphas) -> np.ndarray:
        ph, _ = self.f1_dec.all_phases()
        return _cot((np.asarray(alphas)[:, None] - ph[None, :]) / 2)


def analyze_wf1(dims: GridDims, s=None) -> WF1Analysis:
    s = _s_params(dims, s)
    wspec = WSpectrum.of(dims)
    dec = merge_phases(wspec.phases, _f1_weights(wspec, s))
    roots = secular_roots(dec)
    _, w = dec.all_phases()
    norms = np.empty(roots.size)
    # chunked to bound memory at large N
    for start in range(0, roots.size, 256):
        stop = min(roots.size, start + 256)
        ph, _ = dec.all_phases()
        c = _cot((roots[start:stop, None] - ph[None, :]) / 2)
        norms[start:stop] = 1.0 + (w[None, :] * c * c).sum(axis=1)
    return WF1Analysis(dims, s, wspec, dec, roots, norms)


def decompose_f2(dims: GridDims, s=None, wf1: WF1Analysis | None = None) -> ReflectionDecomposition:
    """Overlaps of ``|f2>`` with the eigenspaces of ``W F1``.

    ``|f2> = sin(2 eta)|+> + cos(2 eta)|f1>``. The ``|+>`` part splits over
    ``W`` eigenvectors that ``F1`` leaves alone; the ``|f1>`` part lives on the
    flip-flop eigenvectors, each carrying ``cos^2(2 eta) / ||e_j||^2``.
    """
    wf1 = wf1 or analyze_wf1(dims, s)
    eta = wf1.eta
    plus_w = math.sin(2 * eta) ** 2 * _weights_plus(wf1.wspec)
    ff_w = math.cos(2 * eta) ** 2 / wf1.e_norm_sq
    phases = np.concatenate([wf1.wspec.phases, wf1.roots, -wf1.roots])
    weights = np.concatenate([plus_w, ff_w, ff_w])
    return merge_phases(phases, weights)


def phi1(dims: GridDims, s=None) -> SecularSolution:
    """Smallest positive eigenphase of ``W F1``."""
    return smallest_eigenphase(decompose_f1(dims, s))


def beta(dims: GridDims, s=None, wf1: WF1Analysis | None = None) -> SecularSolution:
    """Smallest positive eigenphase of ``W F``."""
    return smallest_eigenphase(decompose_f2(dims, s, wf1))


def decompose_reflection_state(dims: GridDims, target: str = "f1", s=None) -> ReflectionDecomposition:
    if target == "f1":
        return decompose_f1(dims, s)
    if target == "f2":
        return decompose_f2(dims, s)
    raise ConfigurationError(f"target must be 'f1' or 'f2', got {target!r}")


# --- slow eigenvector of W F1 --------------------------------------------------


@dataclass(frozen=True)
class SlowEigenvectorDecomposition:
    """Slowest eigenvector of ``W F1`` scaled to ``<pi_z|zeta> = 1/2``.

    ``zeta = a |-perp> + 1/2 |pi_z> + c_loop |selfloop> + |psi>``;
    ``c_loop`` is 1/2 at the default ``s``.
    """

    N: int
    s: float
    alpha: float
    a: complex
    selfloop_coeff: complex
    psi_real_norm: float
    psi_imag_norm: float

    def constraint1_residual(self) -> float:
        N, a = self.N, self.a
        lhs = 8 * a * (N - 4) / (math.sqrt(N) * (N + 4)) - 16 / (N + 4)
        return float(abs(lhs - (np.exp(1j * self.alpha) - 1)))


def _psi_coefficients(dims, s, alpha, wspec):
    """Coefficients of ``zeta`` on ``Pi_theta |->`` and the scale ``c``."""
    N = dims.N
    kappa = math.sqrt(s) / math.sqrt(4 - 3 * s)
    nz = wspec.nonzero
    ph = wspec.phases
    piz_f1 = kappa * (-2 / math.sqrt(N))                         # <pi_z | Pi_00 f1>
    c = 1.0 / (2 * (1 + 1j / math.tan(alpha / 2)) * piz_f1)     # zeta = c * e
    coef = c * kappa * (1 + 1j * _cot((alpha - ph[nz]) / 2))    # on Pi_theta |->, theta != 0
    return c, coef, ph[nz], _weights_minus(wspec)[nz]


def extract_slow_decomposition(dims: GridDims, s=None, solution: SecularSolution | None = None) -> SlowEigenvectorDecomposition:
    s = _s_params(dims, s)
    wspec = WSpectrum.of(dims)
    if solution is None:
        solution = smallest_eigenphase(merge_phases(wspec.phases, _f1_weights(wspec, s)))
    alpha = solution.alpha
    N = dims.N
    c, coef, ph, wm = _psi_coefficients(dims, s, alpha, wspec)
    mperp_sq = 1 - 4 / N
    a = complex((coef * wm).sum() / mperp_sq)
    x = coef - a
    # pair +theta with -theta; ||Re(x v + y conj v)||^2 = |v|^2/2 [Re(x+y)^2 + Im(y-x)^2]
    pi_mask = np.abs(np.abs(ph) - math.pi) < PHASE_MERGE_TOL
    re_sq = float((np.real(x[pi_mask]) ** 2 * wm[pi_mask]).sum())
    im_sq = float((np.imag(x[pi_mask]) ** 2 * wm[pi_mask]).sum())
    pos = np.flatnonzero((ph > 0) & ~pi_mask)
    neg_idx = {round(float(-ph[i]), 12): i for i in np.flatnonzero((ph < 0) & ~pi_mask)}
    for i in pos:
        j = neg_idx[round(float(ph[i]), 12)]
        xp, xn = x[i], x[j]
        re_sq += wm[i] / 2 * (np.real(xp + xn) ** 2 + np.imag(xn - xp) ** 2)
        im_sq += wm[i] / 2 * (np.imag(xp + xn) ** 2 + np.real(xp - xn) ** 2)
    kappa_loop = -2 * math.sqrt(1 - s) / math.sqrt(4 - 3 * s)
    loop = complex(c * (1 + 1j / math.tan(alpha / 2)) * kappa_loop)
    return SlowEigenvectorDecomposition(N, s, alpha, a, loop, math.sqrt(re_sq), math.sqrt(im_sq))


# --- overlap of |pi_z> + |selfloop> with the slowest rotational subspace ------


def _v_weight(dims: GridDims, s: float) -> float:
    """``<Pi_00 f1 | pi_z + selfloop>`` (real)."""
    N = dims.N
    return (math.sqrt(s) * (-2 / math.sqrt(N)) - 2 * math.sqrt(1 - s)) / math.sqrt(4 - 3 * s)


def slow_subspace_overlap(dims: GridDims, s=None, which: str = "WF1",
                          wf1: WF1Analysis | None = None) -> float:
    """``|| Pi_slow (|pi_z> + |selfloop>) ||`` for ``W F1`` or ``W F``."""
    s = _s_params(dims, s)
    w0 = _v_weight(dims, s)
    if which == "WF1":
        sol = phi1(dims, s)
        a = sol.alpha
        ev = (1 - 1j / math.tan(a / 2)) * w0
        return math.sqrt(2) * abs(ev) / math.sqrt(sol.e_norm_sq())
    if which != "WF":
        raise ConfigurationError(f"which must be 'WF1' or 'WF', got {which!r}")
    wf1 = wf1 or analyze_wf1(dims, s)
    sol = beta(dims, s, wf1)
    b = sol.alpha
    al = wf1.roots
    cos2 = math.cos(2 * wf1.eta)
    ca = 1 / np.tan(al / 2)
    term = ((1 - 1j * _cot((b - al) / 2)) * (1 - 1j * ca)
            + (1 - 1j * _cot((b + al) / 2)) * (1 + 1j * ca))
    ev = complex((cos2 * w0 * term / wf1.e_norm_sq).sum())
    return math.sqrt(2) * abs(ev) / math.sqrt(sol.e_norm_sq())


# --- sums over the spectrum of W ----------------------------------------------


def asymptotic_sums(dims: GridDims, alpha: float) -> tuple[float, float]:
    """``S0 = sum dim cot((theta - alpha)/2)`` and ``S4 = sum dim [cot((theta+alpha)/2) - cot((theta-alpha)/2)]^2``.

    Sums run over the non-(+1) invariant subspaces with signed eigenphases.
    """
    dims.require_square()
    subs = enumerate_subspaces(dims)[1:]
    th = np.array([sub.theta for sub in subs])
    dm = np.array([sub.dim for sub in subs], dtype=float)
    tmin = float(np.abs(th).min())
    if not 0 < alpha < tmin:
        raise ConfigurationError(f"alpha must lie in (0, {tmin}), got {alpha}")
    s0 = float((dm * _cot((th - alpha) / 2)).sum())
    s4 = float((dm * (_cot((th + alpha) / 2) - _cot((th - alpha) / 2)) ** 2).sum())
    return s0, s4


# --- collapsed basis as explicit matrices --------------------------------------


@dataclass
class CollapsedBasis:
    """Orthonormal basis ``{pi_z, selfloop, Pi_00|+>, Pi_theta|+>, Pi_theta|->}`` with
    ``W`` diagonal and the reflection axes as coordinate vectors."""

    dims: GridDims
    s: float
    w_phases: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    piz: np.ndarray
    loop: np.ndarray

    @property
    def size(self) -> int:
        return self.w_phases.size

    def W(self) -> np.ndarray:
        return np.diag(np.exp(1j * self.w_phases))

    def reflection(self, v) -> np.ndarray:
        return np.eye(self.size) - 2 * np.outer(v, v.conj())

    def WF1(self) -> np.ndarray:
        return self.W() @ self.reflection(self.f1)

    def WF(self) -> np.ndarray:
        return self.W() @ self.reflection(self.f1) @ self.reflection(self.f2)


def collapsed_basis(dims: GridDims, s=None) -> CollapsedBasis:
    s = _s_params(dims, s)
    wspec = WSpectrum.of(dims)
    N = dims.N
    nz = np.flatnonzero(wspec.nonzero)
    wp, wm = _weights_plus(wspec), _weights_minus(wspec)
    zero = int(np.flatnonzero(~wspec.nonzero)[0])
    n = 3 + 2 * nz.size
    phases = np.zeros(n)
    phases[3::2] = wspec.phases[nz]
    phases[4::2] = wspec.phases[nz]
    plus = np.zeros(n)
    minus = np.zeros(n)
    plus[2] = math.sqrt(wp[zero])
    plus[3::2] = np.sqrt(wp[nz])
    minus[0] = -2 / math.sqrt(N)
    minus[4::2] = np.sqrt(wm[nz])
    piz = np.zeros(n); piz[0] = 1.0
    loop = np.zeros(n); loop[1] = 1.0
    eta = math.asin(math.sqrt(0.75 * s))
    f1 = (math.sqrt(s) * minus - 2 * math.sqrt(1 - s) * loop) / math.sqrt(4 - 3 * s)
    f2 = math.sin(2 * eta) * plus + math.cos(2 * eta) * f1
    return CollapsedBasis(dims, s, phases, f1, f2, plus, minus, piz, loop)


# --- full-space reconstruction (small N, for residual checks) ------------------


def _w_projections(dims: GridDims, state, basis=None):
    """Projections of ``state`` onto every distinct eigenphase of ``W``."""
    from .spectra import WBasis
    basis = basis or WBasis(dims)
    coef, loop = basis.forward(state)
    slot_ph = np.angle(np.exp(1j * basis.phases()))
    slot_ph[np.abs(slot_ph) > math.pi - PHASE_MERGE_TOL] = math.pi
    wspec = WSpectrum.of(dims)
    out = []
    for ph in wspec.phases:
        mask = np.abs(slot_ph - ph) < PHASE_MERGE_TOL
        zero = abs(ph) < PHASE_MERGE_TOL
        out.append(basis.inverse(np.where(mask, coef, 0), loop if zero else 0.0))
    return wspec.phases, out


def f1_components(dims: GridDims, s=None, basis=None) -> tuple[ReflectionDecomposition, SpectralComponents]:
    """Decomposition of ``|f1>`` against ``W`` plus the matching unit vectors."""
    from .operators import InterpolationParams, MarkedConfig, build_F_vectors
    s = _s_params(dims, s)
    fv = build_F_vectors(MarkedConfig(dims, (0, 0), InterpolationParams(s)))
    dec = decompose_f1(dims, s)
    phases, vecs = _w_projections(dims, fv.f1, basis)
    return dec, group_components(dec, phases, vecs)


def f2_components(dims: GridDims, s=None, basis=None) -> tuple[ReflectionDecomposition, SpectralComponents]:
    """Decomposition of ``|f2>`` against ``W F1`` plus the matching unit vectors."""
    from .operators import InterpolationParams, MarkedConfig, build_F_vectors
    s = _s_params(dims, s)
    fv = build_F_vectors(MarkedConfig(dims, (0, 0), InterpolationParams(s)))
    wf1 = analyze_wf1(dims, s)
    dec = decompose_f2(dims, s, wf1)
    f1_dec, f1_comp = f1_components(dims, s, basis)
    phases, vecs = _w_projections(dims, fv.kplus, basis)
    sin2, cos2 = math.sin(2 * wf1.eta), math.cos(2 * wf1.eta)
    vecs = [sin2 * v for v in vecs]
    for alpha, nsq in zip(wf1.roots, wf1.e_norm_sq):
        sol = SecularSolution(float(alpha), (0.0, 0.0), 0.0, 0, f1_dec)
        e = slow_eigenvector(f1_dec, sol, f1_comp)
        phases = np.concatenate([phases, [alpha, -alpha]])
        vecs += [cos2 * e / nsq, cos2 * np.conj(e) / nsq]
    return dec, group_components(dec, phases, vecs)


def eigen_residual(op, e: np.ndarray, alpha: float) -> float:
    """``||op(e) - exp(i alpha) e|| / ||e||``."""
    return float(np.linalg.norm(op(e) - np.exp(1j * alpha) * e) / np.linalg.norm(e))
