"""Invariant suite: every structural identity the package relies on, as max deviations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import secular, spectra
from .dense import MAX_DENSE_N, matrix_cz, matrix_F, matrix_U, matrix_W
from .grid import (GridDims, apply_cz, piz_state, random_state, selfloop_state,
                   to_canonical, uniform_state)
from .operators import (InterpolationParams, MarkedConfig, apply_A, apply_B, apply_F,
                        apply_F1, apply_F2, apply_F_direct, apply_Gt, apply_U, apply_W,
                        apply_WF, build_F_vectors)

EXACT_TOL = 1e-12
DEFAULT_TOL = 1e-10
EIGVEC_TOL = 1e-8
N_RANDOM = 4
MAX_LABEL_CHECK = 1024
MAX_SLOW_CHECK = 4096


@dataclass(frozen=True)
class Check:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tolerance)


def u0_state(dims: GridDims, s: float) -> np.ndarray:
    """``|pi_z> - sqrt(s / ((1-s) N)) |selfloop>``, fixed by ``W``, ``F1`` and ``F2``."""
    return piz_state(dims) - math.sqrt(s / ((1 - s) * dims.N)) * selfloop_state(dims)


def _worst(fn, states):
    return max(float(fn(x)) for x in states)


def operator_checks(dims: GridDims, marked, rng) -> list[Check]:
    cfg = MarkedConfig(dims, marked)
    can = MarkedConfig(dims, (0, 0))
    fv = build_F_vectors(can)
    xs = [random_state(dims, rng) for _ in range(N_RANDOM)]
    nrm = np.linalg.norm
    ops = {
        "A": lambda x: apply_A(x, dims),
        "B": lambda x: apply_B(x, dims),
        "Gt": lambda x: apply_Gt(x, cfg),
        "F1": lambda x: apply_F1(x, fv),
        "F2": lambda x: apply_F2(x, fv),
    }
    out = [Check("cz_involution", _worst(lambda x: nrm(apply_cz(apply_cz(x, dims), dims) - x), xs), 0.0)]
    for name, op in ops.items():
        out.append(Check(f"{name}_involution", _worst(lambda x: nrm(op(op(x)) - x), xs), EXACT_TOL))
    unit = dict(ops, U=lambda x: apply_U(x, cfg), W=lambda x: apply_W(x, dims), F=lambda x: apply_F(x, fv))
    out.append(Check("norm_preservation",
                     max(_worst(lambda x: abs(nrm(op(x)) - 1), xs) for op in unit.values()), EXACT_TOL))
    out.append(Check("F_equals_F1F2",
                     _worst(lambda x: nrm(apply_F_direct(x, can) - apply_F(x, fv)), xs), EXACT_TOL))
    out.append(Check("U_equals_cz_WF_cz", _worst(
        lambda x: nrm(apply_U(x, can) - apply_cz(apply_WF(apply_cz(x, dims), fv), dims)), xs), EXACT_TOL))
    out.append(Check("canonical_frame", _worst(
        lambda x: nrm(to_canonical(apply_U(x, cfg), dims, marked)
                      - apply_U(to_canonical(x, dims, marked), can)), xs), EXACT_TOL))
    real = [random_state(dims, rng, real=True) for _ in range(N_RANDOM)]
    out.append(Check("W_real", _worst(lambda x: np.abs(apply_W(x, dims).imag).max(), real), 1e-14))
    span = np.array([fv.kplus, fv.f1]).T
    def off_span(x):
        y = x - span @ (span.conj().T @ x)
        return nrm(apply_F(y, fv) - y)
    out.append(Check("F_identity_off_span", _worst(off_span, xs), EXACT_TOL))
    u0dev = 0.0
    for s in (0.3, 0.9, InterpolationParams.default(dims).s):
        fvs = build_F_vectors(MarkedConfig(dims, (0, 0), InterpolationParams(s)))
        u0 = u0_state(dims, s)
        for op in (lambda x: apply_W(x, dims), lambda x: apply_F1(x, fvs), lambda x: apply_F2(x, fvs)):
            u0dev = max(u0dev, float(nrm(op(u0) - u0)))
    out.append(Check("U0_fixed", u0dev, EXACT_TOL))
    x = uniform_state(dims).astype(complex)
    z = piz_state(dims).astype(complex)
    dev = 0.0
    for _ in range(3):
        x = apply_U(x, can)
        z = apply_WF(z, fv)
        dev = max(dev, float(nrm(x - apply_cz(z, dims))))
    out.append(Check("U_power_vs_cz_WF_power", dev, DEFAULT_TOL))
    if dims.N <= min(MAX_DENSE_N, 256):
        cz = matrix_cz(dims)
        dev = np.abs(matrix_U(can) - cz @ matrix_W(dims) @ matrix_F(can) @ cz).max()
        out.append(Check("dense_U_equals_cz_WF_cz", float(dev), EXACT_TOL))
    return out


def spectral_checks(dims: GridDims, rng) -> list[Check]:
    out = []
    labels = spectra.all_labels(dims)
    if len(labels) > MAX_LABEL_CHECK:
        pick = rng.choice(len(labels), MAX_LABEL_CHECK, replace=False)
        labels = [labels[i] for i in sorted(pick)]
    res = 0.0
    vecs = []
    for lab in labels:
        w = spectra.eigenvector_w(dims, lab)
        th = spectra.label_phase(dims, lab)
        res = max(res, float(np.linalg.norm(apply_W(w, dims) - np.exp(1j * th) * w)))
        vecs.append(w)
    out.append(Check("W_eigen_residual", res, DEFAULT_TOL))
    V = np.array(vecs)
    out.append(Check("W_eigen_gram", float(np.abs(V.conj() @ V.T - np.eye(len(vecs))).max()), DEFAULT_TOL))
    subs = spectra.enumerate_subspaces(dims)
    out.append(Check("partition_dimension", float(abs(sum(s.dim for s in subs) - dims.size)), 0.0))
    out.append(Check("plus_space_dimension", float(abs(subs[0].dim - (dims.N // 2 + 3))), 0.0))
    x = random_state(dims, rng)
    out.append(Check("projection_parseval",
                     float(abs(spectra.projection_norms_sq(x, dims, subs).sum() - 1)), DEFAULT_TOL))
    rep = spectra.verify_projection_identities(dims)
    out.append(Check("projection_identities", float(rep["max_deviation"]), DEFAULT_TOL))
    return out


def secular_checks(dims: GridDims) -> list[Check]:
    out = []
    dec1 = secular.decompose_f1(dims)
    wf1 = secular.analyze_wf1(dims)
    dec2 = secular.decompose_f2(dims, wf1=wf1)
    out.append(Check("f1_overlaps_sum", abs(dec1.total() - 1), DEFAULT_TOL))
    out.append(Check("f2_overlaps_sum", abs(dec2.total() - 1), DEFAULT_TOL))
    s1 = secular.smallest_eigenphase(dec1)
    s2 = secular.smallest_eigenphase(dec2)
    out.append(Check("beta_below_phi1", max(0.0, s2.alpha - s1.alpha), 0.0))
    out.append(Check("constraint1", secular.extract_slow_decomposition(dims, solution=s1).constraint1_residual(),
                     1e-9))
    if dims.N <= MAX_SLOW_CHECK:
        fv = build_F_vectors(MarkedConfig(dims, (0, 0)))
        basis = spectra.WBasis(dims)
        d1, c1 = secular.f1_components(dims, basis=basis)
        e1 = secular.slow_eigenvector(d1, s1, c1)
        r1 = secular.eigen_residual(lambda v: apply_W(apply_F1(v, fv), dims), e1, s1.alpha)
        out.append(Check("slow_eigenvector_WF1", r1, EIGVEC_TOL))
        d2, c2 = secular.f2_components(dims, basis=basis)
        e2 = secular.slow_eigenvector(d2, s2, c2)
        r2 = secular.eigen_residual(lambda v: apply_WF(v, fv), e2, s2.alpha)
        out.append(Check("slow_eigenvector_WF", r2, EIGVEC_TOL))
    return out


def run_invariant_suite(dims: GridDims, marked=(0, 0), seed: int = 0) -> list[Check]:
    """All checks for one grid; secular checks on square grids from 4x4 up (2x2 has no -1 overlap)."""
    rng = np.random.default_rng(seed)
    marked = dims.check_vertex(marked)
    checks = operator_checks(dims, marked, rng) + spectral_checks(dims, rng)
    if dims.is_square() and dims.n_rows >= 4:
        checks += secular_checks(dims)
    return checks
