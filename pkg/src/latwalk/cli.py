"""Command line: ``latwalk {search,spectra,secular,scaling,verify}``."""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from . import secular, spectra
from .errors import ConfigurationError, NumericError
from .grid import GridDims
from .operators import InterpolationParams
from .search import (RunConfig, run_baseline, run_intermediate_walk, run_main_walk,
                     scan_peak)
from .verify import run_invariant_suite

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
MODES = ("search", "spectra", "secular", "scaling", "verify")


def fmt(x) -> str:
    """17 significant digits for floats; plain text otherwise."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    return str(x)


def to_json(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if hasattr(obj, "item"):
        obj = obj.item()
    return fmt(obj)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v.item() if hasattr(v, "item") else v) for v in row) + "\n")
    return buf.getvalue()


def write_output(text: str, out: str | None) -> None:
    """Write everything at once; files are replaced atomically."""
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".latwalk-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def thread_cap() -> int:
    raw = os.environ.get("LATWALK_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"LATWALK_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise ConfigurationError(f"LATWALK_THREADS must be a positive integer, got {raw!r}")
    return n


def _parse_marked(text: str) -> tuple[int, int]:
    try:
        i, j = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigurationError(f"--marked must look like 'i,j', got {text!r}")
    return i, j


def _parse_s(text: str, dims: GridDims) -> float:
    if text == "auto":
        return InterpolationParams.default(dims).s
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"--s must be a number or 'auto', got {text!r}")


def _parse_steps(text: str):
    if text == "auto":
        return None
    try:
        n = int(text)
    except ValueError:
        raise ConfigurationError(f"--steps must be an integer or 'auto', got {text!r}")
    if n < 0:
        raise ConfigurationError("--steps must be non-negative")
    return n


def _parse_sweep(text: str | None) -> list[int]:
    if text is None or not text.strip():
        raise ConfigurationError("scaling mode needs a non-empty --sweep, e.g. 16,32,64")
    try:
        sizes = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"--sweep must be comma-separated grid sizes, got {text!r}")
    if not sizes:
        raise ConfigurationError("--sweep is empty")
    for n in sizes:
        GridDims.square(n)
    return sizes


def _dims(args) -> GridDims:
    return GridDims(args.rows, args.cols if args.cols is not None else args.rows)


# --- modes -----------------------------------------------------------------------


def mode_search(args) -> str:
    dims = _dims(args)
    dims.require_square()
    marked = _parse_marked(args.marked)
    steps = _parse_steps(args.steps)
    if args.walk == "baseline":
        s = 1.0
        cfg = RunConfig(dims, marked, s, "auto" if steps is None else "sweep", steps)
        traj = run_baseline(cfg)
        policy = "sweep"
        p_peak, peak_step = traj.marked_peak_value, traj.marked_peak_step
    else:
        s = _parse_s(args.s, dims)
        if args.scan:
            if args.walk != "main":
                raise ConfigurationError("--scan applies to the main walk only")
            traj, _ = scan_peak(RunConfig(dims, marked, s))
            policy = "scan"
        else:
            cfg = RunConfig(dims, marked, s, "auto" if steps is None else "fixed", steps)
            traj = (run_main_walk if args.walk == "main" else run_intermediate_walk)(cfg)
            policy = cfg.policy
        p_peak, peak_step = traj.peak_value, traj.peak_step
    if args.format == "csv":
        return to_csv(["step", "p_selfloop", "p_marked", "norm_drift"], traj.rows())
    summary = {"n": dims.n_rows, "N": dims.N, "s": s, "policy": policy, "steps": traj.steps,
               "p_peak": p_peak, "peak_step": peak_step, "phi1": traj.phi1, "beta": traj.beta}
    return to_json(summary) + "\n"


def spectra_rows(dims: GridDims):
    subs = spectra.enumerate_subspaces(dims)
    owner = {}
    for sub in subs:
        for lab in sub.labels:
            owner[lab] = sub
    for k in range(dims.n_rows // 2):
        for l in range(dims.n_cols // 2):
            sub = owner[spectra.EigLabel(k, l, "00")]
            yield k, l, spectra.eigenphase(dims, k, l), sub.dim, sub.id


def mode_spectra(args) -> str:
    dims = _dims(args)
    rows = list(spectra_rows(dims))
    if args.format == "json":
        keys = ("k", "l", "theta_kl", "dim", "subspace_id")
        return to_json({"n_rows": dims.n_rows, "n_cols": dims.n_cols,
                        "counts": spectra.subspace_count_report(dims),
                        "rows": [dict(zip(keys, r)) for r in rows]}) + "\n"
    return to_csv(["k", "l", "theta_kl", "dim", "subspace_id"], rows)


def secular_summary(dims: GridDims, s: float | None = None) -> dict:
    dims.require_square()
    s = InterpolationParams.default(dims).s if s is None else s
    wf1 = secular.analyze_wf1(dims, s)
    f2 = secular.decompose_f2(dims, s, wf1)
    b = secular.smallest_eigenphase(f2).alpha
    phi1 = wf1.phi1
    # g1: overlap with the W F1 eigenspace at phi1
    j = int(abs(f2.phis - phi1).argmin())
    alpha = spectra.eigenphase(dims, 1, 0) / dims.N
    s0, s4 = secular.asymptotic_sums(dims, alpha)
    return {"N": dims.N, "s": s, "phi1": phi1, "beta": b,
            "g0_sq": f2.s0 ** 2, "g1_sq": float(f2.weights[j]),
            "overlap_WF1": secular.slow_subspace_overlap(dims, s, "WF1"),
            "overlap_WF": secular.slow_subspace_overlap(dims, s, "WF", wf1),
            "sum_S0": s0, "sum_S4": s4}


def mode_secular(args) -> str:
    dims = _dims(args)
    dims.require_square()
    s = _parse_s(args.s, dims)
    summary = secular_summary(dims, s)
    if args.format == "csv":
        return to_csv(list(summary), [list(summary.values())])
    return to_json(summary) + "\n"


SCALING_HEADER = ["N", "phi1", "beta", "phi1_sqrtNlogN", "beta_sqrtNlogN", "p_peak",
                  "one_minus_p_times_logN", "baseline_peak_times_logN"]


def scaling_row(n: int) -> list:
    dims = GridDims.square(n)
    N, L = dims.N, math.log(dims.N)
    traj = run_main_walk(RunConfig(dims))
    base = run_baseline(RunConfig(dims, s=1.0, policy="auto"))
    root = math.sqrt(N * L)
    return [N, traj.phi1, traj.beta, traj.phi1 * root, traj.beta * root, traj.peak_value,
            (1 - traj.peak_value) * L, base.marked_peak_value * L]


def scaling_rows(sizes, threads: int = 1) -> list:
    if threads <= 1 or len(sizes) == 1:
        return [scaling_row(n) for n in sizes]
    with ThreadPoolExecutor(max_workers=min(threads, len(sizes))) as pool:
        return list(pool.map(scaling_row, sizes))


def mode_scaling(args) -> str:
    sizes = _parse_sweep(args.sweep)
    rows = scaling_rows(sizes, thread_cap())
    if args.format == "json":
        return to_json([dict(zip(SCALING_HEADER, r)) for r in rows]) + "\n"
    return to_csv(SCALING_HEADER, rows)


def mode_verify(args) -> tuple[str, bool]:
    dims = _dims(args)
    checks = run_invariant_suite(dims, _parse_marked(args.marked), args.seed)
    ok = all(c.passed for c in checks)
    if args.format == "csv":
        text = to_csv(["check", "max_deviation", "tolerance", "passed"],
                      [(c.name, float(c.max_deviation), float(c.tolerance), c.passed) for c in checks])
    else:
        text = to_json({"n_rows": dims.n_rows, "n_cols": dims.n_cols, "seed": args.seed, "passed": ok,
                        "checks": [{"check": c.name, "max_deviation": float(c.max_deviation),
                                    "tolerance": float(c.tolerance), "passed": c.passed}
                                   for c in checks]}) + "\n"
    return text, ok


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latwalk", description=__doc__)
    p.add_argument("mode", choices=MODES)
    p.add_argument("--rows", type=int, default=16)
    p.add_argument("--cols", type=int, default=None, help="defaults to --rows")
    p.add_argument("--marked", default="0,0", help="marked vertex 'i,j'")
    p.add_argument("--s", default="auto", help="selfloop weight or 'auto' for 1 - 1/(N+1)")
    p.add_argument("--steps", default="auto", help="step count or 'auto'")
    p.add_argument("--walk", choices=("main", "intermediate", "baseline"), default="main")
    p.add_argument("--scan", action="store_true", help="run to twice the auto count and report the peak")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep", default=None, help="grid sizes for scaling mode, e.g. 16,32,64")
    return p


DEFAULT_FORMAT = {"search": "json", "spectra": "csv", "secular": "json", "scaling": "csv", "verify": "json"}


def run(args) -> int:
    if args.format is None:
        args.format = DEFAULT_FORMAT[args.mode]
    ok = True
    if args.mode == "search":
        text = mode_search(args)
    elif args.mode == "spectra":
        text = mode_spectra(args)
    elif args.mode == "secular":
        text = mode_secular(args)
    elif args.mode == "scaling":
        text = mode_scaling(args)
    else:
        text, ok = mode_verify(args)
    write_output(text, args.out)
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigurationError as exc:
        print(f"latwalk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"latwalk: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
