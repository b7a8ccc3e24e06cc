"""Command line: ``qwave <command> problem.json --out DIR``.

Exit status 0 on success, 2 for invalid input, 3 for quadrature failure,
4 for a failed verification or oracle comparison, 5 when Picard iteration
does not contract.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .exceptions import NoConvergence, QwaveError
from .problem import load_problem

COMMANDS = ("solve-linear", "solve-nls", "norms", "verify", "reference", "compare")
COMPARE_TOL = 1e-2
NLS_TIME_SLICES = 11


def _dump(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_fields(fields, out: Path, stem="field"):
    """One CSV per time slice, rows in x1-major order, 17 significant digits."""
    names = []
    for i, f in enumerate(fields):
        X1, X2 = np.meshgrid(f.x1_nodes, f.x2_nodes, indexing="ij")
        table = np.column_stack([X1.ravel(), X2.ravel(), f.values.real.ravel(),
                                 f.values.imag.ravel()])
        name = f"{stem}_t{i}.csv"
        np.savetxt(out / name, table, fmt="%.16e", delimiter=",", header="x1,x2,re_u,im_u",
                   comments="")
        names.append(name)
    return names


def _clean(diag: dict) -> dict:
    # timings differ between runs; reports must be byte-identical
    return {k: v for k, v in diag.items() if k not in ("wall_time", "seconds")}


def cmd_solve_linear(spec, out, tol):
    from .linear import utm_solve

    bundle = utm_solve(spec.linear_problem(), spec.nodes(), spec.times())
    files = write_fields(bundle.fields, out)
    _dump({"command": "solve-linear", "times": spec.grid["times"], "files": files,
           **_clean(bundle.diagnostics)}, out / "diagnostics.json")
    return 0


def _nls_grid(spec):
    g = spec.grid
    h = g["x_max"] / g["n"]
    x = h * np.arange(1, g["n"] + 1)
    want = spec.times()
    times = np.union1d(np.linspace(0.0, spec.T, NLS_TIME_SLICES), want)
    return x, times, want


def cmd_solve_nls(spec, out, tol):
    from .nls import picard_solve

    prob = spec.nls_problem()
    x, times, want = _nls_grid(spec)
    try:
        bundle, log = picard_solve(prob, x, times, tol=tol if tol else 1e-8)
    except NoConvergence as exc:
        if exc.log is not None:
            (out / "iteration_log.jsonl").write_text(exc.log.to_jsonl())
        raise
    (out / "iteration_log.jsonl").write_text(log.to_jsonl())
    pick = [int(np.argmin(np.abs(times - t))) for t in want]
    files = write_fields([bundle.fields[i] for i in pick], out)
    _dump({"command": "solve-nls", "times": spec.grid["times"], "files": files,
           "x_spacing": float(x[0]), "time_slices": times.tolist(), **_clean(bundle.diagnostics)},
          out / "diagnostics.json")
    return 0


def cmd_norms(spec, out, tol):
    from .spaces import norm_report

    rep = norm_report(spec.linear_problem(), spec.s, spec.alpha, spec.constants["c"])
    (out / "norms.json").write_text(rep.to_json() + "\n")
    return 0


def cmd_verify(spec, out, tol):
    from .verify import run_verification

    t = float(spec.times()[-1])
    rep = run_verification(spec.linear_problem(), t)
    d = rep.to_dict()
    for c in d["checks"].values():
        c.pop("seconds", None)
    _dump(d, out / "verify.json")
    if not rep.passed:
        bad = [c.name for c in rep.checks if not c.passed]
        print(f"verification failed: {', '.join(bad)}", file=sys.stderr)
        return 4
    return 0


def _fd_problem(spec):
    # with s, alpha given the FD oracle could run the nonlinear problem; the
    # reference command runs the linear data as stated in the file
    return spec.linear_problem()


def cmd_reference(spec, out, tol):
    from .reference import cn_solve, discrete_mass

    cfg = spec.fd_config()
    fields = cn_solve(_fd_problem(spec), cfg, spec.times())
    files = write_fields(fields, out, stem="reference")
    _dump({"command": "reference", "fd": spec.fd, "files": files,
           "mass": [discrete_mass(f) for f in fields], "times": spec.grid["times"]},
          out / "reference.json")
    return 0


def cmd_compare(spec, out, tol):
    from .linear import utm_solve
    from .reference import cn_solve, compare_fields

    cfg = spec.fd_config()
    prob = _fd_problem(spec)
    times = spec.times()
    fd = cn_solve(prob, cfg, times)
    lo, hi = spec.grid["x_min"], spec.grid["x_max"]
    x = cfg.nodes
    x = x[(x >= lo - 1e-12) & (x <= hi + 1e-12)]
    utm = utm_solve(prob, x, times)
    m = compare_fields(utm, fd, region=(lo, hi))
    limit = tol if tol else COMPARE_TOL
    m.update({"command": "compare", "threshold": limit, "passed": bool(m["rel_l2"] <= limit),
              "region": [lo, hi], "fd": spec.fd})
    _dump(m, out / "compare.json")
    if not m["passed"]:
        print(f"UTM vs CN relative L2 {m['rel_l2']:.3e} exceeds {limit:g}", file=sys.stderr)
        return 4
    return 0


HANDLERS = {"solve-linear": cmd_solve_linear, "solve-nls": cmd_solve_nls,
            "norms": cmd_norms, "verify": cmd_verify, "reference": cmd_reference,
            "compare": cmd_compare}


def _threads(arg):
    env = os.environ.get("QW_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"ignoring QW_THREADS={env!r}", file=sys.stderr)
    return arg


def run(command: str, file, out_dir, threads: int | None = None, tol: float | None = None
        ) -> int:
    """Run one command; returns the exit status and writes artifacts to ``out_dir``."""
    if command not in HANDLERS:
        print(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}",
              file=sys.stderr)
        return 2
    n = _threads(threads)
    limits = threadpool_limits(limits=n) if n else contextlib.nullcontext()
    try:
        spec = load_problem(file)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with limits:
            return HANDLERS[command](spec, out, tol)
    except QwaveError as exc:
        print(f"error [{exc.module}]: {exc}", file=sys.stderr)
        return exc.exit_code


def build_parser():
    ap = argparse.ArgumentParser(prog="qwave", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("problem", help="problem file (JSON)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--threads", type=int, default=None,
                    help="BLAS/LAPACK threads (QW_THREADS overrides)")
    ap.add_argument("--tol", type=float, default=None,
                    help="Picard tolerance (solve-nls) or comparison threshold (compare)")
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    return run(a.command, a.problem, a.out, a.threads, a.tol)


if __name__ == "__main__":
    sys.exit(main())
