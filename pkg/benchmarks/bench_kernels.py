"""Compiled kernels against their plain-Python source.

    python benchmarks/bench_kernels.py [--repeat 3] [--csv out.csv]

Each kernel runs once to trigger compilation, then ``repeat`` times per
backend; the best wall time is reported.  The uncompiled timings are what a
run with ``SIGNZERO_DISABLE_NUMBA=1`` would see.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time

import numpy as np

from signzero import kernels
from signzero._jit import backend
from signzero.feasibility import chebyshev_lp


def _unit_rows(S):
    return np.ascontiguousarray(S / np.linalg.norm(S, axis=1, keepdims=True))


def _cone(rng, s, d):
    center = rng.standard_normal(d)
    S = rng.standard_normal((s, d))
    S[S @ center < 0] *= -1
    return _unit_rows(S), center / np.linalg.norm(center)


def cases(rng):
    """(label, kernel, workload); ``workload(f)`` runs the case with kernel variant f."""
    S, c = _cone(rng, 27, 4)
    U = rng.random((2000, 4))
    yield "gibbs_sweeps (2000 sweeps, d=4, s=27)", kernels.gibbs_sweeps, lambda f: f(S, c.copy(), U, 1e-10)

    u = rng.random(20_000)
    yield "truncnorm_draw (20000 calls)", kernels.truncnorm_draw, lambda f: [f(-0.3, 2.5, x) for x in u]

    lp = chebyshev_lp(_cone(rng, 99, 4)[0])
    A = np.vstack([lp.A_ub, np.eye(5)])
    b = np.concatenate([lp.b_ub, np.ones(5)])
    yield "simplex (Chebyshev LP, s=99, d=4)", kernels.simplex, lambda f: f(A, b, lp.c, 5000)

    S2, _ = _cone(rng, 40, 4)
    W = rng.standard_normal((12, 4))
    yield "active_set_bounds (s=40, d=4)", kernels.active_set_bounds, lambda f: f(S2, W, 1e-9)

    S3 = _unit_rows(rng.standard_normal((40, 4)))
    yield "find_vertex (s=40, d=4)", kernels.find_vertex, lambda f: f(S3, 1e-9)


def _best(workload, f, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        workload(f)
        best = min(best, time.perf_counter() - t0)
    return best


def run(repeat: int = 3):
    rows = []
    for name, kernel, workload in cases(np.random.default_rng(0)):
        workload(kernel)  # compile
        t_c = _best(workload, kernel, repeat)
        t_p = _best(workload, kernel.py_func, repeat)
        rows.append((name, t_c, t_p, t_p / t_c if t_c > 0 else math.inf))
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args(argv)
    if backend() != "numba":
        print("numba is disabled (SIGNZERO_DISABLE_NUMBA); both columns time the Python source", file=sys.stderr)
    rows = run(args.repeat)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba s':>10}  {'python s':>10}  {'speed-up':>9}")
    for name, t_c, t_p, ratio in rows:
        print(f"{name:<{width}}  {t_c:10.5f}  {t_p:10.5f}  {ratio:8.1f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("kernel", "numba_seconds", "python_seconds", "speedup"))
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
