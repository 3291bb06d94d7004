#!/usr/bin/env python3
"""Benchmark the numba kernels against the numpy/scipy fallback path.

Micro-benchmarks call both implementations directly; the end-to-end row
re-runs one 1D classification in a subprocess with MEMSIM_NO_NUMBA=1 so the
fallback is selected at import time, exactly as a user would hit it.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from memsim._kernels import (HAS_NUMBA, cg_masked_numba, cg_masked_numpy,
                             thomas_numba, thomas_numpy)


def bench(fn, *args, repeat=5, number=20):
    fn(*args)  # warm-up / jit compile
    t = min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number))
    return t / number


def bench_thomas(n=2001):
    rng = np.random.default_rng(0)
    diag = np.full(n, 4.0)
    off = np.full(n - 1, -1.0)
    rhs = rng.random(n)
    rows = []
    for name, fn in (("thomas numba", thomas_numba),
                     ("thomas numpy/scipy", thomas_numpy)):
        if not HAS_NUMBA and fn is thomas_numba:
            continue
        rows.append((f"{name} (n={n})", bench(fn, off, diag, off, rhs)))
    return rows


def bench_cg(n=129):
    rng = np.random.default_rng(1)
    mask = np.zeros((n, n), dtype=bool)
    mask[1:-1, 1:-1] = True
    dcoef = np.ones((n, n))
    b = np.where(mask, rng.random((n, n)), 0.0)
    x0 = np.zeros((n, n))
    h2 = (n - 1.0) ** 2
    args = (dcoef, 0.01, mask, h2, h2, b, x0, 1e-10, 50_000)
    rows = []
    for name, fn in (("cg numba", cg_masked_numba),
                     ("cg numpy", cg_masked_numpy)):
        if not HAS_NUMBA and fn is cg_masked_numba:
            continue
        rows.append((f"{name} (n={n}x{n})", bench(fn, *args, number=5)))
    return rows


def bench_full_run():
    """Wall time of one 1D classification under each backend."""
    code = ("import time, memsim; t0=time.time(); "
            "out,_,_ = memsim.run(memsim.make_preset('1d-unit', lam=8.0)); "
            "print(f'{time.time()-t0:.3f} {type(out).__name__} '"
            "f'{memsim.BACKEND}')")
    rows = []
    for label, env_val in (("numba", "0"), ("numpy fallback", "1")):
        env = dict(os.environ, MEMSIM_NO_NUMBA=env_val)
        # one throwaway run so jit compilation does not pollute the timing
        subprocess.run([sys.executable, "-c", code], env=env,
                       capture_output=True, text=True)
        proc = subprocess.run([sys.executable, "-c", code], env=env,
                              capture_output=True, text=True, check=True)
        wall, outcome, backend = proc.stdout.split()
        rows.append((f"1d-unit run, backend={backend}", float(wall)))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="skip the subprocess end-to-end rows")
    args = parser.parse_args()

    print(f"numba available: {HAS_NUMBA}")
    rows = bench_thomas() + bench_cg()
    if not args.quick:
        rows += bench_full_run()
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  time")
    for name, t in rows:
        unit = "ms" if t < 1 else "s "
        val = t * 1e3 if t < 1 else t
        print(f"{name:<{width}}  {val:8.3f} {unit}")


if __name__ == "__main__":
    main()
