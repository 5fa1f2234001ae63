"""Compare the numba-compiled kernels with their pure-Python source.

    python benchmarks/bench_kernels.py [--draws 200000] [--solves 500]

Prints wall time per kernel for both paths and checks they agree.
"""

import argparse
import time

import numpy as np

from toflab import kernels
from toflab._jit import NUMBA_ENABLED, python_impl


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_drift_errors(draws):
    rng = np.random.default_rng(0)
    eps = rng.uniform(-2e-5, 2e-5, size=(draws, 2))
    q = np.array([1.00013e-3, 3.99987e-3, 4e-3, 1e-3])
    args = (kernels.DOUBLE_PULSE, q, 80e-9, 50e-9, eps)
    kernels.drift_errors(*args)  # compile
    t_jit, a = timed(kernels.drift_errors, *args)
    t_py, b = timed(python_impl(kernels.drift_errors), *args, repeat=1)
    assert np.allclose(a, b, rtol=0, atol=1e-20)
    return t_jit, t_py


def bench_lm(solves):
    rng = np.random.default_rng(1)
    problems = []
    for _ in range(solves):
        anchors = rng.uniform(-50, 50, size=(4, 2))
        tag = anchors.mean(axis=0) + rng.uniform(-5, 5, 2)
        meas = np.linalg.norm(anchors - tag, axis=1)
        problems.append((anchors, anchors, meas, False, anchors.mean(axis=0), 1e-9, 100, 1e-3))

    def run(fn):
        return [fn(*p)[:2] for p in problems]

    run(kernels.lm_solve)  # compile
    t_jit, a = timed(run, kernels.lm_solve)
    t_py, b = timed(run, python_impl(kernels.lm_solve), repeat=1)
    assert np.allclose(a, b, atol=1e-9)
    return t_jit, t_py


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=200_000)
    parser.add_argument("--solves", type=int, default=500)
    args = parser.parse_args()
    if not NUMBA_ENABLED:
        print("numba disabled; both columns run the pure-Python path")
    print(f"{'kernel':<14}{'numba [s]':>12}{'python [s]':>12}{'speedup':>10}")
    for name, (t_jit, t_py) in (
        ("drift_errors", bench_drift_errors(args.draws)),
        ("lm_solve", bench_lm(args.solves)),
    ):
        print(f"{name:<14}{t_jit:>12.4f}{t_py:>12.4f}{t_py / t_jit:>10.1f}x")


if __name__ == "__main__":
    main()
