"""Benchmark the numba-compiled kernels against the pure numpy/python path.

Times the squared-exponential Gram block and the velocity-profile passes at
the package's working sizes and at a larger stress size. Run directly:

    python benchmarks/bench_kernels.py [--reps 2000]
"""

import argparse
import time

import numpy as np

from frictionfusion import _kernels


def _time(fn, args, reps):
    fn(*args)  # warmup / trigger JIT
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def bench_gram(n, reps):
    xs = np.linspace(0.0, 50.0, n)
    args = (xs, xs, 0.2296, 10.0)
    t_np = _time(_kernels.gram_numpy, args, reps)
    t_nb = _time(_kernels.gram_numba, args, reps)
    return t_np, t_nb


def bench_passes(n, reps):
    rng = np.random.RandomState(0)
    kappa = np.abs(rng.uniform(-0.05, 0.05, n))
    mu_g = rng.uniform(0.3, 1.0, n) * 9.81
    v_cap = np.sqrt(np.maximum(mu_g / np.maximum(kappa, 1e-9), 1.0))
    v_cap = np.minimum(v_cap, 20.0)
    ds = 1.0
    mask = np.zeros(n, dtype=np.bool_)

    def run_pair(backward, forward):
        v_bw = backward(v_cap, kappa, mu_g, ds)
        forward(15.0, v_bw, v_cap, kappa, mu_g, ds, mask, 0.85, 0.53)

    args_py = (_kernels.backward_pass_numpy, _kernels.forward_pass_numpy)
    args_nb = (_kernels.backward_pass_numba, _kernels.forward_pass_numba)
    t_py = _time(run_pair, args_py, reps)
    t_nb = _time(run_pair, args_nb, reps)
    return t_py, t_nb


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=2000)
    args = parser.parse_args()

    print(f"numba available: {_kernels.HAVE_NUMBA}; active backend: "
          f"{'numba' if _kernels.USE_NUMBA else 'numpy'}")
    print(f"{'kernel':<28}{'numpy/python':>14}{'numba':>14}{'speedup':>9}")
    for n in (51, 401):
        t_np, t_nb = bench_gram(n, args.reps)
        print(f"{f'gram {n}x{n}':<28}{t_np * 1e6:>12.1f}us{t_nb * 1e6:>12.1f}us"
              f"{t_np / t_nb:>8.1f}x")
    for n in (51, 2001):
        t_py, t_nb = bench_passes(n, args.reps)
        print(f"{f'velocity passes n={n}':<28}{t_py * 1e6:>12.1f}us{t_nb * 1e6:>12.1f}us"
              f"{t_py / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
