"""Time the compiled and pure-Python kernels on SaTAD-sized problems.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends run on identical inputs and their outputs are checked for
agreement before timing is reported.
"""
import argparse
import math
import time

import numpy as np

from artsoh import kernels
from artsoh.learn import rbf_kernel


def _problem(n=288, d=7, seed=0):
    rng = np.random.default_rng(seed)
    y = (np.arange(n) < n // 2).astype(np.int64)
    X = rng.normal(size=(n, d)) + 0.8 * y[:, None]
    return np.ascontiguousarray(X), y


def _forest(mod, X, y, n_trees=80, seed=0):
    n, d = X.shape
    out = []
    for ss in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(ss)
        boot = rng.integers(0, n, size=n)
        rand = rng.integers(0, 2**32, size=max(64, 2 * n * d), dtype=np.uint32)
        out.append(mod.grow_tree(X, y, boot, math.isqrt(d), rand))
    return out


def _smo(mod, X, y):
    ys = np.where(y == 1, 1.0, -1.0)
    Q = np.ascontiguousarray(ys[:, None] * ys[None, :] * rbf_kernel(X, X, 1.0))
    box = np.where(y == 1, 3.0, 1.0)
    n = y.size
    return mod.smo_solve(Q, ys, box, 1e-3, 10 * n * n)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=288, help="samples (SaTAD-4 size by default)")
    args = ap.parse_args(argv)
    X, y = _problem(args.n)
    found = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(found)}")
    timings, results = {}, {}
    for name, mod in found.items():
        tf, forest = _best(lambda: _forest(mod, X, y), args.repeat)
        ts, smo = _best(lambda: _smo(mod, X, y), args.repeat)
        timings[name] = (tf, ts)
        results[name] = (forest, smo)
    if len(results) == 2:
        (fc, sc), (fp, sp) = results["cython"], results["python"]
        same_trees = all(all(np.array_equal(a, b) for a, b in zip(tc, tp)) for tc, tp in zip(fc, fp))
        print(f"forests identical: {same_trees}; SMO max |alpha diff|: {np.abs(sc[0] - sp[0]).max():.3g}")
    print(f"{'backend':<8} {'forest(80) ms':>14} {'SMO ms':>10}")
    for name, (tf, ts) in timings.items():
        print(f"{name:<8} {tf * 1e3:>14.1f} {ts * 1e3:>10.1f}")
    if len(timings) == 2:
        print(f"speed-up  {timings['python'][0] / timings['cython'][0]:>14.1f}x "
              f"{timings['python'][1] / timings['cython'][1]:>9.1f}x")


if __name__ == "__main__":
    main()
