"""Time the compiled pattern kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--satellites 16] [--side 3] [--directions 40000]
"""

import argparse
import importlib
import math
import timeit

import numpy as np

from formbeam.geometry import euler_zyx


def case(ns, side, m, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.normal(scale=5.0, size=(ns, 3))
    r = np.array([euler_zyx(*rng.uniform(-0.1, 0.1, 3)) for _ in range(ns)])
    coef = np.exp(1j * rng.uniform(0, 2 * np.pi, (ns, side, side))) / math.sqrt(ns * side * side)
    x0 = -(side - 1) / 2 * 0.15
    d = np.array([[x0 + i * 0.15, x0 + j * 0.15, 0.0] for i in range(side) for j in range(side)])
    pos = (t[:, None, :] + np.einsum("nij,ej->nei", r, d)).reshape(-1, 3)
    u = rng.uniform(-0.5, 0.5, (m, 2))
    k = (2 * math.pi / 0.3) * np.column_stack([u, np.sqrt(1 - (u ** 2).sum(1))])
    return k, t, r, x0, coef, pos


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--satellites", type=int, default=16)
    ap.add_argument("--side", type=int, default=3)
    ap.add_argument("--directions", type=int, default=40_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    k, t, r, x0, coef, pos = case(args.satellites, args.side, args.directions)
    backends = {"python": importlib.import_module("formbeam._kernels_py")}
    try:
        backends["cython"] = importlib.import_module("formbeam._kernels")
    except ImportError:
        print("compiled extension not built; timing the fallback only")

    calls = {
        "flat": lambda b: b.array_factor_power(k, pos, coef.ravel()),
        "grid": lambda b: b.grid_array_factor(k, t, r, x0, 0.15, x0, 0.15, coef),
    }
    ne = args.satellites * args.side ** 2
    print(f"{args.directions} directions x {ne} elements, best of {args.repeat}")
    results = {}
    for kernel, fn in calls.items():
        for name, mod in backends.items():
            best = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
            results[kernel, name] = best
            print(f"  {kernel:5s} {name:7s} {best * 1e3:9.2f} ms")
        if "cython" in backends:
            print(f"  {kernel:5s} speedup {results[kernel, 'python'] / results[kernel, 'cython']:8.2f}x")
    if "cython" in backends:
        a = backends["cython"].grid_array_factor(k, t, r, x0, 0.15, x0, 0.15, coef)
        b = backends["python"].grid_array_factor(k, t, r, x0, 0.15, x0, 0.15, coef)
        print(f"  max |cython - python| = {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()
