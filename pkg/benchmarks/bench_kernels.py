"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once untimed (numba compiles or loads its cache), then
timed ``--repeat`` times; the best time is reported.
"""

import argparse
import time

import numpy as np

from stratexp import _kernels


def cases(rng):
    z = rng.standard_normal((2000, 4096))
    a1, a2 = rng.standard_normal((2, 2000, 4096))
    C = rng.standard_normal((51, 51))
    z1, z2 = rng.standard_normal((2, 100_000, 51))
    Phi = rng.standard_normal((1024, 1024))
    x, y = rng.standard_normal((2, 64, 1024))
    return {
        "bridge_values 2000x4096": ("bridge_values", (z, 1.0)),
        "iterated_sums 2000x4096": ("iterated_sums", (a1, a2)),
        "bilinear_compensated p=50, 1e5 rows": ("bilinear_compensated", (C, z1, z2)),
        "quadratic_form n=1024, 64 rows": ("quadratic_form", (Phi, x, y)),
    }


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sets = {"numpy": _kernels.numpy_kernels}
    if _kernels.numba_kernels is not None:
        sets["numba"] = _kernels.numba_kernels
    print(f"{'kernel':40s}" + "".join(f"{k:>12s}" for k in sets) + "     speedup")
    for label, (name, fargs) in cases(np.random.default_rng(0)).items():
        t = {k: best_of(getattr(ks, name), fargs, args.repeat) for k, ks in sets.items()}
        speed = f"{t['numpy'] / t['numba']:10.1f}x" if "numba" in t else ""
        print(f"{label:40s}" + "".join(f"{v * 1e3:10.1f}ms" for v in t.values()) + speed)


if __name__ == "__main__":
    main()
