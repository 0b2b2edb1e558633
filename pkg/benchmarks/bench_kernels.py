"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

import argparse
import json
import timeit

import numpy as np

from rangekit import _kernels_py as py

try:
    from rangekit import _ckernels as cy
except ImportError:
    cy = None


def cases(mod):
    cdf = np.cumsum(0.5 ** np.arange(1, 32))
    u = py.uniforms(1, 0, 0, 100_000, 0)
    return {
        "displacement_real(r=2.7, dim=31)": lambda: mod.displacement_real(2.7, 31),
        "displacement_real(r=2.7, dim=61)": lambda: mod.displacement_real(2.7, 61),
        "laguerre_table(n=60, k=0, x=-3)": lambda: mod.laguerre_table(60, 0.0, -3.0),
        "uniforms(count=100000)": lambda: mod.uniforms(7, 3, 0, 100_000, 1),
        "sample_counts(dim=31, n=100000)": lambda: mod.sample_counts(cdf, u),
    }


def best_time(fn, repeat):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", metavar="PATH")
    args = ap.parse_args(argv)

    results = []
    fallback = cases(py)
    compiled = cases(cy) if cy is not None else {}
    print(f"{'kernel':36s} {'numpy [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for name, fn in fallback.items():
        t_py = best_time(fn, args.repeat)
        t_cy = best_time(compiled[name], args.repeat) if name in compiled else float("nan")
        results.append({"kernel": name, "python_s": t_py, "cython_s": t_cy})
        print(f"{name:36s} {t_py * 1e6:12.1f} {t_cy * 1e6:12.1f} {t_py / t_cy:8.1f}x")
    if cy is None:
        print("compiled extension not built; only the fallback was timed")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
