"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each row reports the best-of-``repeat`` wall time of both backends on the
same inputs, their speed ratio and the largest difference between results.
"""
import argparse
import sys
import timeit

import numpy as np

from latticeid import _pycore

try:
    from latticeid import _core
except ImportError:
    sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")


def cases(quick):
    rng = np.random.default_rng(0)
    scale = 4 if quick else 1

    p = rng.random(64)
    p[0] = 1.0
    yield "katti_recursion", "degree 512", (p / p.sum(), 512 // scale)

    for shape in ([96 // scale, 96 // scale], [24 // scale, 24 // scale, 24 // scale]):
        den = np.zeros(shape)
        den[tuple(rng.integers(0, 4, size=(len(shape), 8)))] = rng.random(8)
        den.flat[0] = 1.0
        num = rng.standard_normal(shape)
        label = "x".join(map(str, shape)) + " box, 8-term den"
        yield "series_quotient", label, (num.ravel(), den.ravel(), shape)

    pts = rng.integers(-16, 17, size=(400, 2)).astype(float)
    w = rng.random(400)
    z = rng.uniform(0, 2 * np.pi, size=(4096 // scale, 2))
    yield "charfn_direct", f"400 atoms x {len(z)} points", (pts, w, z)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)

    print(f"{'kernel':<18}{'input':<30}{'python [ms]':>12}{'cython [ms]':>13}{'speedup':>9}{'max diff':>11}")
    for name, label, inputs in cases(args.quick):
        slow, fast = getattr(_pycore, name), getattr(_core, name)
        t_py = min(timeit.repeat(lambda: slow(*inputs), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: fast(*inputs), number=1, repeat=args.repeat))
        a, b = np.asarray(slow(*inputs)), np.asarray(fast(*inputs))
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:<18}{label:<30}{1e3 * t_py:>12.2f}{1e3 * t_cy:>13.2f}{t_py / t_cy:>8.1f}x{diff:>11.1e}")


if __name__ == "__main__":
    main()
