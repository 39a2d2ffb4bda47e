"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

from rebo import _pykernels

try:
    from rebo import _ckernels
except ImportError:
    _ckernels = None

HIT_ARGS = (-0.0125, -0.7384, 3105.0, 0.0, 9.81, 1e-5, 2.0)
VOL_ARGS = (66.0, 88.0, 35.06, 64)

CASES = {
    "rk4_hit (dt=1e-5)": lambda k: k.rk4_hit(*HIT_ARGS),
    "jacobian_volume (64^3)": lambda k: k.jacobian_volume(*VOL_ARGS),
}


def bench(mod, fn, repeat):
    n, _ = timeit.Timer(lambda: fn(mod)).autorange()
    return min(timeit.repeat(lambda: fn(mod), number=n, repeat=repeat)) / n


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<26}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, fn in CASES.items():
        py = bench(_pykernels, fn, args.repeat) * 1e3
        if _ckernels is None:
            print(f"{name:<26}{py:>14.3f}{'n/a':>14}{'':>10}")
            continue
        cy = bench(_ckernels, fn, args.repeat) * 1e3
        print(f"{name:<26}{py:>14.3f}{cy:>14.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
