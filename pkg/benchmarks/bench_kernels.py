"""Compare the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--samples 20000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from aptvdf import _pykernels
from aptvdf.filter_core import PAPER_SPEC, design_prototype

try:
    from aptvdf import _ckernels
except ImportError:
    _ckernels = None


def float_case(mod, x, h, alpha, double_stage):
    n_stages = (len(h) - 1) * (2 if double_stage else 1)

    def run():
        state = np.zeros((n_stages, 2))
        mod.allpass_cascade(x, alpha, h, double_stage, (len(h) - 1) // 2, state)
    return run


def fixed_case(mod, xq, hq, alpha_q, double_stage):
    n_stages = (len(hq) - 1) * (2 if double_stage else 1)

    def run():
        mod.fixed_cascade(xq, alpha_q, hq, double_stage, (len(hq) - 1) // 2,
                          [0] * n_stages, [0] * n_stages, 14, 16, 36, 0, 0)
    return run


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled extension not built; only the fallback is available")
        return 1

    h = np.ascontiguousarray(design_prototype(PAPER_SPEC).coefficients)
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, args.samples)
    xq = np.round(x * 2**14).astype(np.int64)
    hq = np.round(h * 2**14).astype(np.int64)
    alpha = 0.3
    alpha_q = int(round(alpha * 2**14))

    print(f"N={len(h) - 1}, {args.samples} samples, best of {args.repeat}")
    print(f"{'kernel':<22}{'fallback [s]':>14}{'compiled [s]':>14}{'speedup':>10}")
    for double in (False, True):
        tag = "S=-A^2" if double else "S=A"
        rows = [
            (f"float {tag}", float_case(_pykernels, x, h, alpha, double),
             float_case(_ckernels, x, h, alpha, double)),
            (f"fixed {tag}", fixed_case(_pykernels, list(map(int, xq)), list(map(int, hq)),
                                        alpha_q, double),
             fixed_case(_ckernels, xq, hq, alpha_q, double)),
        ]
        for name, slow, fast in rows:
            ts, tf = best_of(slow, args.repeat), best_of(fast, args.repeat)
            print(f"{name:<22}{ts:>14.4f}{tf:>14.4f}{ts / tf:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
