"""Compare the numba kernels against their numpy fallbacks.

Both paths are imported side by side (the HOLOFACT_JIT flag only picks
which one the package dispatches to), run on identical inputs, checked for
agreement and timed.  The first numba call, which includes compilation, is
excluded from the timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from holofact import kernels as k
from holofact.quadrature import EXP_POLY


def cases(rng):
    n = 64
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a[0] = 1.5 + 0.2j
    inner = a.copy()
    inner[0] = 0.0
    outer = b / np.arange(1, n + 1) ** 2
    w = 0.3 * (rng.random(4096) + 1j * rng.random(4096))
    E = np.exp(np.arange(n) * 0.0) / np.cumprod(np.r_[1.0, np.arange(1, n)])
    E = E.astype(np.complex128)
    g = np.array([0, -1], dtype=np.complex128)
    x = np.arange(32, 64, dtype=float)
    y = -x * np.log(1.4) + 0.01 * rng.standard_normal(32)
    pc = np.array([0, 0, -1], dtype=np.complex128)
    return [
        ("mul_trunc", (a, b, n)),
        ("div_trunc", (b, a, n)),
        ("exp_series", (a * 0.1, n)),
        ("log_series", (a, n)),
        ("compose", (outer, inner * 0.1, n)),
        ("horner", (outer, w)),
        ("ivp_taylor", (E, g, 0, 0j, 0j, n)),
        ("gk_segment", (EXP_POLY, pc, 0, 0j, 0j, 3.0 + 1.0j, 1e-12, 4000)),
        ("lsq_slope", (x, y, True)),
    ]


def _first(r):
    return r[0] if isinstance(r, tuple) else r


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"numba available: {k.numba is not None}; package dispatch: {k.backend()}")
    print(f"{'kernel':<12}{'numba [us]':>14}{'numpy [us]':>14}{'speedup':>10}{'rel diff':>14}")
    for name, argv_ in cases(rng):
        f_nb = getattr(k, name + "_nb")
        f_np = getattr(k, name + "_np")
        r_nb = f_nb(*argv_)  # compile
        r_np = f_np(*argv_)
        u, v = np.asarray(_first(r_nb)), np.asarray(_first(r_np))
        diff = float(np.max(np.abs(u - v)) / max(np.max(np.abs(v)), 1e-300))
        timings = []
        for f in (f_nb, f_np):
            t = timeit.Timer(lambda f=f: f(*argv_))
            loops, _ = t.autorange()
            timings.append(min(t.repeat(args.repeat, loops)) / loops * 1e6)
        print(f"{name:<12}{timings[0]:>14.2f}{timings[1]:>14.2f}{timings[1] / timings[0]:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
