"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude compilation (one warm-up call per kernel).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from impsobol import kernels
from impsobol.polynomials import hermite, hyperbolic_index_set, legendre


def cases():
    rng = np.random.default_rng(0)
    h = hermite()
    x = rng.normal(size=200_000)
    yield "orthonormal_table (2e5 pts, deg 10)", (x, np.asarray(h.a), np.asarray(h.b), 10), "orthonormal_table"

    alphas = hyperbolic_index_set(10, 6, 0.75).alphas
    tables = np.stack([legendre().table(rng.uniform(-1, 1, 2000), 6) for _ in range(10)])
    yield f"design_matrix (2000 x {len(alphas)} terms)", (tables, alphas), "design_matrix"

    # synthetic split: 400 terms over 6 theta dims grouped into 60 aleatory groups
    n_terms, n_theta, deg = 400, 6, 4
    alpha_t = rng.integers(0, deg + 1, (n_terms, n_theta))
    group_of = rng.integers(0, 60, n_terms)
    theta = rng.uniform(-1, 1, (512, n_theta))
    tabs = legendre().table(theta.ravel(), deg).reshape(512, n_theta, deg + 1)
    num = np.zeros(60, dtype=bool)
    num[:5] = True
    den = np.ones(60, dtype=bool)
    den[0] = False
    args = (np.ascontiguousarray(tabs), rng.normal(size=n_terms), alpha_t, group_of, 60, num, den)
    yield "conditional_ratio (512 theta, 400 terms)", args, "conditional_ratio"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    print(f"{'kernel':<44}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for label, a, name in cases():
        slow = getattr(kernels, f"{name}_numpy")
        fast = getattr(kernels, f"{name}_numba")
        ref = slow(*a)
        got = fast(*a)
        if not np.allclose(ref, got, rtol=1e-12, atol=1e-12, equal_nan=True):
            raise SystemExit(f"{name}: numba and numpy results differ")
        t_np = min(timeit.repeat(lambda: slow(*a), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fast(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:<44}{t_np:>10.2f}{t_nb:>10.2f}{t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
