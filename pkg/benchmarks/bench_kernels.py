"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 500 2000] [--repeat 5]

Also times one KL evaluation and one CoS evaluation end to end under each
backend, which is what a separation iteration spends its time on.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ccca import _kernels_py, empirical, separation
from ccca.copulas import CopulaModel, sample_copula

try:
    from ccca import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def _cases(T, rng):
    x, y = rng.normal(size=T), rng.gamma(2.0, size=T)
    u, v = _kernels_py.smoothed_cdf_at_samples(x, 0.3), _kernels_py.smoothed_cdf_at_samples(y, 0.5)
    du, dv = empirical._dense_ranks(x), empirical._dense_ranks(y)
    U2 = np.rint(2 * empirical.rankdata(x)).astype(np.int64)
    V2 = np.rint(2 * empirical.rankdata(y)).astype(np.int64)
    order = np.argsort(U2, kind="stable")
    k = _kernels_py.empirical_copula_counts(du, dv)[order]
    return {
        "smoothed_cdf_at_samples": lambda K: K.smoothed_cdf_at_samples(x, 0.3),
        "copula_kde_at_samples": lambda K: K.copula_kde_at_samples(u, v, 0.1, 0.1),
        "empirical_copula_counts": lambda K: K.empirical_copula_counts(du, dv),
        "cos_core": lambda K: K.cos_core(k, U2[order], V2[order]),
    }


def _end_to_end(T):
    uv = sample_copula(CopulaModel("frank", 5.0), T, 0)
    model = CopulaModel("frank", 5.0)
    return {
        "kl_divergence_estimate": lambda: separation.kl_divergence_estimate(uv.T, model),
        "cos_index": lambda: empirical.cos_index(uv[:, 0], uv[:, 1]),
    }


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'T':>6s} {'compiled ms':>12s} {'numpy ms':>10s} {'speedup':>8s}")
    for T in args.sizes:
        for name, fn in _cases(T, rng).items():
            slow = _best(lambda: fn(_kernels_py), args.repeat)
            fast = _best(lambda: fn(_kernels), args.repeat) if _kernels else float("nan")
            print(f"{name:28s} {T:6d} {1e3 * fast:12.3f} {1e3 * slow:10.3f} {slow / fast:8.1f}")
        for name, fn in _end_to_end(T).items():
            fast = _best(fn, args.repeat) if _kernels else float("nan")
            saved = empirical.kernels, separation.kernels
            empirical.kernels = separation.kernels = _kernels_py
            try:
                slow = _best(fn, args.repeat)
            finally:
                empirical.kernels, separation.kernels = saved
            print(f"{name:28s} {T:6d} {1e3 * fast:12.3f} {1e3 * slow:10.3f} {slow / fast:8.1f}")


if __name__ == "__main__":
    main()
