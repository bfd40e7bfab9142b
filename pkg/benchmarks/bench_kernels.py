"""Time each kernel under its numba and pure-numpy implementation.

    python benchmarks/bench_kernels.py [--repeat 5] [--hours 43824]

The first numba call (compilation, or cache load) is excluded; the table
reports the best of ``--repeat`` runs and checks both paths agree.
"""
import argparse
import timeit

import numpy as np

from windbias import _kernels as k


def cases(hours, rng):
    field = rng.uniform(0, 15, (hours, 8, 8))
    ii = rng.integers(0, 8, 16)
    jj = rng.integers(0, 8, 16)
    w = rng.uniform(0, 1, 16)
    speeds = rng.gamma(3, 2.5, hours)
    runs = np.round(speeds, 0)  # plenty of short runs of equal values
    breaks = np.zeros(hours, dtype=bool)
    breaks[0] = True
    ref = np.where(rng.random(hours) < 0.1, np.nan, speeds * 0.9)
    bins = rng.integers(0, 288, hours)
    log_h = np.log(np.tile([[2.0], [10.0], [50.0]], (1, hours)))
    prof = rng.uniform(1, 12, (3, hours))
    lats = rng.uniform(-30, 0, 5000)
    lons = rng.uniform(-60, -30, 5000)
    return {
        "stencil_gather": ((field, ii, jj, w),),
        "constant_run_mask": ((runs, breaks, 3),),
        "bin_sums": ((ref, speeds, bins, 288),),
        "cubic_ramp": ((speeds, 3.0, 11.5, 25.0),),
        "log_profile_series": ((log_h, prof),),
        "haversine_many": ((-5.0, -37.0, lats, lons),),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12, equal_nan=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--hours", type=int, default=5 * 8766)
    args = ap.parse_args()
    if not k.HAS_NUMBA:
        print("numba not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}  agree")
    for name, (argv,) in cases(args.hours, rng).items():
        f_np = getattr(k, name + "_np")
        f_nb = getattr(k, name + "_nb")
        agree = _same(f_np(*argv), f_nb(*argv))  # also warms the jit
        t_np = min(timeit.repeat(lambda: f_np(*argv), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: f_nb(*argv), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<20} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
