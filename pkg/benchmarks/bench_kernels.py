"""Benchmark the numba grid kernels against the pure-NumPy fallback.

Builds a 2-d two-tile instance and times the four sweep kernels on both
backends. The numba path gets one unmeasured warm-up call per kernel so JIT
compilation stays out of the timings. Results must agree (integer outputs
exactly, phases to 1e-12) or the run aborts.

Run:

    python benchmarks/bench_kernels.py [--per-axis 192] [--repeats 5]
"""

import argparse
import statistics
import time

import numpy as np

from spectile import BoxUnion, FiberSampleGrid, Lattice, MultiTileConfig
from spectile.kernels import _numpy as np_impl

try:
    from spectile.kernels import _numba as nb_impl

    HAVE_NUMBA = True
except ImportError:
    nb_impl = None
    HAVE_NUMBA = False


def build_instance(per_axis):
    # two disjoint 1-tiles of Z²: the unit square, plus a square split in x
    # and recombined from shifted cells
    lattice = Lattice(np.eye(2))
    region = BoxUnion([
        ([0.0, 0.0], [1.0, 1.0]),
        ([1.0, 0.0], [1.6, 1.0]),
        ([3.6, 2.0], [4.0, 3.0]),
    ])
    cfg = MultiTileConfig(region, lattice, 2)
    from spectile.multitile import verify_k_tiling

    assert verify_k_tiling(cfg, cfg.sample_grid(16)).ok
    grid = FiberSampleGrid.build(lattice, per_axis)
    points = np.ascontiguousarray(grid.points)
    window = np.ascontiguousarray(cfg.window_points)
    face_axes, face_coords = region.face_list()
    freq = np.array([0.31, -0.57])
    return {
        "cover_counts": (points, window, region.lows, region.highs),
        "lambda_hits": (points, window, region.lows, region.highs, 2),
        "boundary_hits": (points, window, face_axes, face_coords, 1e-9),
        "fiber_phases": (points, window, region.lows, region.highs, freq),
    }


def agree(name, a, b):
    if isinstance(a, tuple):
        return all(agree(name, x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind in "iub":
        return np.array_equal(a, b)
    return np.max(np.abs(a - b)) < 1e-12


def time_kernel(fn, args, repeats):
    durations = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        durations.append(time.perf_counter() - t0)
    return durations


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--per-axis", type=int, default=192)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    workload = build_instance(args.per_axis)
    samples = args.per_axis ** 2
    print(f"instance: {samples} grid samples, "
          f"{workload['cover_counts'][1].shape[0]} window shifts")

    if not HAVE_NUMBA:
        print("[info] numba unavailable; timing the NumPy path only")

    header = f"{'kernel':16s} {'numpy (s)':>12s} {'numba (s)':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for name, call_args in workload.items():
        np_fn = getattr(np_impl, name)
        np_times = time_kernel(np_fn, call_args, args.repeats)
        np_mean = statistics.mean(np_times)
        if HAVE_NUMBA:
            nb_fn = getattr(nb_impl, name)
            nb_fn(*call_args)  # JIT warm-up, unmeasured
            if not agree(name, np_fn(*call_args), nb_fn(*call_args)):
                raise SystemExit(f"backend mismatch in {name}")
            nb_times = time_kernel(nb_fn, call_args, args.repeats)
            nb_mean = statistics.mean(nb_times)
            print(f"{name:16s} {np_mean:12.4f} {nb_mean:12.4f} "
                  f"{np_mean / nb_mean:8.2f}x")
        else:
            print(f"{name:16s} {np_mean:12.4f} {'-':>12s} {'-':>9s}")


if __name__ == "__main__":
    main()
