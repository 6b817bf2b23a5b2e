#!/usr/bin/env python3
"""Benchmark the compiled evaluation core against the numpy fallback.

Two representative workloads:
  * the inner loop of a decay experiment: an error field (solution minus
    modified kernel) evaluated on the norm grid at several times;
  * a synthetic sum with many high-order derivative terms on one batch.

Usage: python3 benchmarks/bench_backends.py [--repeats N] [--points P]
"""

import argparse
import math
import time

import numpy as np

from heatshift import (
    HermiteGaussianSum,
    TensorTerm,
    build_modified_kernel,
    compute_moment_table,
)
from heatshift import _core_py
from heatshift.shifts import derive_shift_set
from heatshift.solution import datum_field

try:
    from heatshift import _core
except ImportError:
    _core = None


def norm_grid(points_per_axis):
    z = np.linspace(-8.0, 8.0, points_per_axis)
    grid = np.stack(np.meshgrid(z, z, indexing="ij"), axis=-1).reshape(-1, 2)
    return np.ascontiguousarray(grid)


def decay_workload(points_per_axis):
    f = HermiteGaussianSum((TensorTerm(((1.0, 1.0), (1.0, 1.0))),))
    table = compute_moment_table(f, 2)
    shifts = derive_shift_set(table, 0)
    kernel = build_modified_kernel(table, 0, shifts.indices, shifts.x_star, shifts.t_star)
    field = datum_field(f) - kernel.field()
    times = [16.0 * 4.0**j for j in range(4)]
    grid = norm_grid(points_per_axis)
    return field, [(math.sqrt(t) * grid, t) for t in times]


def synthetic_workload(points):
    rng = np.random.default_rng(7)
    terms = 24
    from heatshift.gaussians import GaussianTermSum

    field = GaussianTermSum(
        n=2,
        coeffs=rng.normal(size=terms),
        alphas=rng.integers(0, 5, size=(terms, 2)).astype(np.int64),
        x_shifts=rng.normal(scale=0.5, size=(terms, 2)),
        t_shifts=rng.uniform(-0.3, 0.1, size=terms),
    )
    pts = np.ascontiguousarray(rng.normal(scale=4.0, size=(points, 2)))
    return field, [(pts, 2.0)]


def run(core, field, batches):
    total = 0.0
    for pts, t in batches:
        out = np.zeros(len(pts))
        core.eval_derivative_gaussian_sum(
            pts, t, field.coeffs, field.alphas, field.x_shifts, field.t_shifts, out
        )
        total += float(out[0])
    return total


def best_time(core, field, batches, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        run(core, field, batches)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--points", type=int, default=129, help="norm grid points per axis")
    args = parser.parse_args()

    workloads = [
        ("decay error field, %dx%d grid x 4 times" % (args.points, args.points),
         *decay_workload(args.points)),
        ("synthetic 24-term sum, 200k points", *synthetic_workload(200_000)),
    ]

    print(f"{'workload':45s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for label, field, batches in workloads:
        t_py = best_time(_core_py, field, batches, args.repeats)
        if _core is None:
            print(f"{label:45s} {t_py*1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        t_cy = best_time(_core, field, batches, args.repeats)
        # agreement check on the last batch
        pts, t = batches[-1]
        out_py = np.zeros(len(pts))
        out_cy = np.zeros(len(pts))
        _core_py.eval_derivative_gaussian_sum(
            pts, t, field.coeffs, field.alphas, field.x_shifts, field.t_shifts, out_py
        )
        _core.eval_derivative_gaussian_sum(
            pts, t, field.coeffs, field.alphas, field.x_shifts, field.t_shifts, out_cy
        )
        scale = np.max(np.abs(out_cy)) + 1e-300
        rel = float(np.max(np.abs(out_cy - out_py)) / scale)
        print(
            f"{label:45s} {t_py*1e3:9.2f}ms {t_cy*1e3:9.2f}ms {t_py/t_cy:7.1f}x"
            f"   (max rel dev {rel:.1e})"
        )
    if _core is None:
        print("compiled extension not built; install with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
