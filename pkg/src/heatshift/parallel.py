"""Thread-pool helpers; results are always assembled in input order.

HEATSHIFT_THREADS caps the worker count.  Tasks are independent and results
are placed by index, so output is identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    "Worker cap from HEATSHIFT_THREADS (positive integer), default min(4, cpus)."
    raw = os.environ.get("HEATSHIFT_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        raise ValueError(f"HEATSHIFT_THREADS must be a positive integer, got {raw!r}")
    return count


def parallel_map(fn, items, workers: int | None = None) -> list:
    "map() across a thread pool, preserving input order."
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
