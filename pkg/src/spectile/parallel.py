"""Deterministic chunked parallelism for per-sample sweeps.

Workers fill preallocated per-index slots, so results are identical for any
thread count; reductions happen after the sweep, never in completion order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "SPECTILE_THREADS"


def default_threads() -> int:
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_blocks(worker, n_items: int, threads: int) -> None:
    """Run ``worker(lo, hi)`` over a partition of range(n_items).

    With ``threads <= 1`` the worker runs inline on the full range.
    """
    if n_items <= 0:
        return
    threads = max(1, int(threads))
    if threads == 1:
        worker(0, n_items)
        return
    block = max(1, math.ceil(n_items / (4 * threads)))
    spans = [(lo, min(lo + block, n_items)) for lo in range(0, n_items, block)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, lo, hi) for lo, hi in spans]
        for f in futures:
            f.result()
