"""Per-frame parallelism capped by the MULTICOIN_THREADS environment variable.

Frame renders are pure functions, so mapping them through a thread pool
preserves output ordering and determinism; the default of one worker keeps
single-shot CLI runs free of pool overhead.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("MULTICOIN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def map_frames(fn, items):
    """Order-preserving map, threaded when MULTICOIN_THREADS > 1."""
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
