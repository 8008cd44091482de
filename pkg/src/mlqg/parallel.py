"""Worker-thread control via the MLQG_THREADS environment variable.

MLQG_THREADS caps the number of worker threads used for per-layer work;
0 or unset means automatic (at most 4).  Layer tasks write to disjoint
slices, so results are bit-identical for any thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "map_layers"]

_pool = None
_pool_size = 0


def thread_count():
    raw = os.environ.get("MLQG_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"MLQG_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"MLQG_THREADS must be >= 0, got {n}")
    if n == 0:
        n = min(4, os.cpu_count() or 1)
    return n


def map_layers(fn, items):
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(item) for item in items]
    global _pool, _pool_size
    if _pool is None or _pool_size != n:
        if _pool is not None:
            _pool.shutdown(wait=True)
        _pool = ThreadPoolExecutor(max_workers=n)
        _pool_size = n
    return list(_pool.map(fn, items))
