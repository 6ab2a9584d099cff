"""Thread-count configuration and an order-preserving parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "FRACWAVE_THREADS"


def thread_count() -> int:
    """Number of worker threads requested through ``FRACWAVE_THREADS``."""
    raw = os.environ.get(ENV_THREADS, "1").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def pmap(fn, items, threads: int | None = None) -> list:
    """Apply ``fn`` to each item, returning results in input order.

    Work items must be independent; every reduction across items is done by
    the caller in a fixed order, so results never depend on the thread count.
    """
    items = list(items)
    n = thread_count() if threads is None else max(1, int(threads))
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))


def chunk_slices(n: int, size: int) -> list[slice]:
    """Fixed partition of ``range(n)`` into consecutive slices of ``size``."""
    size = max(1, int(size))
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]
