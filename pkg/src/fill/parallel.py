"""Deterministic fan-out helper.

Results come back in input order no matter how the pool schedules work,
so callers stay byte-reproducible across worker counts.
"""

from concurrent.futures import ThreadPoolExecutor


def thread_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
