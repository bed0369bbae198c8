"""Deterministic chunked execution helper.

Work is always split into the same fixed-size chunks regardless of the thread
count, and every chunk writes into a disjoint, preassigned slice of the output.
Results are therefore bit-identical for any number of threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

CHUNK_ROWS = 32


def chunk_ranges(total: int, chunk: int = CHUNK_ROWS) -> list[tuple[int, int]]:
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def run_chunked(fn: Callable[[int, int], None], total: int, threads: int = 1,
                chunk: int = CHUNK_ROWS) -> None:
    """Call fn(start, stop) for every chunk, possibly from worker threads."""
    ranges = chunk_ranges(total, chunk)
    if threads <= 1 or len(ranges) <= 1:
        for start, stop in ranges:
            fn(start, stop)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda r: fn(*r), ranges))
