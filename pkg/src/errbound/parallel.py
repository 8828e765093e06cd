"""Deterministic chunked evaluation.

Work is always split into chunks of a fixed size, independent of the number
of workers; threads only change the schedule.  Results come back in index
order, so any reduction over them is schedule-independent.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")

CHUNK = 1024


def chunk_bounds(n: int, chunk: int = CHUNK) -> List[range]:
    return [range(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def map_chunks(fn: Callable[[range], T], n: int, workers: int = 1, chunk: int = CHUNK) -> List[T]:
    """Apply ``fn`` to consecutive index ranges and return results in order."""
    parts: Sequence[range] = chunk_bounds(n, chunk)
    if workers <= 1 or len(parts) <= 1:
        return [fn(r) for r in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, parts))
