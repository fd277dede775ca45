from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


def chunks(total: int, size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def map_chunks(fn: Callable[..., T], spans: Sequence[tuple[int, int]], workers: int, *args) -> list[T]:
    """Apply ``fn(lo, hi, *args)`` to each span; results come back in span order."""
    if workers <= 1 or len(spans) <= 1:
        return [fn(lo, hi, *args) for lo, hi in spans]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, hi, *args) for lo, hi in spans]
        return [f.result() for f in futures]
