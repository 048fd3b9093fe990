"""Worker pools with results independent of the worker count."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_MAX_WORKERS = "BGW_MAX_WORKERS"


def resolve_workers(workers: int | None) -> int:
    """Clamp a requested worker count by ``$BGW_MAX_WORKERS`` (default 1)."""
    w = 1 if workers is None else int(workers)
    if w < 1:
        raise ValueError("worker count must be >= 1")
    cap = os.environ.get(ENV_MAX_WORKERS)
    if cap:
        w = min(w, max(1, int(cap)))
    return w


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int | None = 1) -> list[R]:
    """``[fn(x) for x in items]``, optionally on a thread pool, in input order."""
    w = resolve_workers(workers)
    if w == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


def chunked(n: int, size: int) -> list[range]:
    """Fixed partition of ``range(n)``; never depends on the worker count."""
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def exact_sum(parts: Iterable[float]) -> float:
    """Correctly rounded sum, so the combination order cannot matter."""
    return math.fsum(parts)
