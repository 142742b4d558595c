"""Shared plumbing: seed derivation and the optional thread cap."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def derive_seed(seed: int, salt: int = 1) -> int:
    """Deterministic second-stream seed, distinct from the input."""
    return (seed * 6364136223846793005 + salt * 1442695040888963407 + 1) % 2**63


def worker_count() -> int:
    """Parallelism cap from CELLFORM_THREADS (default: sequential)."""
    try:
        return max(1, int(os.environ.get("CELLFORM_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Order-preserving map over independent pure computations; runs in a
    thread pool only when CELLFORM_THREADS allows more than one worker."""
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
