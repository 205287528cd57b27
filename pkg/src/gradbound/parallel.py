"""Deterministic parallel mapping.

Jobs run in a thread pool (the heavy kernels release the GIL) but results are
always collected in submission order, so outputs are bit-identical regardless
of worker count or scheduling.  threads = 0 resolves to the environment
default (GRADBOUND_THREADS) or os.cpu_count().
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

THREADS_ENV_VAR = "GRADBOUND_THREADS"

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["THREADS_ENV_VAR", "resolve_threads", "pmap"]


def resolve_threads(threads: int = 0) -> int:
    """Resolve a worker count: explicit > env default > cpu count."""
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    if threads > 0:
        return threads
    env = os.environ.get(THREADS_ENV_VAR, "").strip()
    if env:
        try:
            val = int(env)
        except ValueError as exc:
            raise ValueError(
                f"{THREADS_ENV_VAR} must be an integer, got {env!r}"
            ) from exc
        if val < 1:
            raise ValueError(f"{THREADS_ENV_VAR} must be >= 1, got {val}")
        return val
    return os.cpu_count() or 1


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int = 0) -> list[R]:
    """Map fn over items, preserving input order in the result list."""
    seq: Sequence[T] = list(items)
    workers = resolve_threads(threads)
    if workers == 1 or len(seq) <= 1:
        return [fn(it) for it in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
