"""Deterministic chunked work mapping.

Work is split into fixed-size chunks whose RNG streams depend only on
(root seed, chunk index), so results are identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK_SIZE = 4096
WORKERS_ENV = "WEAKCLOCK_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV}={value!r} is not an integer") from None
    if workers < 1:
        raise ValueError(f"{WORKERS_ENV}={value!r} must be >= 1")
    return workers


def chunk_bounds(n_items: int, chunk_size: int = CHUNK_SIZE) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk_size, n_items)) for lo in range(0, n_items, chunk_size)]


def map_chunks(fn, n_chunks: int, workers: int | None = None) -> list:
    """Run fn(chunk_index) for all chunks; results returned in chunk order."""
    if workers is None:
        workers = default_workers()
    if workers <= 1 or n_chunks <= 1:
        return [fn(c) for c in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_chunks)))
