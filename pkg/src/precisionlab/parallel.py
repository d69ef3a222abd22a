"""Deterministic batch splitting for Monte Carlo loops.

Work is always divided over a fixed batch grid with one child stream per
batch index, then combined in batch order.  Worker count only changes the
scheduling, never the arithmetic, so every result is bit-reproducible for
any number of threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .sampler import RngStream

T = TypeVar("T")

DEFAULT_BATCHES = 32


def batch_counts(total: int, n_batches: int = DEFAULT_BATCHES) -> list[int]:
    """Near-even deterministic split of ``total`` trials into at most ``n_batches``."""
    if total < 0:
        raise ValueError("total must be nonnegative")
    if total == 0:
        return []
    b = min(n_batches, total)
    q, r = divmod(total, b)
    return [q + 1] * r + [q] * (b - r)


def run_batched(
    fn: Callable[[int, RngStream], T],
    total: int,
    rng: RngStream,
    workers: int = 1,
    n_batches: int = DEFAULT_BATCHES,
) -> list[T]:
    """Run ``fn(count, stream)`` over the fixed batch grid, in batch order.

    ``fn`` must be pure given its stream.  Results come back ordered by batch
    index regardless of ``workers``.
    """
    counts = batch_counts(total, n_batches)
    streams = [rng.child(i) for i in range(len(counts))]
    if workers is not None and workers > 1 and len(counts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, counts, streams))
    return [fn(c, s) for c, s in zip(counts, streams)]


def concat_batches(parts: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate(list(parts), axis=0)
