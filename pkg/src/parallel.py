"""
Worker Pools

Order-preserving process-pool mapping for the embarrassingly parallel axes
(dataset items, FEM evaluations, sampling chains, evaluation repeats).
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from .config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Resolve a worker count.

    Args:
        workers: Explicit count; None uses settings, 0 means all cores

    Returns:
        A positive worker count
    """
    if workers is None:
        workers = get_settings().workers
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _init_worker() -> None:
    # One BLAS / torch thread per process; the pool provides the parallelism
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    try:
        import torch
        torch.set_num_threads(1)
    except ImportError:
        pass


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: Optional[int] = None,
) -> list[R]:
    """
    Apply ``fn`` to every item, preserving order.

    Runs serially in-process when a single worker is requested, so results
    are identical either way as long as ``fn`` derives its randomness from
    the item itself.

    Args:
        fn: Picklable callable
        items: Inputs
        workers: Worker count (see resolve_workers)

    Returns:
        List of results in input order
    """
    items = list(items)
    count = min(resolve_workers(workers), max(len(items), 1))
    if count == 1:
        return [fn(item) for item in items]

    logger.debug(f"Dispatching {len(items)} items to {count} workers")
    chunksize = max(1, len(items) // (count * 4))
    with ProcessPoolExecutor(max_workers=count, initializer=_init_worker) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
