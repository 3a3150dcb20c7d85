"""
Ordered process-pool mapping.

Workers may finish in any order; results are always collected back into
input order so the reductions downstream see the same sequence for any
thread count.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from lowzero.utils.logging_utils import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(
    func: Callable[[T], R], items: Sequence[T], threads: int = 1
) -> List[R]:
    """
    Apply ``func`` to every item, optionally in worker processes.

    Args:
        func: Module-level (picklable) callable
        items: Inputs, each picklable
        threads: Worker cap; ``<= 1`` runs in-process

    Returns:
        Results in the order of ``items``
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(threads, len(items))
    logger.info(f"Dispatching {len(items)} tasks to {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(func, item) for item in items]
        return [future.result() for future in futures]
