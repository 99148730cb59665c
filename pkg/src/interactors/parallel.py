"""Ordered fan-out of independent chunks onto an optional executor."""
from collections import deque
from concurrent.futures import Executor
from typing import Callable, Iterable, Iterator, Optional, TypeVar

T = TypeVar("T")


def run_ordered(
    fn: Callable[..., T],
    jobs: Iterable[tuple],
    executor: Optional[Executor] = None,
    window: int = 1,
) -> Iterator[T]:
    """Yield ``fn(*job)`` for every job, in job order.

    At most ``window`` jobs are in flight. Results are consumed strictly in order,
    so a caller that stops early sees the same prefix for any executor or window;
    jobs already submitted past that point are cancelled or discarded.
    """
    if executor is None:
        for job in jobs:
            yield fn(*job)
        return
    pending = deque()
    jobs = iter(jobs)
    try:
        for job in jobs:
            pending.append(executor.submit(fn, *job))
            if len(pending) >= max(window, 1):
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
    finally:
        for future in pending:
            future.cancel()
