"""Shared parallel executor for bootstrap blocks and Monte Carlo replications."""

from collections.abc import Callable, Iterable
from typing import TypeVar

from joblib import Parallel, delayed

from survtest.config import get_settings

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], n_jobs: int | None = None) -> list[R]:
    """Apply func to every item on a thread pool, returning results in input order.

    Uses SURVTEST_N_JOBS when n_jobs is not given. With a single worker the
    calls run inline, so results never depend on the degree of parallelism.
    """
    if n_jobs is None:
        n_jobs = get_settings().n_jobs
    items = list(items)
    if n_jobs == 1 or len(items) <= 1:
        return [func(item) for item in items]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(func)(item) for item in items)
