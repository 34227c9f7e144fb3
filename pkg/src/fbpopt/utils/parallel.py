"""
Thread-Parallel Sampling

Sampling loops draw every random input up front from one seeded generator
and only then evaluate, so results do not depend on the worker count.
``FBPOPT_THREADS`` (environment, or ``.env`` loaded by the CLI) caps the
number of workers; the default is 1.
"""

from __future__ import annotations

import logging
import os
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "FBPOPT_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("Ignoring %s=%r (not an integer).", THREADS_ENV, raw)
        return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], n_jobs: Optional[int] = None) -> List[R]:
    """Apply *fn* to every item, preserving order."""
    items = list(items)
    n_jobs = worker_count() if n_jobs is None else n_jobs
    if n_jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(item) for item in items)
