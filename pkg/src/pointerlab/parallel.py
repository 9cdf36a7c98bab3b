"""Order-preserving process-pool map.

The pool size is capped by the ``POINTERLAB_THREADS`` environment variable.
Results always come back in input order, so output never depends on the
number of workers.
"""
import os
from concurrent.futures import ProcessPoolExecutor

ENV_VAR = "POINTERLAB_THREADS"


def worker_count(requested=None):
    """Number of workers: ``requested`` (or the CPU count), capped by the env var."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(ENV_VAR)
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            pass
    return max(1, int(n))


def ordered_map(fn, items, workers=None):
    """``[fn(x) for x in items]``, optionally spread over a process pool."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def ordered_imap(fn, items, workers=None):
    """Lazy version of :func:`ordered_map`; yields results in input order."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        for x in items:
            yield fn(x)
        return
    with ProcessPoolExecutor(max_workers=n) as pool:
        yield from pool.map(fn, items)
