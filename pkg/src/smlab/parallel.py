"""Thread-count control (``SMLAB_THREADS``) and an order-preserving map."""

from concurrent.futures import ThreadPoolExecutor
import os


def thread_count():
    """Worker threads allowed by ``SMLAB_THREADS`` (default 1)."""
    try:
        n = int(os.environ.get("SMLAB_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


def pmap(fn, items):
    """``list(map(fn, items))``, on a thread pool when more than one thread is allowed."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
