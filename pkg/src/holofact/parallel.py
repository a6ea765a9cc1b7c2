"""Worker-count policy and an order-preserving map."""
import os
from concurrent.futures import ThreadPoolExecutor


def workers():
    env = os.environ.get("HOLOFACT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def pmap(fn, items):
    """map(fn, items) with results in input order, threaded when allowed."""
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
