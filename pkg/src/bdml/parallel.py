"""Order-preserving map over independent replicates."""

from concurrent.futures import ProcessPoolExecutor


def replicate_map(fn, items, workers=1):
    """``[fn(x) for x in items]``, optionally across worker processes.

    Results come back in input order, so reductions are identical whatever
    the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
