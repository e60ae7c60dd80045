"""Ordered thread map capped by ``FBWAVE_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers() -> int:
    raw = os.environ.get("FBWAVE_THREADS", "").strip()
    if not raw:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"FBWAVE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"FBWAVE_THREADS must be a positive integer, got {raw!r}")
    return n


def pmap(fn, items):
    """``list(map(fn, items))`` with results in input order."""
    items = list(items)
    n = min(max_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
