"""Optional process pool sized by ``HAARLAB_THREADS`` (default: run inline)."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager


def worker_count() -> int:
    raw = os.environ.get("HAARLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HAARLAB_THREADS must be an integer, got {raw!r}") from None
    return max(1, min(n, os.cpu_count() or 1))


@contextmanager
def pool():
    """Yield an executor (``map`` keeps submission order) or ``None`` for inline runs."""
    n = worker_count()
    if n <= 1:
        yield None
        return
    with ProcessPoolExecutor(max_workers=n) as ex:
        yield ex
