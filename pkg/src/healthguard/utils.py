"""Small shared helpers."""

from __future__ import annotations

import os


def worker_count() -> int:
    """Internal parallelism cap from HG_THREADS (0 or unset means auto)."""
    raw = os.environ.get("HG_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HG_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("HG_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)
