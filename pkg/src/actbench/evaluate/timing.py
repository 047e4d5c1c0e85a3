from __future__ import annotations

import time
from collections.abc import Callable
from typing import TypeVar

R = TypeVar("R")

HOUR = 3600.0


def measure_time(task: Callable[[], R]) -> tuple[float, R]:
    """Wall-clock seconds of ``task()`` and its result."""
    start = time.perf_counter()
    result = task()
    return time.perf_counter() - start, result


def format_seconds(seconds: float) -> str:
    """Render in hours above 3600 s, seconds otherwise."""
    if seconds > HOUR:
        return f"{seconds / HOUR:.2f} hrs"
    return f"{seconds:.2f} sec"
