from __future__ import annotations

import time
from typing import Callable, TypeVar

T = TypeVar("T")


def time_iteration(step: Callable[[], T]) -> tuple[T, float]:
    """Run ``step`` once and return its result with elapsed monotonic seconds."""
    start = time.perf_counter()
    out = step()
    return out, time.perf_counter() - start
