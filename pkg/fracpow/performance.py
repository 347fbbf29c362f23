"""
Timing and worker-pool utilities.

Sweeps and per-term solves run through ``ordered_map`` so that every
reduction downstream sees its inputs in a fixed order. Timed stages are
accumulated in a per-process ledger that the CLI summarizes at DEBUG level.
"""

from __future__ import annotations

import functools
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Dict, Generator, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


# =============================================================================
# Stage Timings
# =============================================================================


@dataclass
class StageTiming:
    """Accumulated wall time of one named stage."""

    calls: int = 0
    failures: int = 0
    total_ms: float = 0.0
    max_ms: float = 0.0


class TimingLedger:
    """Thread-safe accumulation of stage timings, keyed by stage name."""

    __slots__ = ("_stages", "_lock")

    def __init__(self) -> None:
        self._stages: Dict[str, StageTiming] = {}
        self._lock = threading.Lock()

    def record(self, name: str, duration_ms: float, failed: bool = False) -> None:
        with self._lock:
            stage = self._stages.setdefault(name, StageTiming())
            stage.calls += 1
            stage.failures += int(failed)
            stage.total_ms += duration_ms
            stage.max_ms = max(stage.max_ms, duration_ms)

    def stage(self, name: str) -> StageTiming:
        """Copy of one stage's totals (zeros for a stage never timed)."""
        with self._lock:
            current = self._stages.get(name, StageTiming())
            return StageTiming(current.calls, current.failures, current.total_ms, current.max_ms)

    def summary(self) -> str:
        """One 'name: calls x, total ms' entry per stage, slowest first."""
        with self._lock:
            stages = sorted(self._stages.items(), key=lambda item: -item[1].total_ms)
            parts = [
                f"{name}: {stage.calls}x {stage.total_ms:.1f}ms"
                + (f" ({stage.failures} failed)" if stage.failures else "")
                for name, stage in stages
            ]
        return "; ".join(parts) if parts else "no timed stages"

    def clear(self) -> None:
        with self._lock:
            self._stages.clear()


_ledger = TimingLedger()


def get_timings() -> TimingLedger:
    """Process-wide timing ledger."""
    return _ledger


# =============================================================================
# Timing Decorators
# =============================================================================


def timed(
    log_level: int = logging.DEBUG,
    threshold_ms: Optional[float] = None,
) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """Time every call of the decorated function as a stage named after it."""
    def decorator(fn: Callable[..., T]) -> Callable[..., T]:
        @functools.wraps(fn)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            with timed_block(fn.__name__, log_level=log_level, threshold_ms=threshold_ms):
                return fn(*args, **kwargs)

        return wrapper
    return decorator


@contextmanager
def timed_block(
    name: str,
    log_level: int = logging.DEBUG,
    threshold_ms: Optional[float] = None,
) -> Generator[None, None, None]:
    """
    Time a block into the ledger; log it when it took at least threshold_ms.

    Usage:
        with timed_block("apply_fracpow"):
            vectors = ordered_map(solve_term, terms, workers)
    """
    start = time.perf_counter()
    failed = False
    try:
        yield
    except Exception:
        failed = True
        raise
    finally:
        duration_ms = (time.perf_counter() - start) * 1000
        _ledger.record(name, duration_ms, failed)
        if threshold_ms is None or duration_ms >= threshold_ms:
            logger.log(
                log_level,
                "Stage '%s' took %.2fms%s",
                name,
                duration_ms,
                " [failed]" if failed else "",
            )


# =============================================================================
# Worker Pool
# =============================================================================


def ordered_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    max_workers: int = 1,
) -> List[R]:
    """
    Apply fn to every item on a bounded thread pool, results in input order.

    With max_workers == 1 the calls run inline. The first exception raised
    by any call propagates to the caller.

    Args:
        fn: Job function
        items: Job inputs
        max_workers: Pool bound (>= 1)
    """
    jobs = list(items)
    if max_workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]

    workers = min(max_workers, len(jobs))
    logger.debug("Dispatching %d jobs on %d workers", len(jobs), workers)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="fracpow") as pool:
        return list(pool.map(fn, jobs))
