"""Tests for timing helpers and the ordered worker pool."""

from __future__ import annotations

import threading
import time

import pytest

from fracpow.performance import StageTiming, get_timings, ordered_map, timed, timed_block


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_ordered_map_keeps_input_order(workers):
    def job(k: int) -> int:
        time.sleep(0.001 * (10 - k))
        return k * k

    assert ordered_map(job, range(10), workers) == [k * k for k in range(10)]


def test_ordered_map_uses_threads():
    names = ordered_map(lambda _: threading.current_thread().name, range(6), 3)
    assert all(name.startswith("fracpow") for name in names)


def test_ordered_map_propagates_errors():
    def job(k: int) -> int:
        if k == 3:
            raise ValueError("boom")
        return k

    with pytest.raises(ValueError, match="boom"):
        ordered_map(job, range(6), 4)


def test_timed_stages_accumulate():
    ledger = get_timings()
    ledger.clear()

    @timed()
    def sweep() -> int:
        return 7

    assert sweep() == 7
    assert sweep() == 7
    with pytest.raises(RuntimeError):
        with timed_block("failing"):
            raise RuntimeError("x")

    stage = ledger.stage("sweep")
    assert stage.calls == 2 and stage.failures == 0
    assert stage.max_ms <= stage.total_ms
    assert ledger.stage("failing").failures == 1
    assert ledger.stage("absent") == StageTiming()
    assert "sweep: 2x" in ledger.summary()
    assert "(1 failed)" in ledger.summary()

    ledger.clear()
    assert ledger.summary() == "no timed stages"
