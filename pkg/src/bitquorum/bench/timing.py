"""Adaptive wall-clock timing: grow the repetition count until one
timed batch is long enough to trust."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

MAX_REPS = 1 << 20


@dataclass
class TimingResult:
    total_ms: float
    reps: int

    @property
    def ms_per_exec(self) -> float:
        return self.total_ms / self.reps


def time_adaptive(task: Callable[[], object], min_total_ms: float = 1000.0,
                  max_reps: int = MAX_REPS) -> TimingResult:
    """Run ``task`` once; while the timed batch is under ``min_total_ms``,
    double the repetition count and time a fresh batch.  The repetition
    cap bounds the loop for near-zero-cost tasks."""
    reps = 1
    while True:
        start = time.perf_counter()
        for _ in range(reps):
            task()
        total_ms = (time.perf_counter() - start) * 1000.0
        if total_ms >= min_total_ms or reps >= max_reps:
            return TimingResult(total_ms, reps)
        reps *= 2
