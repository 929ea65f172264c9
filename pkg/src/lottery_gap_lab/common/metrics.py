"""
Prometheus metrics for lab runs.

Purpose:
- counters for checked instances, inequality violations and LP solves
- stage latency histogram shared by services and the CLI
- text exposition file for batch runs (no HTTP endpoint)
"""

from __future__ import annotations

import time
from collections.abc import Iterator
from contextlib import contextmanager

from prometheus_client import REGISTRY, Counter, Histogram, write_to_textfile

INSTANCES_CHECKED_TOTAL = Counter(
    "lab_instances_checked_total",
    "Checked instances",
    ["setting", "result"],  # pass|fail|error
)

INEQUALITY_VIOLATIONS_TOTAL = Counter(
    "lab_inequality_violations_total",
    "Inequality rows that failed",
    ["inequality"],
)

LP_SOLVES_TOTAL = Counter(
    "lab_lp_solves_total",
    "LP solves by backend",
    ["backend", "status"],
)

STAGE_LATENCY_MS = Histogram(
    "lab_stage_latency_ms",
    "Stage latency (ms)",
    ["stage"],
    buckets=(1, 5, 10, 25, 50, 100, 250, 500, 1000, 2500, 5000, 10000, 30000, 120000),
)


@contextmanager
def track_stage_latency(stage: str, timings: dict[str, float] | None = None) -> Iterator[None]:
    started = time.perf_counter()
    try:
        yield
    finally:
        elapsed_ms = (time.perf_counter() - started) * 1000
        STAGE_LATENCY_MS.labels(stage=stage).observe(elapsed_ms)
        if timings is not None:
            timings[stage] = timings.get(stage, 0.0) + elapsed_ms


def write_metrics_textfile(path: str) -> None:
    write_to_textfile(path, REGISTRY)
