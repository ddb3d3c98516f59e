"""Deterministic fan-out of independent work units across processes."""

from __future__ import annotations

from typing import Callable, Sequence


def fan_out(tasks: Sequence, worker: Callable, jobs: int | None) -> list:
    """Map ``worker`` over ``tasks``, optionally in a process pool.

    Results come back in task order, so output is identical for any job
    count. ``jobs`` of None or <= 1 runs inline.
    """
    jobs = jobs or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(worker, tasks))
