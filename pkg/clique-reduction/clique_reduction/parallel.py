"""
Trial fan-out over worker processes.

Jobs run through anyio's process pool under a CapacityLimiter; results come back
in job order, so aggregation downstream never depends on the schedule.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import anyio
import anyio.to_process

from .config import get_setting

logger = logging.getLogger("clique-reduction.parallel")


@dataclass(frozen=True)
class TrialFailure:
    """Result slot of a job that raised. Only the text crosses the process boundary."""

    error_type: str
    message: str

    @classmethod
    def from_exception(cls, error: BaseException) -> "TrialFailure":
        return cls(type(error).__name__, str(error))

    def __str__(self):
        return f"{self.error_type}: {self.message}"


def _call(func, job, return_exceptions):
    if not return_exceptions:
        return func(*job)
    try:
        return func(*job)
    except Exception as e:
        return TrialFailure.from_exception(e)


async def _run_all(func, jobs, workers, return_exceptions):
    results: list[Any] = [None] * len(jobs)
    limiter = anyio.CapacityLimiter(workers)

    async def run_one(index, job):
        results[index] = await anyio.to_process.run_sync(_call, func, job, return_exceptions, limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index, job in enumerate(jobs):
            tg.start_soon(run_one, index, job)
    return results


def map_trials(func: Callable, jobs: Sequence[tuple], workers: Optional[int] = None,
               return_exceptions: bool = False) -> list:
    """
    Apply ``func`` to every argument tuple in ``jobs``.

    Args:
        func: A module-level function (it is pickled into the worker processes)
        jobs: One argument tuple per call
        workers: Process count; defaults to the ``workers`` setting, 1 runs in-process
        return_exceptions: Put a TrialFailure in the slot of a failing job instead of raising

    Returns:
        The results in the order of ``jobs``
    """
    jobs = list(jobs)
    workers = workers or get_setting("workers", 1)
    if workers <= 1 or len(jobs) <= 1:
        logger.debug(f"Running {len(jobs)} jobs in-process")
        return [_call(func, job, return_exceptions) for job in jobs]
    logger.debug(f"Running {len(jobs)} jobs on {workers} worker processes")
    return anyio.run(_run_all, func, jobs, workers, return_exceptions)
