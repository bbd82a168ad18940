"""
Coordinator for regime-map sweeps.

Cells are queued and consumed by a fixed set of async workers. Each worker
hands its cell to an executor (a process pool when jobs > 1, the loop's
default thread executor otherwise) and resolves the caller's future with
the result. Errors from one cell do not stop the others.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
import random
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .const import SHUTDOWN_TIMEOUT

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from .models import CellResult, CellTask

_LOGGER = logging.getLogger(__name__)


@dataclass
class _Job:
    """A queued cell and the future awaiting its result."""

    task: CellTask
    future: asyncio.Future


@dataclass
class SweepCoordinatorConfig:
    """Configuration for SweepCoordinator initialization."""

    jobs: int = 1
    seed: int | None = None
    shutdown_timeout: float = SHUTDOWN_TIMEOUT


class SweepCoordinator:
    """Queue of sweep cells drained by `jobs` workers."""

    def __init__(
        self,
        config: SweepCoordinatorConfig,
        *,
        evaluate: Callable[[CellTask], CellResult],
        executor: Executor | None = None,
    ) -> None:
        """Initialize an idle coordinator; call start() before run()."""
        if config.jobs < 1:
            msg = f"jobs must be >= 1, got {config.jobs!r}"
            raise ValueError(msg)
        self._config = config
        self._evaluate = evaluate
        self._executor = executor
        self._owns_executor = executor is None and config.jobs > 1
        self._queue: asyncio.Queue[_Job] = asyncio.Queue()
        self._workers: list[asyncio.Task] = []
        self._completed = 0

    @property
    def jobs(self) -> int:
        """Return the number of workers."""
        return self._config.jobs

    @property
    def completed(self) -> int:
        """Return how many cells have finished since start()."""
        return self._completed

    async def start(self) -> None:
        """Start the workers (and a process pool when jobs > 1)."""
        if self._workers:
            return
        if self._owns_executor and self._executor is None:
            self._executor = ProcessPoolExecutor(max_workers=self._config.jobs)
        self._completed = 0
        self._workers = [
            asyncio.create_task(self._run_worker(), name=f"sweep_worker_{k}")
            for k in range(self._config.jobs)
        ]
        _LOGGER.debug("Started %d sweep workers", len(self._workers))

    async def stop(self) -> None:
        """Stop the workers and fail any cells still queued."""
        for worker in self._workers:
            worker.cancel()
        while not self._queue.empty():
            with contextlib.suppress(asyncio.QueueEmpty):
                job = self._queue.get_nowait()
                if not job.future.done():
                    job.future.set_exception(asyncio.CancelledError())
        for worker in self._workers:
            with contextlib.suppress(asyncio.CancelledError, TimeoutError):
                await asyncio.wait_for(worker, timeout=self._config.shutdown_timeout)
        self._workers = []
        if self._owns_executor and self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    async def _run_worker(self) -> None:
        """Worker: dequeue, evaluate off-loop, propagate result or error."""
        loop = asyncio.get_running_loop()
        while True:
            job = await self._queue.get()
            try:
                result = await loop.run_in_executor(
                    self._executor, self._evaluate, job.task
                )
                self._completed += 1
                if not job.future.done():
                    job.future.set_result(result)
            except asyncio.CancelledError:
                if not job.future.done():
                    job.future.cancel()
                raise
            except Exception as exc:  # noqa: BLE001
                _LOGGER.debug("Cell (%d, %d) raised: %s", job.task.i, job.task.j, exc)
                if not job.future.done():
                    job.future.set_exception(exc)
            finally:
                self._queue.task_done()

    async def submit(self, task: CellTask) -> CellResult:
        """Enqueue one cell and await its result."""
        future = asyncio.get_running_loop().create_future()
        await self._queue.put(_Job(task=task, future=future))
        return await future

    async def run(self, tasks: Sequence[CellTask]) -> list[CellResult]:
        """
        Evaluate every task and return results ordered by (i, j).

        The seed shuffles submission order only; results do not depend on it.
        """
        order = list(range(len(tasks)))
        if self._config.seed is not None:
            random.Random(self._config.seed).shuffle(order)  # noqa: S311
        pending = [asyncio.ensure_future(self.submit(tasks[k])) for k in order]
        results = await asyncio.gather(*pending)
        return sorted(results, key=lambda cell: (cell.i, cell.j))
