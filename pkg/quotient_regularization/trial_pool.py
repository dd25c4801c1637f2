import logging
import os
from collections.abc import Callable, Iterable
from queue import Empty, Queue
from threading import Event, Thread
from typing import Any

logger = logging.getLogger(__name__)


class TrialPool:
    """
    Runs independent trials on a fixed set of worker threads fed from one queue.

    Results come back in submission order whatever order the workers finish in.
    Each trial builds its own problem and solver, so workers share nothing but the
    queue and the result slots. numpy's BLAS and FFT calls release the GIL, which is
    where the trials spend their time.
    """

    def __init__(self, jobs: int | None = None):
        self.jobs = max(1, jobs if jobs else (os.cpu_count() or 1))

    def map(self, fn: Callable[[Any], Any], items: Iterable[Any], tag: str = "trials") -> list[Any]:
        work = list(items)
        if not work:
            return []
        if self.jobs == 1 or len(work) == 1:
            return [fn(item) for item in work]

        task_queue: Queue[tuple[int, Any]] = Queue()
        for index, item in enumerate(work):
            task_queue.put((index, item))

        results: list[Any] = [None] * len(work)
        errors: dict[int, BaseException] = {}
        failed = Event()

        def worker() -> None:
            while not failed.is_set():
                try:
                    index, item = task_queue.get_nowait()
                except Empty:
                    return
                try:
                    results[index] = fn(item)
                except BaseException as e:
                    errors[index] = e
                    failed.set()
                finally:
                    task_queue.task_done()

        workers = [Thread(target=worker, daemon=True) for _ in range(min(self.jobs, len(work)))]
        logger.debug(f"[{tag}] {len(work)} tasks on {len(workers)} worker threads")
        for thread in workers:
            thread.start()
        for thread in workers:
            thread.join()

        if errors:
            first = min(errors)
            logger.error(f"[{tag}] task {first} failed: {errors[first]}")
            raise errors[first]
        return results
