from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, Generic, List, Optional, TypeVar

from src.core.logging import ContextLogger

T = TypeVar('T')
R = TypeVar('R')


@dataclass
class BatchResult(Generic[T, R]):
    index: int
    input_items: List[T]
    output_items: List[R]
    success: bool
    error: Optional[Exception] = None


class BatchProcessor(Generic[T, R]):
    """Runs fixed-size batches on a thread pool and returns them in input order.

    Batch boundaries depend only on batch_size, so results never depend on
    the number of workers.
    """

    def __init__(
        self,
        batch_size: int,
        workers: int = 1,
        logger: Optional[ContextLogger] = None
    ):
        if batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {batch_size}")
        self.batch_size = batch_size
        self.workers = max(1, workers)
        self.logger = logger or ContextLogger(__name__)

    def _run(
        self,
        index: int,
        batch: List[T],
        process_func: Callable[[List[T]], List[R]]
    ) -> BatchResult[T, R]:
        try:
            return BatchResult(
                index=index,
                input_items=batch,
                output_items=process_func(batch),
                success=True
            )
        except Exception as e:
            self.logger.error(
                "Batch processing failed",
                batch_index=index,
                error=str(e)
            )
            return BatchResult(
                index=index,
                input_items=batch,
                output_items=[],
                success=False,
                error=e
            )

    def process_batch(
        self,
        items: List[T],
        process_func: Callable[[List[T]], List[R]],
        on_complete: Optional[Callable[[BatchResult[T, R]], None]] = None
    ) -> List[BatchResult[T, R]]:
        batches = [items[i:i + self.batch_size] for i in range(0, len(items), self.batch_size)]
        results: List[BatchResult[T, R]] = []

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [
                pool.submit(self._run, index, batch, process_func)
                for index, batch in enumerate(batches)
            ]
            for future in as_completed(futures):
                result = future.result()
                if on_complete is not None:
                    on_complete(result)
                results.append(result)

        results.sort(key=lambda r: r.index)
        return results

    @staticmethod
    def first_error(results: List[BatchResult[T, R]]) -> Optional[Exception]:
        for result in results:
            if not result.success:
                return result.error
        return None
