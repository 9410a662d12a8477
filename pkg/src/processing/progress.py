from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict

from tqdm import tqdm


def _now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class ProcessingMetrics:
    """Counts of finished work units (output rows or beta evaluations)"""
    total: int = 0
    processed: int = 0
    successful: int = 0
    failed: int = 0
    start_time: datetime = field(default_factory=_now)

    @property
    def elapsed_seconds(self) -> float:
        return (_now() - self.start_time).total_seconds()

    @property
    def success_rate(self) -> float:
        if self.processed == 0:
            return 0.0
        return 100.0 * self.successful / self.processed

    @property
    def units_per_second(self) -> float:
        elapsed = self.elapsed_seconds
        return self.processed / elapsed if elapsed > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": self.total,
            "processed": self.processed,
            "successful": self.successful,
            "failed": self.failed,
            "success_rate": f"{self.success_rate:.2f}%",
            "units_per_second": round(self.units_per_second, 1),
            "duration": f"{self.elapsed_seconds:.2f}s",
        }


class ProgressTracker:
    """tqdm bar over work units; silent unless enabled"""

    def __init__(self, total: int, desc: str = "Processing", enabled: bool = False):
        self.enabled = enabled
        self.progress_bar = tqdm(total=total, desc=desc, unit="unit", disable=not enabled, leave=False)
        self.metrics = ProcessingMetrics(total=total)

    def update(self, status: str, count: int = 1) -> None:
        self.metrics.processed += count
        if status == "success":
            self.metrics.successful += count
        elif status == "failed":
            self.metrics.failed += count

        self.progress_bar.update(count)
        if self.enabled and self.metrics.failed:
            self.progress_bar.set_postfix(failed=self.metrics.failed)

    def close(self) -> None:
        self.progress_bar.close()

    def __enter__(self) -> "ProgressTracker":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
