from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict

from prometheus_client import Counter, Gauge, Histogram

from src.core.logging import ContextLogger


def _now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class MetricsCollector:
    start_time: datetime = field(default_factory=_now)
    pixels_rendered: int = 0
    bands_completed: int = 0
    bands_failed: int = 0
    objective_evaluations: int = 0
    render_seconds: float = 0.0

    # Prometheus metrics
    pixels_rendered_total = Counter('panorama_pixels_rendered_total', 'Total number of output pixels rendered')
    bands_failed_total = Counter('panorama_bands_failed_total', 'Total number of row bands that failed')
    objective_evaluations_total = Counter('panorama_objective_evaluations_total', 'Total number of e_total evaluations')
    render_duration = Histogram('panorama_render_duration_seconds', 'Time spent rendering one image')
    active_bands = Gauge('panorama_active_bands', 'Number of row bands currently rendering')

    def __post_init__(self):
        self.logger = ContextLogger(__name__)

    def record_render_start(self, width: int, height: int) -> None:
        self.start_time = _now()
        self.logger.info("Render started", width=width, height=height)

    def record_band_start(self) -> None:
        self.active_bands.inc()

    def record_band_complete(self, pixels: int, success: bool) -> None:
        self.active_bands.dec()
        if success:
            self.bands_completed += 1
            self.pixels_rendered += pixels
            self.pixels_rendered_total.inc(pixels)
        else:
            self.bands_failed += 1
            self.bands_failed_total.inc()

    def record_render_complete(self) -> None:
        elapsed = (_now() - self.start_time).total_seconds()
        self.render_seconds += elapsed
        self.render_duration.observe(elapsed)

    def record_objective_evaluation(self) -> None:
        self.objective_evaluations += 1
        self.objective_evaluations_total.inc()

    def get_current_metrics(self) -> Dict[str, Any]:
        current_time = _now()
        return {
            "timestamp": current_time.isoformat(),
            "pixels_rendered": self.pixels_rendered,
            "bands_completed": self.bands_completed,
            "bands_failed": self.bands_failed,
            "objective_evaluations": self.objective_evaluations,
            "render_time": f"{self.render_seconds:.2f}s",
        }
