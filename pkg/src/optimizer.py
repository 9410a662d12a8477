import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.config import OptimizerConfig, ProjectionConfig, RuntimeConfig
from src.core.errors import NumericError
from src.core.logging import ContextLogger
from src.distortion import saliency_e1, total_error
from src.models import EquirectImage
from src.monitoring.metrics import MetricsCollector
from src.processing.progress import ProgressTracker

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


class CachedObjective:
    """Memoizes a scalar objective and checks its values are finite"""

    def __init__(self, func: Callable[[float], float]):
        self.func = func
        self.values: Dict[float, float] = {}

    def __call__(self, beta: float) -> float:
        beta = float(beta)
        if beta not in self.values:
            value = float(self.func(beta))
            if not math.isfinite(value):
                raise NumericError(f"objective is not finite at beta={beta}: {value}")
            self.values[beta] = value
        return self.values[beta]

    @property
    def evaluations(self) -> int:
        return len(self.values)


def _better(candidate: Tuple[float, float], incumbent: Tuple[float, float]) -> bool:
    """Lower error wins; equal errors go to the larger beta"""
    return candidate[1] < incumbent[1] or (candidate[1] == incumbent[1] and candidate[0] > incumbent[0])


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float) -> Tuple[float, float]:
    """Golden-section search for the minimum of a unimodal f on [a, b].

    Returns the best point seen and its value; ties move toward larger arguments.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    best = (b, f(b))
    if _better((a, f(a)), best):
        best = (a, f(a))
    if h <= tol:
        return best

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    for point, value in ((c, yc), (d, yd)):
        if _better((point, value), best):
            best = (point, value)
    mid = (a + b) / 2.0
    candidate = (mid, f(mid))
    if _better(candidate, best):
        best = candidate
    return best


def search_beta(
    objective: Callable[[float], float],
    opt: OptimizerConfig,
    logger: Optional[ContextLogger] = None,
    show_progress: bool = False
) -> Tuple[float, float]:
    """Coarse grid scan over [beta_min, beta_max], then golden-section refinement
    inside the bracket around the grid minimum"""
    opt.validate()
    logger = logger or ContextLogger(__name__)
    f = objective if isinstance(objective, CachedObjective) else CachedObjective(objective)

    grid = np.linspace(opt.beta_min, opt.beta_max, opt.grid)
    values = []
    with ProgressTracker(len(grid), "Scanning beta", enabled=show_progress) as progress:
        for beta in grid:
            values.append(f(beta))
            progress.update("success")

    k = 0
    for i in range(1, len(grid)):
        if _better((grid[i], values[i]), (grid[k], values[k])):
            k = i
    best = (float(grid[k]), values[k])
    logger.debug("Coarse scan finished", best_beta=best[0], best_error=best[1], points=len(grid))

    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, len(grid) - 1)])
    refined = golden_section(f, lo, hi, opt.tolerance)
    if _better(refined, best):
        best = refined

    logger.info(
        "Beta search finished",
        beta=best[0],
        e_total=best[1],
        bracket=[lo, hi],
        evaluations=f.evaluations
    )
    return best


def optimize_beta(
    img: EquirectImage,
    opt: OptimizerConfig,
    projection: Optional[ProjectionConfig] = None,
    runtime: Optional[RuntimeConfig] = None,
    logger: Optional[ContextLogger] = None,
    metrics: Optional[MetricsCollector] = None
) -> Tuple[float, float]:
    """Blend parameter minimizing the saliency-weighted distortion of img"""
    opt.validate()
    runtime = runtime or RuntimeConfig()
    projection = projection or ProjectionConfig()
    saliency = saliency_e1(img)

    def objective(beta: float) -> float:
        if metrics is not None:
            metrics.record_objective_evaluation()
        return total_error(img, beta, opt, projection, saliency=saliency, runtime=runtime)

    return search_beta(objective, opt, logger, runtime.show_progress)
