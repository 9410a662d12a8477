import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Type, Union

import numpy as np

from src.core.errors import ConfigError, DomainError, PanoramaError

if TYPE_CHECKING:
    from src.config import OptimizerConfig, ProjectionConfig, RuntimeConfig

# Membership tolerance shared by every kernel
TOL = 1e-9

Real = Union[float, np.ndarray]


def as_output(values: np.ndarray) -> Real:
    """Return a Python float for 0-d results, the array otherwise"""
    if np.ndim(values) == 0:
        return float(values)
    return values


def clamp_to_interval(values: Real, lo: float, hi: float, name: str, tol: float = TOL) -> np.ndarray:
    """Clamp values lying within tol of [lo, hi]; raise DomainError beyond it"""
    arr = np.asarray(values, dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if arr.size and (np.min(arr) < lo - tol or np.max(arr) > hi + tol):
        raise DomainError(
            f"{name} outside [{lo:.12g}, {hi:.12g}]: "
            f"range [{np.min(arr):.12g}, {np.max(arr):.12g}]"
        )
    return np.clip(arr, lo, hi)


def check_scalar(value: float, lo: float, hi: float, name: str, tol: float = TOL) -> float:
    """Scalar variant of clamp_to_interval"""
    if value is None or not math.isfinite(float(value)):
        raise DomainError(f"{name} must be a finite number")
    value = float(value)
    if value < lo - tol or value > hi + tol:
        raise DomainError(f"{name}={value:.12g} outside [{lo:.12g}, {hi:.12g}]")
    return min(max(value, lo), hi)


@dataclass
class ValidationResult:
    is_valid: bool = True
    errors: List[str] = field(default_factory=list)

    def add_error(self, message: str) -> None:
        self.errors.append(message)
        self.is_valid = False

    def raise_if_invalid(self, exc_type: Type[PanoramaError] = ConfigError) -> None:
        if not self.is_valid:
            raise exc_type("; ".join(self.errors))


class ConfigValidator:
    """Checks configuration invariants before any pixel work starts"""

    def validate_projection(self, config: "ProjectionConfig") -> ValidationResult:
        from src.models import BETA_MIN, RectifierName

        result = ValidationResult()

        beta = config.beta_value
        if not (BETA_MIN - TOL <= beta <= 1.0 + TOL):
            result.add_error(f"beta must lie in [{BETA_MIN}, 1], got {beta}")

        if config.out_width < 1 or config.out_height < 1:
            result.add_error(
                f"output size must be at least 1x1, got {config.out_width}x{config.out_height}"
            )

        if not (-math.pi / 2 < config.ceiling_cap <= math.pi / 2 + TOL):
            result.add_error(f"ceiling cap must lie in (-90, 90] degrees, got {math.degrees(config.ceiling_cap):.6g}")

        if config.interpolation not in ("nearest", "bilinear"):
            result.add_error(f"interpolation must be 'nearest' or 'bilinear', got {config.interpolation!r}")

        if len(config.background) != 4 or any(not 0 <= c <= 255 for c in config.background):
            result.add_error("background must be an RGBA tuple of 0..255 values")

        if config.rectifier.name is not RectifierName.NONE and result.is_valid:
            # Output aspect must follow the ellipse axes within one pixel
            expected_width = config.out_height * config.axes.a / config.axes.b
            if abs(config.out_width - expected_width) > 1.0:
                result.add_error(
                    f"output size {config.out_width}x{config.out_height} does not match "
                    f"ellipse axes {config.axes.a:g}:{config.axes.b:g}"
                )

        return result

    def validate_optimizer(self, config: "OptimizerConfig") -> ValidationResult:
        from src.models import BETA_MIN

        result = ValidationResult()
        if config.k_c < 0 or config.k_q < 0 or config.k_c + config.k_q <= 0:
            result.add_error(f"weights must be nonnegative with positive sum, got k_c={config.k_c}, k_q={config.k_q}")
        if config.tolerance <= 0:
            result.add_error(f"tolerance must be positive, got {config.tolerance}")
        if config.grid < 2:
            result.add_error(f"coarse grid needs at least 2 points, got {config.grid}")
        if config.resolution < 2:
            result.add_error(f"metric resolution must be at least 2, got {config.resolution}")
        if not (BETA_MIN - TOL <= config.beta_min < config.beta_max <= 1.0 + TOL):
            result.add_error(
                f"beta range must satisfy {BETA_MIN} <= beta_min < beta_max <= 1, "
                f"got [{config.beta_min}, {config.beta_max}]"
            )
        if not (0 < config.step < 0.05):
            result.add_error(f"finite-difference step must lie in (0, 0.05), got {config.step}")
        return result

    def validate_runtime(self, config: "RuntimeConfig") -> ValidationResult:
        result = ValidationResult()
        if config.threads < 1:
            result.add_error(f"threads must be at least 1, got {config.threads}")
        if config.band_rows < 1:
            result.add_error(f"band_rows must be at least 1, got {config.band_rows}")
        return result
