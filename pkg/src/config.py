import math
import os
from dataclasses import dataclass, field
from typing import Tuple, Union

from src.core.validation import ConfigValidator
from src.models import BETA_MIN, AspectSpec, BlendBeta, EllipseAxes, RectifierKind


@dataclass
class ProjectionConfig:
    """Everything the backward-sampling render needs"""

    beta: Union[BlendBeta, float] = 0.5
    rectifier: RectifierKind = field(default_factory=RectifierKind)
    axes: EllipseAxes = field(default_factory=EllipseAxes)
    aspect: AspectSpec = field(default_factory=AspectSpec)
    # Latitude at the image rim; pi/2 means no ceiling crop
    ceiling_cap: float = math.pi / 2
    out_width: int = 512
    out_height: int = 512
    interpolation: str = "bilinear"
    background: Tuple[int, int, int, int] = (0, 0, 0, 0)

    @property
    def beta_value(self) -> float:
        return float(self.beta)

    def with_beta(self, beta: float) -> "ProjectionConfig":
        return ProjectionConfig(
            beta=BlendBeta(beta),
            rectifier=self.rectifier,
            axes=self.axes,
            aspect=self.aspect,
            ceiling_cap=self.ceiling_cap,
            out_width=self.out_width,
            out_height=self.out_height,
            interpolation=self.interpolation,
            background=self.background,
        )

    def validate(self) -> bool:
        """Validate projection configuration"""
        ConfigValidator().validate_projection(self).raise_if_invalid()
        return True


@dataclass
class OptimizerConfig:
    k_c: float = 2.0
    k_q: float = 1.0
    beta_min: float = BETA_MIN
    beta_max: float = 1.0
    tolerance: float = 0.005
    # Coarse scan points before golden-section refinement
    grid: int = 16
    resolution: int = 128
    step: float = 1e-5

    def validate(self) -> bool:
        """Validate optimizer configuration"""
        ConfigValidator().validate_optimizer(self).raise_if_invalid()
        return True


@dataclass
class RuntimeConfig:
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    # Rows per work band; fixed so results never depend on the thread count
    band_rows: int = 32
    show_progress: bool = False

    def validate(self) -> bool:
        """Validate runtime configuration"""
        ConfigValidator().validate_runtime(self).raise_if_invalid()
        return True
