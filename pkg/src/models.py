import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.core.errors import ConfigError, DomainError
from src.core.validation import TOL, Real, as_output, clamp_to_interval

# Smallest admissible blend for the normalized projection
BETA_MIN = 1e-3


@dataclass(frozen=True, eq=False)
class GeoCoord:
    """Longitude/latitude on the sphere, radians (floats or equally-shaped arrays)"""
    lon: Real
    lat: Real

    def __post_init__(self):
        object.__setattr__(self, "lon", as_output(clamp_to_interval(self.lon, -math.pi, math.pi, "lon")))
        object.__setattr__(self, "lat", as_output(clamp_to_interval(self.lat, -math.pi / 2, math.pi / 2, "lat")))

    @classmethod
    def normalized(cls, lon: Real, lat: Real) -> "GeoCoord":
        """Wrap longitude into [-pi, pi] and clamp latitude into [-pi/2, pi/2]"""
        lon = np.asarray(lon, dtype=float)
        wrapped = np.mod(lon + math.pi, 2.0 * math.pi) - math.pi
        # keep +pi instead of folding it onto -pi
        wrapped = np.where((wrapped == -math.pi) & (lon > 0), math.pi, wrapped)
        lat = np.clip(np.asarray(lat, dtype=float), -math.pi / 2, math.pi / 2)
        return cls(lon=as_output(wrapped), lat=as_output(lat))

    def __str__(self) -> str:
        return f"GeoCoord(lon={self.lon}, lat={self.lat})"


@dataclass(frozen=True, eq=False)
class DiscPoint:
    """Planar point before rectification (u, v)"""
    u: Real
    v: Real

    @property
    def r(self) -> Real:
        return as_output(np.hypot(self.u, self.v))


@dataclass(frozen=True, eq=False)
class SquarePoint:
    """Planar point inside the square [-1, 1]^2"""
    x: Real
    y: Real

    def __post_init__(self):
        object.__setattr__(self, "x", as_output(clamp_to_interval(self.x, -1.0, 1.0, "x")))
        object.__setattr__(self, "y", as_output(clamp_to_interval(self.y, -1.0, 1.0, "y")))


@dataclass(frozen=True)
class BlendBeta:
    """Blend parameter of the normalized projection, in [BETA_MIN, 1]"""
    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value) or value < BETA_MIN - TOL or value > 1.0 + TOL:
            raise DomainError(f"beta={value} outside [{BETA_MIN}, 1]")
        object.__setattr__(self, "value", min(max(value, BETA_MIN), 1.0))

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class EllipseAxes:
    """Semi-major (horizontal) and semi-minor (vertical) axes"""
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= 0 or self.a < self.b:
            raise DomainError(f"ellipse axes must satisfy a >= b > 0, got a={self.a}, b={self.b}")

    @property
    def is_circle(self) -> bool:
        return self.a == self.b == 1.0


class RectifierName(str, Enum):
    SQUIRCLE = "squircle"
    ISOSQUARE = "isosquare"
    BLENDED_ISOSQUARE = "blended-isosquare"
    EQUIAREAL_SQUIRCLE = "equiareal-squircle"
    NONE = "none"


@dataclass(frozen=True)
class RectifierKind:
    """Disc rectifier choice; rho only applies to the blended isosquare"""
    name: RectifierName = RectifierName.SQUIRCLE
    rho: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "name", RectifierName(self.name))
        if not math.isfinite(self.rho) or self.rho < 0:
            raise ConfigError(f"rho must be a finite value >= 0, got {self.rho}")
        if self.rho and self.name is not RectifierName.BLENDED_ISOSQUARE:
            raise ConfigError(f"rho only applies to the blended-isosquare rectifier, not {self.name.value}")

    @classmethod
    def parse(cls, name: str, rho: Optional[float] = None) -> "RectifierKind":
        try:
            kind = RectifierName(name)
        except ValueError:
            choices = ", ".join(member.value for member in RectifierName)
            raise ConfigError(f"unknown rectifier {name!r} (choose from {choices})")
        if rho is not None and kind is not RectifierName.BLENDED_ISOSQUARE:
            raise ConfigError("--rho requires the blended-isosquare rectifier")
        return cls(name=kind, rho=0.0 if rho is None else float(rho))


@dataclass(frozen=True)
class AspectSpec:
    """Projection centre (lon, lat) and roll about it, radians"""
    center_lon: float = 0.0
    center_lat: float = -math.pi / 2
    roll: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.center_lon, self.center_lat, self.roll)):
            raise ConfigError("aspect angles must be finite")


@dataclass(frozen=True, eq=False)
class Rotation3:
    """Proper 3x3 rotation matrix"""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise DomainError(f"rotation must be 3x3, got shape {m.shape}")
        if not np.allclose(m.T @ m, np.eye(3), rtol=0.0, atol=1e-12) or abs(np.linalg.det(m) - 1.0) > 1e-12:
            raise DomainError("matrix is not a proper rotation (R^T R = I, det R = 1)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "Rotation3":
        return cls(np.eye(3))

    @property
    def T(self) -> "Rotation3":
        return Rotation3(self.matrix.T.copy())


@dataclass(frozen=True, eq=False)
class FundamentalForm:
    """First fundamental form entries (E, F, G)"""
    E: Real
    F: Real
    G: Real


@dataclass(frozen=True, eq=False)
class SigmaPair:
    """Ordered spectrum of the fundamental form, sigma1 >= sigma2 >= 0"""
    sigma1: Real
    sigma2: Real


@dataclass(eq=False)
class DistortionField:
    """Per-grid-point distortion metrics; entries outside `mask` are NaN"""
    x: np.ndarray
    y: np.ndarray
    mask: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    e_c: np.ndarray
    e_q: np.ndarray
    e1: np.ndarray

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.mask.shape

    def mean(self, name: str) -> float:
        return float(np.mean(getattr(self, name)[self.mask]))


@dataclass(eq=False)
class EquirectImage:
    """Equirectangular panorama, float pixels of shape (H, W, 3)"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=float)
        if pixels.ndim == 2:
            pixels = np.repeat(pixels[:, :, None], 3, axis=2)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DomainError(f"panorama pixels must have shape (H, W, 3), got {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DomainError(f"panorama must be at least 1x1, got {pixels.shape[1]}x{pixels.shape[0]}")
        self.pixels = pixels

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def has_standard_aspect(self) -> bool:
        return self.width >= 2 and abs(self.width - 2 * self.height) <= 1

    def pixel_center(self, i: Real, j: Real) -> GeoCoord:
        """Geo coordinate of pixel (column i, row j)"""
        lon = -math.pi + 2.0 * math.pi * (np.asarray(i, dtype=float) + 0.5) / self.width
        lat = math.pi / 2 - math.pi * (np.asarray(j, dtype=float) + 0.5) / self.height
        return GeoCoord(lon=as_output(lon), lat=as_output(lat))


@dataclass(eq=False)
class OutputImage:
    """Rendered RGBA image, uint8 pixels of shape (H, W, 4)"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 4:
            raise DomainError(f"output pixels must have shape (H, W, 4), got {pixels.shape}")
        self.pixels = pixels.astype(np.uint8, copy=False)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return self.pixels[:, :, 3]


@dataclass(frozen=True, eq=False)
class CylPoint:
    """Cylindrical map coordinates: x from longitude, y from latitude"""
    x: Real
    y: Real


@dataclass(frozen=True)
class StdLatitude:
    """Standard latitude of a cylindrical equal-area projection, radians in [0, pi/2)"""
    phi0: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.phi0) or not 0.0 <= self.phi0 < math.pi / 2:
            raise DomainError(f"standard latitude must lie in [0, 90) degrees, got {math.degrees(self.phi0):.6g}")

    @property
    def cos(self) -> float:
        return math.cos(self.phi0)
