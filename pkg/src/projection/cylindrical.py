"""Cylindrical kernels: Mercator, Lambert equal-area, the blended family and
the generalized equal-area family with a standard latitude.

All projections share x = k * lon; only y = f(lat) and the scale k differ.
"""
import math
from typing import Dict, Tuple, Union

import numpy as np

from src.core.errors import ConfigError, DomainError
from src.core.validation import TOL, Real, as_output, check_scalar, clamp_to_interval
from src.models import CylPoint, GeoCoord, StdLatitude

LatitudeLike = Union[StdLatitude, float]

# Standard latitudes (degrees) of the named equal-area projections
PRESETS: Dict[str, float] = {
    "lambert": 0.0,
    "behrmann": 30.0,
    "gall-peters": 45.0,
    "tobler": 55.65,
}


def preset_latitude(name: str) -> StdLatitude:
    try:
        degrees = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r} (choose from {', '.join(PRESETS)})")
    return StdLatitude(math.radians(degrees))


def _std_lat(phi0: LatitudeLike) -> StdLatitude:
    return phi0 if isinstance(phi0, StdLatitude) else StdLatitude(float(phi0))


def _cyl_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise DomainError(
            f"blended cylindrical needs beta in (0, 1], got {beta}; use the Mercator kernel for beta = 0"
        )
    return check_scalar(beta, 0.0, 1.0, "beta")


def mercator_fwd(phi: Real) -> Real:
    """Poles map to +/- infinity"""
    phi = clamp_to_interval(phi, -math.pi / 2, math.pi / 2, "lat")
    with np.errstate(divide="ignore"):
        y = np.arctanh(np.sin(phi))
    return as_output(y)


def mercator_inv(y: Real) -> Real:
    y = np.asarray(y, dtype=float)
    if np.any(np.isnan(y)):
        raise DomainError("Mercator y must not be NaN")
    return as_output(np.arctan(np.sinh(y)))


def lambert_cyl_fwd(phi: Real) -> Real:
    return as_output(np.sin(np.asarray(phi, dtype=float)))


def lambert_cyl_inv(y: Real) -> Real:
    y = clamp_to_interval(y, -1.0, 1.0, "y")
    return as_output(np.arcsin(y))


def blended_cyl_fwd(phi: Real, beta: float) -> Real:
    """Blend between Mercator (beta -> 0) and Lambert cylindrical (beta = 1)"""
    beta = _cyl_beta(beta)
    phi = clamp_to_interval(phi, -math.pi / 2, math.pi / 2, "lat")
    sign = np.where(phi < 0.0, -1.0, 1.0)
    s = np.sin(np.abs(phi))
    if beta == 1.0:
        return as_output(sign * s)

    one_minus = 1.0 - beta
    log_base = np.log(one_minus)
    q = (one_minus + s) / (1.0 - one_minus * s)
    # q^beta - (1-beta)^beta, evaluated in log space
    bracket = one_minus ** beta * np.expm1(beta * (np.log(q) - log_base))
    return as_output(sign * (1.0 + beta) / (2.0 * beta) * bracket)


def blended_cyl_y_max(beta: float) -> float:
    return float(blended_cyl_fwd(math.pi / 2, beta))


def blended_cyl_inv(y: Real, beta: float) -> Real:
    beta = _cyl_beta(beta)
    y = np.asarray(y, dtype=float)
    y_max = blended_cyl_y_max(beta)
    y = clamp_to_interval(y, -y_max, y_max, "y", tol=TOL * max(1.0, y_max))
    sign = np.where(y < 0.0, -1.0, 1.0)
    magnitude = np.abs(y)
    if beta == 1.0:
        return as_output(sign * np.arcsin(np.minimum(magnitude, 1.0)))

    one_minus = 1.0 - beta
    log_q = np.log(one_minus) + np.log1p(
        2.0 * beta * magnitude / ((1.0 + beta) * one_minus ** beta)
    ) / beta
    q = np.exp(log_q)
    s = (q - one_minus) / (q * one_minus + 1.0)
    s = np.where(magnitude == 0.0, 0.0, s)
    return as_output(sign * np.arcsin(np.clip(s, 0.0, 1.0)))


def generalized_cea_fwd(lam: Real, phi: Real, phi0: LatitudeLike) -> CylPoint:
    """Cylindrical equal-area with standard latitude phi0"""
    c = _std_lat(phi0).cos
    lam = np.asarray(lam, dtype=float)
    phi = clamp_to_interval(phi, -math.pi / 2, math.pi / 2, "lat")
    return CylPoint(x=as_output(lam * c), y=as_output(np.sin(phi) / c))


def generalized_cea_inv(point: CylPoint, phi0: LatitudeLike) -> GeoCoord:
    c = _std_lat(phi0).cos
    x = np.asarray(point.x, dtype=float)
    sin_lat = clamp_to_interval(np.asarray(point.y, dtype=float) * c, -1.0, 1.0, "y cos(phi0)")
    return GeoCoord(lon=as_output(x / c), lat=as_output(np.arcsin(sin_lat)))


def blended_generalized_fwd(lam: Real, phi: Real, beta: float, phi0: LatitudeLike) -> CylPoint:
    scale = _std_lat(phi0).cos ** _cyl_beta(beta)
    lam = np.asarray(lam, dtype=float)
    y = np.asarray(blended_cyl_fwd(phi, beta))
    return CylPoint(x=as_output(lam * scale), y=as_output(y / scale))


def blended_generalized_inv(point: CylPoint, beta: float, phi0: LatitudeLike) -> GeoCoord:
    scale = _std_lat(phi0).cos ** _cyl_beta(beta)
    x = np.asarray(point.x, dtype=float)
    lat = blended_cyl_inv(np.asarray(point.y, dtype=float) * scale, beta)
    return GeoCoord(lon=as_output(x / scale), lat=lat)


def blended_generalized_extent(beta: float, phi0: LatitudeLike) -> Tuple[float, float]:
    """Half-width and half-height of the blended generalized map"""
    scale = _std_lat(phi0).cos ** _cyl_beta(beta)
    return math.pi * scale, blended_cyl_y_max(beta) / scale
