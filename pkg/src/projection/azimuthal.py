"""Polar azimuthal kernels: stereographic, Lambert, blended and normalized blended.

Every kernel works in the south polar aspect: the disc centre is the nadir
(lat = -pi/2) and longitude follows lon = atan2(u, v), so u = r sin(lon) and
v = r cos(lon). Inputs may be floats or numpy arrays.
"""
import math
from typing import Union

import numpy as np

from src.core.errors import DomainError
from src.core.validation import TOL, Real, as_output, check_scalar, clamp_to_interval
from src.models import BETA_MIN, BlendBeta, DiscPoint, EllipseAxes, GeoCoord

BetaLike = Union[BlendBeta, float]

# Radii this close to the rim evaluate the analytic zenith limit
RIM_SNAP = 1e-12


def beta_value(beta: BetaLike, allow_zero: bool = False) -> float:
    """Validate a blend parameter and return it as a float"""
    lo = 0.0 if allow_zero else BETA_MIN
    return check_scalar(float(beta), lo, 1.0, "beta")


def lat_from_r_stereographic(r: Real) -> Real:
    r = np.asarray(r, dtype=float)
    if r.size and (not np.all(np.isfinite(r)) or np.min(r) < -TOL):
        raise DomainError("stereographic radius must be finite and >= 0")
    r = np.maximum(r, 0.0)
    return as_output(2.0 * np.arctan(r) - math.pi / 2)


def lat_from_r_lambert(r: Real) -> Real:
    r = clamp_to_interval(r, 0.0, 1.0, "r")
    return as_output(2.0 * np.arcsin(r) - math.pi / 2)


def lat_from_r_blended(r: Real, beta: BetaLike) -> Real:
    """Unnormalized blend on the disc of radius 1/beta; beta = 0 is stereographic"""
    b = beta_value(beta, allow_zero=True)
    if b == 0.0:
        return lat_from_r_stereographic(r)
    r = clamp_to_interval(r, 0.0, 1.0 / b, "r")
    root = np.sqrt(np.maximum(1.0 - (b * r) ** 2, 0.0))
    lat = 2.0 * np.arctan2(r, root) - math.pi / 2
    lat = np.where(r >= 1.0 / b - RIM_SNAP, math.pi / 2, lat)
    return as_output(lat)


def lat_from_r_normalized(r: Real, beta: BetaLike) -> Real:
    """Normalized blend mapping the whole sphere onto the unit disc"""
    b = beta_value(beta)
    r = clamp_to_interval(r, 0.0, 1.0, "r")
    root = np.sqrt(np.maximum(1.0 - r * r, 0.0))
    lat = 2.0 * np.arctan2(r, b * root) - math.pi / 2
    # zenith limit at the rim instead of dividing by sqrt(1 - r^2) = 0
    lat = np.where(r >= 1.0 - RIM_SNAP, math.pi / 2, lat)
    return as_output(lat)


def r_from_lat_normalized(lat: Real, beta: BetaLike) -> Real:
    b = beta_value(beta)
    lat = clamp_to_interval(lat, -math.pi / 2, math.pi / 2, "lat")
    half = lat / 2.0 + math.pi / 4
    s, c = np.sin(half), np.cos(half)
    r = b * s / np.sqrt(c * c + (b * s) ** 2)
    return as_output(np.clip(r, 0.0, 1.0))


def rim_radius(ceiling_cap: float, beta: BetaLike) -> float:
    """Disc radius shown at the image rim when latitudes above ceiling_cap are cropped"""
    if ceiling_cap >= math.pi / 2:
        return 1.0
    return float(r_from_lat_normalized(ceiling_cap, beta))


def r_from_lat_blended(lat: Real, beta: BetaLike) -> Real:
    b = beta_value(beta, allow_zero=True)
    lat = clamp_to_interval(lat, -math.pi / 2, math.pi / 2, "lat")
    half = lat / 2.0 + math.pi / 4
    s, c = np.sin(half), np.cos(half)
    with np.errstate(divide="ignore"):
        r = s / np.sqrt(c * c + (b * s) ** 2)
    if b == 0.0:
        # stereographic zenith is at infinity
        r = np.where(lat >= math.pi / 2, np.inf, r)
    else:
        r = np.minimum(r, 1.0 / b)
    return as_output(np.maximum(r, 0.0))


def _longitude(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    lon = np.arctan2(u, v)
    return np.where((u == 0.0) & (v == 0.0), 0.0, lon)


def disc_to_geo(p: DiscPoint, beta: BetaLike) -> GeoCoord:
    u = np.asarray(p.u, dtype=float)
    v = np.asarray(p.v, dtype=float)
    r = clamp_to_interval(np.hypot(u, v), 0.0, 1.0, "disc radius")
    return GeoCoord(lon=as_output(_longitude(u, v)), lat=lat_from_r_normalized(r, beta))


def geo_to_disc(g: GeoCoord, beta: BetaLike) -> DiscPoint:
    r = np.asarray(r_from_lat_normalized(g.lat, beta))
    lon = np.asarray(g.lon, dtype=float)
    return DiscPoint(u=as_output(r * np.sin(lon)), v=as_output(r * np.cos(lon)))


def elliptical_disc_to_geo(p: DiscPoint, beta: BetaLike, axes: EllipseAxes) -> GeoCoord:
    """Normalized blend on the ellipse u^2/a^2 + v^2/b^2 <= 1"""
    u = np.asarray(p.u, dtype=float)
    v = np.asarray(p.v, dtype=float)
    a, b = axes.a, axes.b
    r = clamp_to_interval(np.hypot(u / a, v / b), 0.0, 1.0, "elliptical radius")
    lon = _longitude(a * u, b * v)
    return GeoCoord(lon=as_output(lon), lat=lat_from_r_normalized(r, beta))


def geo_to_elliptical_disc(g: GeoCoord, beta: BetaLike, axes: EllipseAxes) -> DiscPoint:
    a, b = axes.a, axes.b
    r = np.asarray(r_from_lat_normalized(g.lat, beta))
    lon = np.asarray(g.lon, dtype=float)
    sin_l, cos_l = np.sin(lon), np.cos(lon)
    k = r / np.sqrt((b * sin_l / a) ** 2 + (a * cos_l / b) ** 2)
    return DiscPoint(u=as_output(k * b * sin_l), v=as_output(k * a * cos_l))
