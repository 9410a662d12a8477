"""Rotational aspect: move any sphere point to the projection centre (the south pole)."""
import math

import numpy as np

from src.core.errors import DomainError
from src.core.validation import as_output
from src.models import AspectSpec, GeoCoord, Rotation3

# Horizontal extent below which a vector counts as a pole
POLE_EPS = 1e-15


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def geo_to_vec(g: GeoCoord) -> np.ndarray:
    """Unit vectors of shape (..., 3)"""
    lon = np.asarray(g.lon, dtype=float)
    lat = np.asarray(g.lat, dtype=float)
    cos_lat = np.cos(lat)
    return np.stack([cos_lat * np.cos(lon), cos_lat * np.sin(lon), np.sin(lat)], axis=-1)


def vec_to_geo(v: np.ndarray) -> GeoCoord:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise DomainError(f"expected 3-vectors, got shape {v.shape}")
    norm = np.linalg.norm(v, axis=-1)
    if np.any(norm == 0.0) or not np.all(np.isfinite(norm)):
        raise DomainError("cannot convert a zero or non-finite vector to a geo coordinate")
    unit = v / norm[..., None]
    x, y, z = unit[..., 0], unit[..., 1], unit[..., 2]
    horizontal = np.hypot(x, y)
    lon = np.where(horizontal <= POLE_EPS, 0.0, np.arctan2(y, x))
    lat = np.arctan2(z, horizontal)
    return GeoCoord(lon=as_output(lon), lat=as_output(lat))


def rotation_from_spec(spec: AspectSpec) -> Rotation3:
    """R = Rz(roll) Ry(center_lat + pi/2) Rz(-center_lon)"""
    matrix = _rot_z(spec.roll) @ _rot_y(spec.center_lat + math.pi / 2) @ _rot_z(-spec.center_lon)
    return Rotation3(matrix)


def apply_aspect(g: GeoCoord, rotation: Rotation3) -> GeoCoord:
    rotated = np.einsum("ij,...j->...i", rotation.matrix, geo_to_vec(g))
    return vec_to_geo(rotated)
