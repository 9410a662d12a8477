import logging
import math

import numpy as np
import pytest
from PIL import Image

from src.models import EquirectImage


def _lon_lat_grid(width: int, height: int):
    lon = -math.pi + 2.0 * math.pi * (np.arange(width) + 0.5) / width
    lat = math.pi / 2 - math.pi * (np.arange(height) + 0.5) / height
    return np.meshgrid(lon, lat, indexing="xy")


def make_constant_panorama(width: int = 64, height: int = 32, value: float = 128.0) -> EquirectImage:
    return EquirectImage(np.full((height, width, 3), value))


def make_smooth_panorama(width: int = 128, height: int = 64) -> EquirectImage:
    """Low-frequency colour field, periodic in longitude"""
    lon, lat = _lon_lat_grid(width, height)
    red = 127.5 + 100.0 * np.sin(2.0 * lon) * np.cos(lat)
    green = 127.5 + 100.0 * np.sin(lat)
    blue = 127.5 + 80.0 * np.cos(3.0 * lon + 1.0) * np.cos(lat) ** 2
    return EquirectImage(np.round(np.stack([red, green, blue], axis=-1)))


def make_grid_panorama(width: int = 128, height: int = 64, spacing_deg: float = 15.0) -> EquirectImage:
    """White graticule lines every spacing_deg on black"""
    lon, lat = _lon_lat_grid(width, height)
    step = math.radians(spacing_deg)
    col_width = 2.0 * math.pi / width
    row_height = math.pi / height
    on_meridian = np.abs(np.remainder(lon + step / 2, step) - step / 2) < col_width / 2
    on_parallel = np.abs(np.remainder(lat + step / 2, step) - step / 2) < row_height / 2
    value = np.where(on_meridian | on_parallel, 255.0, 0.0)
    return EquirectImage(np.repeat(value[:, :, None], 3, axis=2))


def make_coded_panorama(width: int = 1024, height: int = 512) -> EquirectImage:
    """Red/green encode cos/sin of longitude, blue encodes latitude"""
    lon, lat = _lon_lat_grid(width, height)
    red = 127.5 + 127.5 * np.cos(lon)
    green = 127.5 + 127.5 * np.sin(lon)
    blue = 255.0 * (lat + math.pi / 2) / math.pi
    return EquirectImage(np.stack([red, green, blue], axis=-1))


def make_ramp_panorama(width: int = 64, height: int = 32) -> EquirectImage:
    """Gray level equal to the row index: unit saliency everywhere"""
    rows = np.arange(height, dtype=float)[:, None]
    return EquirectImage(np.repeat(np.repeat(rows, width, axis=1)[:, :, None], 3, axis=2))


def psnr(first: np.ndarray, second: np.ndarray) -> float:
    mse = np.mean((np.asarray(first, dtype=float) - np.asarray(second, dtype=float)) ** 2)
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def save_png(path, image: EquirectImage) -> str:
    pixels = np.clip(np.rint(image.pixels), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(str(path), format="PNG")
    return str(path)


@pytest.fixture(autouse=True)
def detach_cli_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_panorama_handler", False):
            root.removeHandler(handler)
    root.setLevel(logging.WARNING)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def constant_panorama():
    return make_constant_panorama()


@pytest.fixture
def smooth_panorama():
    return make_smooth_panorama()


@pytest.fixture
def grid_panorama():
    return make_grid_panorama()


@pytest.fixture
def ramp_panorama():
    return make_ramp_panorama()


@pytest.fixture
def nadir_panorama():
    """Blue sphere with a red cap below -80 degrees latitude"""
    width, height = 128, 64
    lon, lat = _lon_lat_grid(width, height)
    pixels = np.zeros((height, width, 3))
    pixels[..., 2] = 255.0
    cap = lat < math.radians(-80.0)
    pixels[cap] = [255.0, 0.0, 0.0]
    return EquirectImage(pixels)


def random_disc_points(rng, count: int, radius: float = 1.0):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    theta = rng.uniform(-math.pi, math.pi, count)
    return r * np.sin(theta), r * np.cos(theta)
