import csv
import os
import tempfile
from typing import Callable, Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.core.errors import ImageIOError
from src.core.logging import ContextLogger
from src.models import DistortionField, EquirectImage, OutputImage

logger = ContextLogger(__name__)

_FORMATS = {".png": "PNG", ".jpg": "JPEG", ".jpeg": "JPEG"}


def _format_for(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    try:
        return _FORMATS[ext]
    except KeyError:
        raise ImageIOError(f"unsupported image format {ext or '(none)'!r} for {path}", path=path)


def read_image(path: str) -> EquirectImage:
    """Load a panorama as float RGB; alpha and palettes are dropped"""
    try:
        with Image.open(path) as img:
            img.load()
            rgb = img.convert("RGB")
    except FileNotFoundError:
        raise ImageIOError(f"input image not found: {path}", path=path)
    except (UnidentifiedImageError, OSError, ValueError, SyntaxError) as e:
        raise ImageIOError(f"cannot read image {path}: {e}", path=path)

    if rgb.width == 0 or rgb.height == 0:
        raise ImageIOError(f"image {path} has a zero dimension", path=path)

    image = EquirectImage(np.asarray(rgb, dtype=float))
    if not image.has_standard_aspect:
        logger.warning(
            "Panorama is not 2:1 equirectangular",
            path=path,
            width=image.width,
            height=image.height
        )
    logger.debug("Image loaded", path=path, width=image.width, height=image.height)
    return image


def _atomic_write(path: str, writer: Callable[[str], None]) -> None:
    """Write through a temporary sibling file, then rename over the target"""
    directory = os.path.dirname(os.path.abspath(path))
    suffix = os.path.splitext(path)[1]
    try:
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=suffix)
    except OSError as e:
        raise ImageIOError(f"cannot write {path}: {e}", path=path)
    os.close(fd)
    try:
        writer(tmp_path)
        os.chmod(tmp_path, 0o644)
        os.replace(tmp_path, path)
    except ImageIOError:
        _discard(tmp_path)
        raise
    except (OSError, ValueError) as e:
        _discard(tmp_path)
        raise ImageIOError(f"cannot write {path}: {e}", path=path)


def _discard(tmp_path: str) -> None:
    try:
        os.remove(tmp_path)
    except FileNotFoundError:
        pass


def write_image(path: str, image: OutputImage) -> None:
    fmt = _format_for(path)
    pil_image = Image.fromarray(np.ascontiguousarray(image.pixels))
    if fmt == "JPEG":
        pil_image = pil_image.convert("RGB")
    _atomic_write(path, lambda tmp: pil_image.save(tmp, format=fmt))
    logger.info("Image written", path=path, width=image.width, height=image.height)


def write_heatmap(path: str, values: np.ndarray, vmax: Optional[float] = None) -> None:
    """Grayscale PNG of a metric field scaled to [0, vmax]; NaN cells are black"""
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    if vmax is None:
        vmax = float(np.max(values[finite])) if finite.any() else 0.0
    scaled = np.zeros_like(values) if vmax <= 0 else np.where(finite, values, 0.0) / vmax
    gray = np.round(np.clip(scaled, 0.0, 1.0) * 255.0).astype(np.uint8)
    pil_image = Image.fromarray(gray)
    _atomic_write(path, lambda tmp: pil_image.save(tmp, format="PNG"))
    logger.info("Heatmap written", path=path, vmax=vmax)


def write_csv(path: str, field: DistortionField) -> None:
    """One row per metric grid point: row,col,e_c,e_q,e1"""
    def _write(tmp: str) -> None:
        with open(tmp, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["row", "col", "e_c", "e_q", "e1"])
            rows, cols = field.shape
            for j in range(rows):
                for i in range(cols):
                    writer.writerow([
                        j, i,
                        f"{field.e_c[j, i]:.9g}",
                        f"{field.e_q[j, i]:.9g}",
                        f"{field.e1[j, i]:.9g}",
                    ])

    _atomic_write(path, _write)
    logger.info("Metric CSV written", path=path, rows=field.mask.size)
