"""Backward-sampling renderers.

Every output pixel is mapped back to a sphere point and the panorama is
sampled there; rows are rendered in fixed-size bands on a thread pool.
"""
import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.config import ProjectionConfig, RuntimeConfig
from src.core.logging import ContextLogger
from src.core.validation import Real
from src.models import (
    CylPoint,
    DiscPoint,
    EquirectImage,
    GeoCoord,
    OutputImage,
    RectifierName,
    StdLatitude,
)
from src.monitoring.metrics import MetricsCollector
from src.processing.batch import BatchProcessor
from src.processing.integrity import CoverageChecker
from src.processing.progress import ProgressTracker
from src.projection.aspect import apply_aspect, rotation_from_spec
from src.projection.azimuthal import elliptical_disc_to_geo, rim_radius
from src.projection.cylindrical import (
    blended_generalized_extent,
    blended_generalized_inv,
    mercator_fwd,
    mercator_inv,
)
from src.projection.rectifier import rect_to_ellipse

# Receives the output rows and pixel columns of one band, returns (RGB, alpha) arrays
BandFunc = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def pixel_to_plane(i: Real, j: Real, config: ProjectionConfig) -> Tuple[Real, Real]:
    """Pixel centre (column i, row j) to plane coordinates, y pointing up"""
    a, b = config.axes.a, config.axes.b
    x = a * (-1.0 + 2.0 * (np.asarray(i, dtype=float) + 0.5) / config.out_width)
    y = b * (1.0 - 2.0 * (np.asarray(j, dtype=float) + 0.5) / config.out_height)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(x), float(y)
    return x, y


def source_position(img: EquirectImage, g: GeoCoord) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous (column, row) of a geo coordinate; integers are pixel centres"""
    lon = np.asarray(g.lon, dtype=float)
    lat = np.asarray(g.lat, dtype=float)
    col = (lon + math.pi) / (2.0 * math.pi) * img.width - 0.5
    row = (math.pi / 2 - lat) / math.pi * img.height - 0.5
    return col, row


def sample_equirect(img: EquirectImage, g: GeoCoord, interp: str = "bilinear") -> np.ndarray:
    """RGB at g; columns wrap around in longitude, rows clamp at the poles"""
    col, row = source_position(img, g)
    pixels = img.pixels
    width, height = img.width, img.height

    if interp == "nearest":
        c = np.mod(np.floor(col + 0.5).astype(np.int64), width)
        r = np.clip(np.floor(row + 0.5).astype(np.int64), 0, height - 1)
        return pixels[r, c]

    c0 = np.floor(col)
    r0 = np.floor(row)
    fx = (col - c0)[..., None]
    fy = (row - r0)[..., None]
    c0 = c0.astype(np.int64)
    r0 = r0.astype(np.int64)
    c1 = np.mod(c0 + 1, width)
    c0 = np.mod(c0, width)
    r1 = np.clip(r0 + 1, 0, height - 1)
    r0 = np.clip(r0, 0, height - 1)

    top = (1.0 - fx) * pixels[r0, c0] + fx * pixels[r0, c1]
    bottom = (1.0 - fx) * pixels[r1, c0] + fx * pixels[r1, c1]
    return (1.0 - fy) * top + fy * bottom


def _render_rows(
    height: int,
    width: int,
    band_func: BandFunc,
    background: Tuple[int, int, int, int],
    runtime: RuntimeConfig,
    desc: str,
    logger: ContextLogger,
    metrics: Optional[MetricsCollector]
) -> OutputImage:
    runtime.validate()
    columns = np.arange(width)
    fill = np.asarray(background, dtype=np.uint8)

    def process(rows: List[int]) -> List[np.ndarray]:
        if metrics is not None:
            metrics.record_band_start()
        rgb, inside = band_func(np.asarray(rows), columns)
        band = np.empty((len(rows), width, 4), dtype=np.uint8)
        band[:] = fill
        band[..., :3] = np.where(inside[..., None], np.clip(np.rint(rgb), 0, 255), fill[:3])
        band[..., 3] = np.where(inside, 255, fill[3])
        return list(band)

    processor: BatchProcessor[int, np.ndarray] = BatchProcessor(
        batch_size=runtime.band_rows,
        workers=runtime.threads,
        logger=logger
    )
    if metrics is not None:
        metrics.record_render_start(width, height)

    with ProgressTracker(height, desc, enabled=runtime.show_progress) as progress:
        def on_complete(result) -> None:
            progress.update("success" if result.success else "failed", len(result.input_items))
            if metrics is not None:
                metrics.record_band_complete(len(result.input_items) * width, result.success)

        results = processor.process_batch(list(range(height)), process, on_complete)
    logger.debug("Rows finished", **progress.metrics.to_dict())

    error = BatchProcessor.first_error(results)
    if error is not None:
        raise error
    if metrics is not None:
        metrics.record_render_complete()

    rows = [row for result in results for row in result.output_items]
    return OutputImage(np.stack(rows, axis=0))


def project(
    img: EquirectImage,
    config: ProjectionConfig,
    runtime: Optional[RuntimeConfig] = None,
    logger: Optional[ContextLogger] = None,
    metrics: Optional[MetricsCollector] = None
) -> OutputImage:
    """Render a revolvable overhead view of an equirectangular panorama"""
    config.validate()
    runtime = runtime or RuntimeConfig()
    logger = logger or ContextLogger(__name__)

    beta = config.beta_value
    axes = config.axes
    inverse = rotation_from_spec(config.aspect).T
    r_cap = rim_radius(config.ceiling_cap, beta)
    unrectified = config.rectifier.name is RectifierName.NONE

    def band(rows: np.ndarray, columns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        jj, ii = np.meshgrid(rows, columns, indexing="ij")
        x, y = pixel_to_plane(ii, jj, config)
        if unrectified:
            inside = (x / axes.a) ** 2 + (y / axes.b) ** 2 <= 1.0
            x, y = np.where(inside, x, 0.0), np.where(inside, y, 0.0)
        else:
            inside = np.ones(x.shape, dtype=bool)
        disc = rect_to_ellipse(x, y, axes, config.rectifier)
        u, v = np.asarray(disc.u), np.asarray(disc.v)
        canonical = elliptical_disc_to_geo(DiscPoint(u * r_cap, v * r_cap), beta, axes)
        source = apply_aspect(canonical, inverse)
        return sample_equirect(img, source, config.interpolation), inside

    started = time.perf_counter()
    output = _render_rows(
        config.out_height, config.out_width, band, config.background,
        runtime, "Rendering", logger, metrics
    )
    CoverageChecker(logger).verify_coverage(output, expect_full=not unrectified)
    logger.info(
        "Render completed",
        beta=beta,
        rectifier=config.rectifier.name.value,
        width=output.width,
        height=output.height,
        seconds=round(time.perf_counter() - started, 3)
    )
    return output


def _project_rectangle(
    img: EquirectImage,
    half_width: float,
    half_height: float,
    inverse: Callable[[CylPoint], GeoCoord],
    out_width: int,
    out_height: int,
    interpolation: str,
    runtime: Optional[RuntimeConfig],
    logger: ContextLogger,
    metrics: Optional[MetricsCollector]
) -> OutputImage:
    runtime = runtime or RuntimeConfig()

    def band(rows: np.ndarray, columns: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        jj, ii = np.meshgrid(rows, columns, indexing="ij")
        x = half_width * (-1.0 + 2.0 * (ii + 0.5) / out_width)
        y = half_height * (1.0 - 2.0 * (jj + 0.5) / out_height)
        geo = inverse(CylPoint(x, y))
        return sample_equirect(img, geo, interpolation), np.ones(x.shape, dtype=bool)

    output = _render_rows(
        out_height, out_width, band, (0, 0, 0, 0), runtime, "Rendering cylindrical", logger, metrics
    )
    CoverageChecker(logger).verify_coverage(output, expect_full=True)
    return output


def project_cylindrical(
    img: EquirectImage,
    beta: float,
    phi0: StdLatitude,
    out_width: int,
    out_height: int,
    interpolation: str = "bilinear",
    runtime: Optional[RuntimeConfig] = None,
    logger: Optional[ContextLogger] = None,
    metrics: Optional[MetricsCollector] = None
) -> OutputImage:
    """Render through the blended generalized cylindrical projection"""
    logger = logger or ContextLogger(__name__)
    half_width, half_height = blended_generalized_extent(beta, phi0)
    output = _project_rectangle(
        img, half_width, half_height,
        lambda p: blended_generalized_inv(p, beta, phi0),
        out_width, out_height, interpolation, runtime, logger, metrics
    )
    logger.info(
        "Cylindrical render completed",
        beta=beta,
        phi0_deg=math.degrees(phi0.phi0),
        width=out_width,
        height=out_height
    )
    return output


def project_mercator(
    img: EquirectImage,
    max_lat: float,
    out_width: int,
    out_height: int,
    interpolation: str = "bilinear",
    runtime: Optional[RuntimeConfig] = None,
    logger: Optional[ContextLogger] = None,
    metrics: Optional[MetricsCollector] = None
) -> OutputImage:
    """Render the Mercator endpoint, cropped to |lat| <= max_lat"""
    logger = logger or ContextLogger(__name__)
    half_height = float(mercator_fwd(max_lat))
    output = _project_rectangle(
        img, math.pi, half_height,
        lambda p: GeoCoord(lon=p.x, lat=mercator_inv(p.y)),
        out_width, out_height, interpolation, runtime, logger, metrics
    )
    logger.info(
        "Mercator render completed",
        max_lat_deg=math.degrees(max_lat),
        width=out_width,
        height=out_height
    )
    return output
