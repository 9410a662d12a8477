"""Local distortion of the output plane -> sphere map and its saliency-weighted total.

The sphere has radius 1/2, so its area equals the unit disc's. The first
fundamental form is taken by central differences; its eigenvalues sigma1 >=
sigma2 drive the conformal error e_c and the equiareal error e_q.
"""
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.config import OptimizerConfig, ProjectionConfig, RuntimeConfig
from src.core.errors import DomainError
from src.core.logging import ContextLogger
from src.core.validation import Real, as_output
from src.models import (
    DiscPoint,
    DistortionField,
    EllipseAxes,
    EquirectImage,
    FundamentalForm,
    GeoCoord,
    RectifierName,
    SigmaPair,
)
from src.processing.batch import BatchProcessor
from src.processing.render import source_position
from src.projection.aspect import apply_aspect, rotation_from_spec
from src.projection.azimuthal import (
    beta_value,
    elliptical_disc_to_geo,
    lat_from_r_blended,
    lat_from_r_normalized,
    rim_radius,
)
from src.projection.rectifier import rect_to_ellipse

SPHERE_RADIUS = 0.5

Surface = Tuple[np.ndarray, np.ndarray, np.ndarray]
SurfaceFunc = Callable[[np.ndarray, np.ndarray, float], Surface]

logger = ContextLogger(__name__)


def _embed(lon: np.ndarray, lat: np.ndarray) -> Surface:
    cos_lat = np.cos(lat)
    return (
        SPHERE_RADIUS * cos_lat * np.cos(lon),
        SPHERE_RADIUS * cos_lat * np.sin(lon),
        SPHERE_RADIUS * np.sin(lat),
    )


def surface_fn(x: Real, y: Real, beta: float) -> Surface:
    """Closed-form sphere point of square point (x, y): squircle rectifier,
    normalized blend, south polar aspect"""
    b = beta_value(beta)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s2 = np.maximum(x * x + y * y - x * x * y * y, 0.0)
    s = np.sqrt(s2)
    rho = np.hypot(x, y)
    # s / rho tends to 1 at the origin
    ratio = np.where(rho > 1e-300, s / np.where(rho > 1e-300, rho, 1.0), 1.0)
    p = np.maximum((1.0 - x * x) * (1.0 - y * y), 0.0)
    denom = s2 + b * b * p
    common = b * ratio * np.sqrt(p) / denom
    f1 = y * common
    f2 = x * common
    f3 = SPHERE_RADIUS * (s2 - b * b * p) / denom
    return as_output(f1), as_output(f2), as_output(f3)


def surface_fn_disc(u: Real, v: Real, beta: float, normalized: bool = True) -> Surface:
    """Sphere point of disc point (u, v), skipping the rectifier.

    normalized=False uses the unnormalized blend on the disc of radius 1/beta,
    where beta = 0 is the stereographic projection.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r = np.hypot(u, v)
    lat = np.asarray(lat_from_r_normalized(r, beta) if normalized else lat_from_r_blended(r, beta))
    lon = np.where(r == 0.0, 0.0, np.arctan2(u, v))
    f1, f2, f3 = _embed(lon, lat)
    return as_output(f1), as_output(f2), as_output(f3)


def fundamental_form(
    f: SurfaceFunc,
    x: Real,
    y: Real,
    beta: float,
    h: float = 1e-5,
    extent: Tuple[float, float] = (1.0, 1.0)
) -> FundamentalForm:
    """E, F, G of surface function f by central differences of step h"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, b = extent
    slack = 1e-12
    if x.size and (np.max(np.abs(x)) > a - 2 * h + slack or np.max(np.abs(y)) > b - 2 * h + slack):
        raise DomainError(f"fundamental form needs points at least 2h={2 * h:g} inside the boundary")

    fx = [(p - m) / (2.0 * h) for p, m in zip(f(x + h, y, beta), f(x - h, y, beta))]
    fy = [(p - m) / (2.0 * h) for p, m in zip(f(x, y + h, beta), f(x, y - h, beta))]

    E = sum(d * d for d in fx)
    F = sum(dx * dy for dx, dy in zip(fx, fy))
    G = sum(d * d for d in fy)
    return FundamentalForm(E=as_output(E), F=as_output(F), G=as_output(G))


def singular_values(ff: FundamentalForm) -> SigmaPair:
    """Eigenvalues of the symmetric form [[E, F], [F, G]], largest first"""
    E = np.asarray(ff.E, dtype=float)
    F = np.asarray(ff.F, dtype=float)
    G = np.asarray(ff.G, dtype=float)
    mean = (E + G) / 2.0
    spread = np.sqrt((E - G) ** 2 + 4.0 * F * F) / 2.0
    sigma1 = np.maximum(mean + spread, 0.0)
    sigma2 = np.clip(mean - spread, 0.0, sigma1)
    return SigmaPair(sigma1=as_output(sigma1), sigma2=as_output(sigma2))


def errors_from_sigma(sigma: SigmaPair) -> Tuple[Real, Real]:
    """(e_c, e_q), both in [0, 1]"""
    s1 = np.asarray(sigma.sigma1, dtype=float)
    s2 = np.asarray(sigma.sigma2, dtype=float)
    positive = s1 > 0.0
    safe_s1 = np.where(positive, s1, 1.0)
    ratio = np.where(positive, np.minimum(s2 / safe_s1, 1.0), 0.0)

    product = s1 * s2
    nonzero = product > 0.0
    with np.errstate(over="ignore"):
        inverse = 1.0 / np.where(nonzero, product, 1.0)
    sigma_product = np.where(nonzero, np.minimum(product, inverse), 0.0)
    return as_output(1.0 - ratio), as_output(1.0 - sigma_product)


def saliency_e1(img: EquirectImage) -> np.ndarray:
    """Gradient-magnitude energy |d/dx| + |d/dy| of the gray image.

    Columns wrap in longitude; rows use central differences inside and
    one-sided differences on the top and bottom rows.
    """
    gray = img.pixels.mean(axis=2)
    dx = (np.roll(gray, -1, axis=1) - np.roll(gray, 1, axis=1)) / 2.0
    if gray.shape[0] > 1:
        dy = np.gradient(gray, axis=0)
    else:
        dy = np.zeros_like(gray)
    return np.abs(dx) + np.abs(dy)


def metric_grid(resolution: int, axes: EllipseAxes, step: float) -> Tuple[np.ndarray, np.ndarray]:
    """Pixel centres of a resolution x resolution grid, kept 2*step inside the rectangle"""
    k = (np.arange(resolution) + 0.5) / resolution
    xs = np.clip(axes.a * (-1.0 + 2.0 * k), -axes.a + 2 * step, axes.a - 2 * step)
    ys = np.clip(axes.b * (1.0 - 2.0 * k), -axes.b + 2 * step, axes.b - 2 * step)
    return np.meshgrid(xs, ys, indexing="xy")


def _canonical_geo(x: np.ndarray, y: np.ndarray, beta: float, projection: ProjectionConfig, r_cap: float) -> GeoCoord:
    disc = rect_to_ellipse(x, y, projection.axes, projection.rectifier)
    u, v = np.asarray(disc.u), np.asarray(disc.v)
    return elliptical_disc_to_geo(DiscPoint(u * r_cap, v * r_cap), beta, projection.axes)


def projection_surface(projection: ProjectionConfig) -> SurfaceFunc:
    """Surface function of the full plane -> sphere chain of a projection"""
    closed_form = (
        projection.rectifier.name is RectifierName.SQUIRCLE
        and projection.axes.is_circle
        and projection.ceiling_cap >= math.pi / 2
    )
    if closed_form:
        return surface_fn

    def composed(x: np.ndarray, y: np.ndarray, beta: float) -> Surface:
        geo = _canonical_geo(x, y, beta, projection, rim_radius(projection.ceiling_cap, beta))
        return _embed(np.asarray(geo.lon), np.asarray(geo.lat))

    return composed


def distortion_field(
    beta: float,
    projection: ProjectionConfig,
    resolution: int = 128,
    step: float = 1e-5,
    img: Optional[EquirectImage] = None,
    saliency: Optional[np.ndarray] = None,
    runtime: Optional[RuntimeConfig] = None
) -> DistortionField:
    """Per-point sigma, e_c, e_q and e1 on the metric grid; e1 is zero without an image"""
    beta = beta_value(beta)
    runtime = runtime or RuntimeConfig()
    axes = projection.axes
    x, y = metric_grid(resolution, axes, step)

    if projection.rectifier.name is RectifierName.NONE:
        # one grid cell inside the ellipse
        mask = np.hypot(x / axes.a, y / axes.b) <= 1.0 - 2.0 / resolution
    else:
        mask = np.ones(x.shape, dtype=bool)

    surface = projection_surface(projection)
    if img is not None and saliency is None:
        saliency = saliency_e1(img)
    inverse = rotation_from_spec(projection.aspect).T
    r_cap = rim_radius(projection.ceiling_cap, beta)

    def process(rows: List[int]) -> List[np.ndarray]:
        bx, by, bmask = x[rows], y[rows], mask[rows]
        px, py = np.where(bmask, bx, 0.0), np.where(bmask, by, 0.0)
        ff = fundamental_form(surface, px, py, beta, step, extent=(axes.a, axes.b))
        sigma = singular_values(ff)
        e_c, e_q = errors_from_sigma(sigma)
        e1 = np.zeros(bx.shape)
        if img is not None:
            source = apply_aspect(_canonical_geo(px, py, beta, projection, r_cap), inverse)
            col, row = source_position(img, source)
            c = np.mod(np.floor(col + 0.5).astype(np.int64), img.width)
            r = np.clip(np.floor(row + 0.5).astype(np.int64), 0, img.height - 1)
            e1 = saliency[r, c]
        stacked = np.stack([
            np.asarray(sigma.sigma1, dtype=float),
            np.asarray(sigma.sigma2, dtype=float),
            np.asarray(e_c, dtype=float),
            np.asarray(e_q, dtype=float),
            e1,
        ])
        stacked = np.where(bmask[None], stacked, np.nan)
        return [stacked[:, i] for i in range(len(rows))]

    processor: BatchProcessor[int, np.ndarray] = BatchProcessor(
        batch_size=runtime.band_rows, workers=runtime.threads, logger=logger
    )
    results = processor.process_batch(list(range(resolution)), process)
    error = BatchProcessor.first_error(results)
    if error is not None:
        raise error

    values = np.stack([row for result in results for row in result.output_items], axis=1)
    return DistortionField(
        x=x, y=y, mask=mask,
        sigma1=values[0], sigma2=values[1], e_c=values[2], e_q=values[3], e1=values[4]
    )


def weighted_error(field: DistortionField, opt: OptimizerConfig) -> float:
    """Sum of e1 (k_c e_c + k_q e_q) over the valid grid points of a field"""
    mask = field.mask
    weighted = field.e1[mask] * (opt.k_c * field.e_c[mask] + opt.k_q * field.e_q[mask])
    return float(np.sum(weighted))


def total_error(
    img: EquirectImage,
    beta: float,
    opt: OptimizerConfig,
    projection: Optional[ProjectionConfig] = None,
    saliency: Optional[np.ndarray] = None,
    runtime: Optional[RuntimeConfig] = None
) -> float:
    """Saliency-weighted sum of k_c e_c + k_q e_q over the metric grid"""
    projection = projection or ProjectionConfig()
    field = distortion_field(
        beta, projection, opt.resolution, opt.step, img=img, saliency=saliency, runtime=runtime
    )
    return weighted_error(field, opt)
