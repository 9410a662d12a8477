"""Square-to-disc rectifiers under the radial constraint.

Each rectifier moves a point of [-1, 1]^2 along its own ray from the origin,
so only the radius changes: (u, v) = t(x, y) * (x, y) / |(x, y)|.
"""
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import ellipe, ellipk

from src.core.errors import DomainError, NumericError
from src.core.validation import TOL, Real, as_output, check_scalar, clamp_to_interval
from src.models import DiscPoint, EllipseAxes, RectifierKind, RectifierName, SquarePoint

# Below this distance from the origin every rectifier returns the origin
ORIGIN_EPS = 1e-14
BISECTION_STEPS = 100
INVERSE_RESIDUAL = 1e-8


def _along_ray(x: np.ndarray, y: np.ndarray, t: np.ndarray) -> DiscPoint:
    d = np.hypot(x, y)
    near_origin = d <= ORIGIN_EPS
    scale = np.where(near_origin, 0.0, t / np.where(near_origin, 1.0, d))
    return DiscPoint(u=as_output(scale * x), v=as_output(scale * y))


def _square_coords(p: SquarePoint):
    return np.asarray(p.x, dtype=float), np.asarray(p.y, dtype=float)


def squircle_radius(x: Real, y: Real) -> np.ndarray:
    """Squircle contour parameter s = sqrt(x^2 + y^2 - x^2 y^2)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sqrt(np.maximum(x * x + y * y - x * x * y * y, 0.0))


def squircle_to_disc(p: SquarePoint) -> DiscPoint:
    x, y = _square_coords(p)
    return _along_ray(x, y, squircle_radius(x, y))


def isosquare_to_disc(p: SquarePoint) -> DiscPoint:
    x, y = _square_coords(p)
    # right/left walls give t = |x|, top/bottom walls t = |y|; both agree on the diagonals
    t = np.maximum(np.abs(x), np.abs(y))
    return _along_ray(x, y, t)


def _blended_isosquare_radius(x: np.ndarray, y: np.ndarray, rho: float) -> np.ndarray:
    t = np.maximum(np.abs(x), np.abs(y))
    tau = t ** (2.0 * rho)
    return np.minimum(tau * t + (1.0 - tau) * np.hypot(x, y), 1.0)


def blended_isosquare_to_disc(p: SquarePoint, rho: float) -> DiscPoint:
    """Blend the isosquare output with the identity by tau = (u^2 + v^2)^rho"""
    if not math.isfinite(rho) or rho < 0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    x, y = _square_coords(p)
    return _along_ray(x, y, _blended_isosquare_radius(x, y, rho))


def incomplete_elliptic_e(phi_e: float, k: float) -> float:
    """Legendre incomplete elliptic integral of the second kind E(phi, k).

    Moduli above one are accepted while k sin(phi) <= 1; the integral is then
    rewritten with sin(psi) = k sin(theta) so the integrand stays smooth.
    """
    phi_e = check_scalar(phi_e, 0.0, math.pi / 2, "phi")
    if not math.isfinite(k) or k < 0:
        raise DomainError(f"elliptic modulus must be finite and >= 0, got {k}")
    if k * math.sin(phi_e) > 1.0 + TOL:
        raise DomainError(f"E(phi={phi_e:.12g}, k={k:.12g}) has an imaginary integrand (k sin(phi) > 1)")

    if k <= 1.0:
        value, _ = quad(lambda th: math.sqrt(1.0 - (k * math.sin(th)) ** 2), 0.0, phi_e,
                        epsabs=1e-13, epsrel=1e-12)
        return value

    psi_end = math.asin(min(k * math.sin(phi_e), 1.0))
    value, _ = quad(lambda ps: math.cos(ps) ** 2 / math.sqrt(1.0 - (math.sin(ps) / k) ** 2), 0.0, psi_end,
                    epsabs=1e-13, epsrel=1e-12)
    return value / k


def squircle_area(s: float) -> float:
    """Area enclosed by the squircle contour x^2 + y^2 - x^2 y^2 = s^2"""
    s = check_scalar(s, 0.0, 1.0, "s")
    if s == 0.0:
        return 0.0
    return 4.0 * s * incomplete_elliptic_e(math.asin(s), 1.0 / s)


def equiareal_radius(s: Real) -> Real:
    """Disc radius t with pi t^2 proportional to the squircle area at s.

    Uses s E(asin s, 1/s) = E(m) - (1 - m) K(m) with m = s^2.
    """
    s = clamp_to_interval(s, 0.0, 1.0, "s")
    m = s * s
    with np.errstate(invalid="ignore"):
        inner = ellipe(m) - (1.0 - m) * ellipk(m)
    # series near the origin where the difference above cancels
    inner = np.where(m < 1e-4, math.pi / 4 * m * (1.0 + m / 8.0), inner)
    t = np.sqrt(np.maximum(np.where(m >= 1.0, 1.0, inner), 0.0))
    return as_output(np.minimum(t, 1.0))


def equiareal_squircle_to_disc(p: SquarePoint) -> DiscPoint:
    x, y = _square_coords(p)
    return _along_ray(x, y, np.asarray(equiareal_radius(squircle_radius(x, y))))


def rectifier_radius(x: Real, y: Real, kind: RectifierKind) -> np.ndarray:
    """Disc radius the rectifier assigns to square point (x, y)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    name = kind.name
    if name is RectifierName.SQUIRCLE:
        return squircle_radius(x, y)
    if name is RectifierName.ISOSQUARE:
        return np.maximum(np.abs(x), np.abs(y))
    if name is RectifierName.BLENDED_ISOSQUARE:
        return _blended_isosquare_radius(x, y, kind.rho)
    if name is RectifierName.EQUIAREAL_SQUIRCLE:
        return np.asarray(equiareal_radius(squircle_radius(x, y)))
    return np.hypot(x, y)


def rectify(p: SquarePoint, kind: RectifierKind) -> DiscPoint:
    """Apply a rectifier; RectifierName.NONE is the identity"""
    x, y = _square_coords(p)
    if kind.name is RectifierName.NONE:
        return DiscPoint(u=as_output(x), v=as_output(y))
    return _along_ray(x, y, rectifier_radius(x, y, kind))


def rect_to_ellipse(x: Real, y: Real, axes: EllipseAxes, base: RectifierKind) -> DiscPoint:
    """Rectify the rectangle [-a, a] x [-b, b] onto the inscribed ellipse.

    With RectifierName.NONE the plane point is its own disc point.
    """
    a, b = axes.a, axes.b
    xs = clamp_to_interval(np.asarray(x, dtype=float) / a, -1.0, 1.0, "x/a")
    ys = clamp_to_interval(np.asarray(y, dtype=float) / b, -1.0, 1.0, "y/b")
    disc = rectify(SquarePoint(xs, ys), base)
    return DiscPoint(u=as_output(a * np.asarray(disc.u)), v=as_output(b * np.asarray(disc.v)))


def disc_to_square_numeric(p: DiscPoint, kind: RectifierKind) -> SquarePoint:
    """Invert a rectifier by bisection along the ray through p"""
    u = np.asarray(p.u, dtype=float)
    v = np.asarray(p.v, dtype=float)
    r = clamp_to_interval(np.hypot(u, v), 0.0, 1.0, "disc radius")

    if kind.name is RectifierName.NONE:
        return SquarePoint(x=as_output(u), y=as_output(v))

    near_origin = r <= ORIGIN_EPS
    safe_r = np.where(near_origin, 1.0, np.hypot(u, v))
    dx = np.where(near_origin, 0.0, u / safe_r)
    dy = np.where(near_origin, 1.0, v / safe_r)
    # distance along the ray to the square boundary
    reach = 1.0 / np.maximum(np.abs(dx), np.abs(dy))

    lo = np.zeros_like(r)
    hi = reach.copy()
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = rectifier_radius(mid * dx, mid * dy, kind) < r
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    lam = np.where(near_origin, 0.0, 0.5 * (lo + hi))

    residual = np.abs(rectifier_radius(lam * dx, lam * dy, kind) - np.where(near_origin, 0.0, r))
    if residual.size and np.max(residual) > INVERSE_RESIDUAL:
        raise NumericError(
            f"disc-to-square inverse for {kind.name.value} did not converge "
            f"(max residual {np.max(residual):.3g})"
        )
    x = np.clip(lam * dx, -1.0, 1.0)
    y = np.clip(lam * dy, -1.0, 1.0)
    return SquarePoint(x=as_output(x), y=as_output(y))
