import math

import numpy as np
import pytest

from src.core.errors import DomainError
from src.models import BlendBeta, DiscPoint, EllipseAxes, GeoCoord
from src.projection.azimuthal import (
    beta_value,
    disc_to_geo,
    elliptical_disc_to_geo,
    geo_to_disc,
    geo_to_elliptical_disc,
    lat_from_r_blended,
    lat_from_r_lambert,
    lat_from_r_normalized,
    lat_from_r_stereographic,
    r_from_lat_blended,
    r_from_lat_normalized,
    rim_radius,
)
from tests.conftest import random_disc_points

BETAS = [1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]


def test_normalized_latitude_examples():
    """Test normalized blend on known radii"""
    assert lat_from_r_normalized(0.0, 0.7) == -math.pi / 2
    assert lat_from_r_normalized(1.0, 0.3) == math.pi / 2
    assert lat_from_r_normalized(math.sqrt(2) / 2, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert lat_from_r_normalized(0.5, 0.5) == pytest.approx(0.1433476, abs=1e-7)


def test_blended_latitude_examples():
    """Test unnormalized blend and its endpoints"""
    assert lat_from_r_blended(1.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert lat_from_r_blended(4.0, 0.25) == math.pi / 2
    assert lat_from_r_blended(0.5, 1.0) == pytest.approx(-math.pi / 6, abs=1e-12)
    assert lat_from_r_stereographic(0.0) == -math.pi / 2
    assert lat_from_r_stereographic(math.sqrt(3)) == pytest.approx(math.pi / 6, abs=1e-12)
    assert lat_from_r_lambert(1.0) == pytest.approx(math.pi / 2, abs=1e-15)


def test_inverse_radius_examples():
    """Test latitude to radius on both blends"""
    assert r_from_lat_normalized(-math.pi / 2, 0.4) == pytest.approx(0.0, abs=1e-15)
    assert r_from_lat_normalized(math.pi / 2, 0.4) == pytest.approx(1.0, abs=1e-15)
    assert r_from_lat_normalized(0.0, 0.5) == pytest.approx(0.4472136, abs=1e-7)
    assert lat_from_r_normalized(r_from_lat_normalized(0.0, 0.5), 0.5) == pytest.approx(0.0, abs=1e-12)

    assert r_from_lat_blended(-math.pi / 2, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert r_from_lat_blended(math.pi / 2, 0.5) == pytest.approx(2.0, abs=1e-12)
    assert r_from_lat_blended(0.0, 1.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert r_from_lat_blended(math.pi / 2, 0.0) == math.inf


def test_rim_radius_for_ceiling_crop():
    """Test the disc radius shown at the rim of a cropped view"""
    assert rim_radius(math.pi / 2, 0.3) == 1.0
    assert rim_radius(0.0, 0.5) == pytest.approx(0.4472136, abs=1e-7)
    assert lat_from_r_normalized(rim_radius(math.radians(40), 0.7), 0.7) == pytest.approx(math.radians(40), abs=1e-12)


def test_blend_endpoints_match_classic_projections():
    """Test beta = 0 and beta = 1 agree with stereographic and Lambert"""
    r = np.linspace(0.0, 1.0, 10_000)
    assert np.max(np.abs(lat_from_r_blended(r, 0.0) - lat_from_r_stereographic(r))) < 1e-12
    assert np.max(np.abs(lat_from_r_blended(r, 1.0) - lat_from_r_lambert(r))) < 1e-12
    assert np.max(np.abs(lat_from_r_normalized(r, 1.0) - lat_from_r_lambert(r))) < 1e-12


@pytest.mark.parametrize("beta", BETAS)
def test_normalized_latitude_is_increasing(beta):
    """Test latitude grows strictly with radius"""
    r = np.linspace(0.0, 1.0, 1001)[1:-1]
    lat = lat_from_r_normalized(r, beta)
    assert np.all(np.diff(lat) > 0)
    assert np.all(lat > -math.pi / 2) and np.all(lat < math.pi / 2)


@pytest.mark.parametrize("beta", BETAS)
def test_disc_geo_round_trip(rng, beta):
    """Test disc -> geo -> disc returns the starting point"""
    u, v = random_disc_points(rng, 100_000, radius=0.999999)
    g = disc_to_geo(DiscPoint(u, v), beta)
    back = geo_to_disc(g, beta)
    assert np.max(np.abs(back.u - u)) < 1e-9
    assert np.max(np.abs(back.v - v)) < 1e-9


@pytest.mark.parametrize("beta", [1e-3, 0.5, 1.0])
def test_azimuth_is_preserved_along_rays(beta):
    """Test every point of a ray shares one longitude"""
    lon = 0.83
    r = np.linspace(0.01, 0.99, 200)
    g = disc_to_geo(DiscPoint(r * math.sin(lon), r * math.cos(lon)), beta)
    assert np.max(np.abs(g.lon - lon)) < 1e-12


def test_disc_to_geo_examples():
    """Test centre, rim and axis points"""
    centre = disc_to_geo(DiscPoint(0.0, 0.0), 0.5)
    assert centre.lon == 0.0
    assert centre.lat == -math.pi / 2

    rim = disc_to_geo(DiscPoint(1.0, 0.0), 0.5)
    assert rim.lon == pytest.approx(math.pi / 2)
    assert rim.lat == math.pi / 2

    back = geo_to_disc(GeoCoord(lon=math.pi / 2, lat=0.0), 0.5)
    assert back.u == pytest.approx(0.4472136, abs=1e-7)
    assert back.v == pytest.approx(0.0, abs=1e-12)


def test_elliptical_reduces_to_circular(rng):
    """Test a = b = 1 matches the circular disc"""
    u, v = random_disc_points(rng, 100_000)
    circle = disc_to_geo(DiscPoint(u, v), 0.37)
    ellipse = elliptical_disc_to_geo(DiscPoint(u, v), 0.37, EllipseAxes(1.0, 1.0))
    assert np.max(np.abs(circle.lat - ellipse.lat)) < 1e-12
    assert np.max(np.abs(circle.lon - ellipse.lon)) < 1e-12


def test_elliptical_examples():
    """Test rim and axis points of an ellipse"""
    rim = elliptical_disc_to_geo(DiscPoint(1.5, 0.0), 0.5, EllipseAxes(1.5, 1.0))
    assert rim.lat == math.pi / 2

    axis = elliptical_disc_to_geo(DiscPoint(0.0, 0.4472136), 0.5, EllipseAxes(2.0, 1.0))
    assert axis.lon == 0.0
    assert axis.lat == pytest.approx(0.0, abs=1e-6)


def test_elliptical_round_trip(rng):
    """Test ellipse -> geo -> ellipse returns the starting point"""
    axes = EllipseAxes(1.7, 1.0)
    u, v = random_disc_points(rng, 50_000, radius=0.999)
    u = u * axes.a
    g = elliptical_disc_to_geo(DiscPoint(u, v), 0.6, axes)
    back = geo_to_elliptical_disc(g, 0.6, axes)
    assert np.max(np.abs(back.u - u)) < 1e-9
    assert np.max(np.abs(back.v - v)) < 1e-9


def test_domain_errors():
    """Test inputs outside each kernel's domain are rejected"""
    with pytest.raises(DomainError):
        disc_to_geo(DiscPoint(1.1, 0.0), 0.5)
    with pytest.raises(DomainError):
        lat_from_r_lambert(1.1)
    with pytest.raises(DomainError):
        lat_from_r_blended(5.0, 0.25)
    with pytest.raises(DomainError):
        lat_from_r_normalized(0.5, 0.0)
    with pytest.raises(DomainError):
        beta_value(1.5)
    with pytest.raises(DomainError):
        BlendBeta(0.0)


def test_blend_beta_accepts_float_conversion():
    """Test BlendBeta works wherever a float beta does"""
    assert lat_from_r_normalized(0.5, BlendBeta(0.5)) == lat_from_r_normalized(0.5, 0.5)
    assert float(BlendBeta(1.0)) == 1.0
