import csv
import math
import os

import numpy as np
import pytest
from PIL import Image

from src.core.errors import ConfigError
from src.main import EXIT_IO, EXIT_OK, EXIT_USAGE, main, parse_size
from src.models import EquirectImage, GeoCoord
from src.processing.render import sample_equirect
from tests.conftest import make_constant_panorama, make_grid_panorama, make_smooth_panorama, psnr, save_png


@pytest.fixture
def smooth_png(tmp_path):
    return save_png(tmp_path / "smooth.png", make_smooth_panorama(128, 64))


@pytest.fixture
def constant_png(tmp_path):
    return save_png(tmp_path / "constant.png", make_constant_panorama(64, 32))


@pytest.fixture
def grid_png(tmp_path):
    return save_png(tmp_path / "grid.png", make_grid_panorama(128, 64))


def _pixels(path):
    with Image.open(path) as img:
        return np.asarray(img)


def test_parse_size():
    """Test WxH parsing"""
    assert parse_size("512x256") == (512, 256)
    assert parse_size(" 96X64 ") == (96, 64)
    with pytest.raises(ConfigError):
        parse_size("512")
    with pytest.raises(ConfigError):
        parse_size("0x10")


def test_render_default_beta(tmp_path, smooth_png, capsys):
    """Test render writes the image and reports the blend"""
    out = str(tmp_path / "view.png")
    code = main(["render", "--input", smooth_png, "--output", out, "--size", "64x64", "--threads", "2"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == f"rendered {out} beta=0.500000"

    pixels = _pixels(out)
    assert pixels.shape == (64, 64, 4)
    assert np.all(pixels[..., 3] == 255)


def test_render_options(tmp_path, smooth_png, capsys):
    """Test rectifier, ellipse, aspect and crop flags"""
    out = str(tmp_path / "wide.png")
    code = main([
        "render", "--input", smooth_png, "--output", out, "--beta", "1",
        "--rectifier", "blended-isosquare", "--rho", "0.5", "--ellipse", "1.5", "--size", "96x64",
        "--center-lat", "-60", "--center-lon", "30", "--roll", "15", "--crop-lat", "45",
    ])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == f"rendered {out} beta=1.000000"
    assert _pixels(out).shape == (64, 96, 4)

    bare = str(tmp_path / "bare.png")
    assert main(["render", "--input", smooth_png, "--output", bare, "--rectifier", "none", "--size", "32x32"]) == EXIT_OK
    assert _pixels(bare)[0, 0, 3] == 0


def test_render_is_identical_across_threads(tmp_path, smooth_png):
    """Test the thread count never changes output bytes"""
    first = str(tmp_path / "one.png")
    second = str(tmp_path / "four.png")
    assert main(["render", "--input", smooth_png, "--output", first, "--size", "48x48", "--threads", "1"]) == EXIT_OK
    assert main(["render", "--input", smooth_png, "--output", second, "--size", "48x48", "--threads", "4"]) == EXIT_OK
    np.testing.assert_array_equal(_pixels(first), _pixels(second))


def test_render_auto_beta(tmp_path, constant_png, capsys):
    """Test --auto-beta runs the optimizer first"""
    out = str(tmp_path / "auto.png")
    code = main([
        "render", "--input", constant_png, "--output", out, "--auto-beta",
        "--size", "32x32", "--resolution", "16", "--grid", "4",
    ])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == f"rendered {out} beta=1.000000"


@pytest.mark.parametrize("args", [
    ["--rectifier", "squircle", "--rho", "2"],
    ["--ellipse", "1.5", "--size", "64x64"],
    ["--beta", "0"],
    ["--beta", "1.5"],
    ["--size", "64"],
    ["--crop-lat", "-90"],
    ["--threads", "0"],
    ["--beta", "0.5", "--auto-beta"],
    ["--rectifier", "hexagon"],
])
def test_render_usage_errors(tmp_path, smooth_png, capsys, args):
    """Test invalid flags exit with the usage code"""
    out = str(tmp_path / "never.png")
    code = main(["render", "--input", smooth_png, "--output", out] + args)
    assert code == EXIT_USAGE
    assert capsys.readouterr().err.strip()
    assert not os.path.exists(out)


def test_missing_required_flag(capsys):
    """Test argparse errors map to the usage code"""
    assert main(["render", "--output", "x.png"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_io_errors(tmp_path, capsys):
    """Test unreadable inputs exit with the I/O code and one stderr line"""
    out = str(tmp_path / "out.png")
    code = main(["render", "--input", str(tmp_path / "missing.png"), "--output", out])
    assert code == EXIT_IO
    err = capsys.readouterr().err.strip()
    assert err.startswith("error:")
    assert len(err.splitlines()) == 1

    full = save_png(tmp_path / "full.png", make_smooth_panorama(64, 32))
    with open(full, "rb") as f:
        data = f.read()
    truncated = tmp_path / "truncated.png"
    truncated.write_bytes(data[: len(data) // 2])
    assert main(["render", "--input", str(truncated), "--output", out]) == EXIT_IO
    assert not os.path.exists(out)

    assert main(["render", "--input", full, "--output", str(tmp_path / "out.bmp"), "--size", "16x16"]) == EXIT_IO


def test_optimize_constant_image(constant_png, capsys):
    """Test a featureless panorama resolves to beta = 1 with zero error"""
    code = main(["optimize", "--input", constant_png, "--resolution", "16", "--grid", "4"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "beta=1.000000 e_total=0.000000"


def test_optimize_equiareal_weight(grid_png, capsys):
    """Test area-only weighting picks a blend near Lambert"""
    code = main([
        "optimize", "--input", grid_png, "--kc", "0", "--kq", "1",
        "--resolution", "24", "--grid", "8", "--tol", "0.01",
    ])
    assert code == EXIT_OK
    out = capsys.readouterr().out.strip()
    beta = float(out.split()[0].split("=")[1])
    assert beta >= 0.95
    assert out.split()[1].startswith("e_total=")


def test_optimize_rejects_zero_weights(grid_png):
    """Test k_c = k_q = 0 is a usage error"""
    assert main(["optimize", "--input", grid_png, "--kc", "0", "--kq", "0"]) == EXIT_USAGE


def test_metrics_exports(tmp_path, grid_png, capsys):
    """Test heatmaps and CSV export"""
    table = str(tmp_path / "metrics.csv")
    ec = str(tmp_path / "ec.png")
    e1 = str(tmp_path / "e1.png")
    code = main([
        "metrics", "--input", grid_png, "--beta", "0.5", "--resolution", "20",
        "--csv", table, "--heatmap-ec", ec, "--heatmap-e1", e1,
    ])
    assert code == EXIT_OK
    fields = dict(item.split("=") for item in capsys.readouterr().out.split())
    assert set(fields) == {"mean_e_c", "mean_e_q", "e_total"}
    assert 0.0 <= float(fields["mean_e_c"]) <= 1.0

    with open(table, newline="") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 1 + 20 * 20
    assert _pixels(ec).shape == (20, 20)
    assert _pixels(e1).max() == 255


def test_metrics_lambert_equiareal_heatmap_is_black(tmp_path, grid_png):
    """Test the unrectified Lambert disc shows no area distortion"""
    eq = str(tmp_path / "eq.png")
    code = main([
        "metrics", "--input", grid_png, "--beta", "1", "--rectifier", "none",
        "--resolution", "32", "--heatmap-eq", eq,
    ])
    assert code == EXIT_OK
    assert _pixels(eq).max() <= 1


def test_metrics_needs_an_export(grid_png, capsys):
    """Test metrics without outputs is a usage error"""
    assert main(["metrics", "--input", grid_png, "--beta", "0.5"]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_cyl_matches_lambert_remap(tmp_path, smooth_png, capsys):
    """Test cyl with beta = 1 and phi0 = 0 is the Lambert cylindrical map"""
    out = str(tmp_path / "cyl.png")
    code = main(["cyl", "--input", smooth_png, "--output", out, "--beta", "1", "--phi0", "0", "--size", "128x41"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == f"rendered {out} beta=1.000000"

    with Image.open(smooth_png) as img:
        source = EquirectImage(np.asarray(img.convert("RGB"), dtype=float))
    jj, ii = np.meshgrid(np.arange(41), np.arange(128), indexing="ij")
    lon = math.pi * (-1.0 + 2.0 * (ii + 0.5) / 128)
    lat = np.arcsin(1.0 - 2.0 * (jj + 0.5) / 41)
    expected = np.clip(np.rint(sample_equirect(source, GeoCoord(lon, lat))), 0, 255)
    assert psnr(_pixels(out)[..., :3], expected) > 45.0


def test_cyl_variants(tmp_path, smooth_png, capsys):
    """Test presets, default sizing and the Mercator endpoint"""
    preset = str(tmp_path / "behrmann.png")
    assert main(["cyl", "--input", smooth_png, "--output", preset, "--beta", "0.5", "--preset", "behrmann"]) == EXIT_OK
    height, width = _pixels(preset).shape[:2]
    assert width == 1024 and height > 0

    mercator = str(tmp_path / "mercator.png")
    capsys.readouterr()
    assert main(["cyl", "--input", smooth_png, "--output", mercator, "--mercator", "--size", "64x64"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == f"rendered {mercator} beta=mercator"

    capped = str(tmp_path / "capped.png")
    assert main(["cyl", "--input", smooth_png, "--output", capped, "--mercator", "--mercator-lat", "60", "--size", "32x32"]) == EXIT_OK
    assert _pixels(capped).shape == (32, 32, 4)


@pytest.mark.parametrize("args, hint", [
    (["--beta", "0"], "--mercator"),
    (["--mercator", "--beta", "0.5"], "--mercator"),
    (["--beta", "0.5", "--phi0", "30", "--preset", "behrmann"], "not allowed"),
    (["--beta", "0.5", "--phi0", "90"], "standard latitude"),
    (["--mercator", "--preset", "gall-peters"], "--phi0 and --preset"),
    (["--mercator", "--phi0", "10"], "--phi0 and --preset"),
    (["--beta", "0.5", "--mercator-lat", "10"], "--mercator-lat"),
    (["--mercator", "--mercator-lat", "90"], "--mercator-lat"),
    ([], "--beta"),
])
def test_cyl_usage_errors(tmp_path, smooth_png, capsys, args, hint):
    """Test cyl flag validation"""
    out = str(tmp_path / "never.png")
    assert main(["cyl", "--input", smooth_png, "--output", out] + args) == EXIT_USAGE
    assert hint in capsys.readouterr().err
    assert not os.path.exists(out)
