import argparse
import math
import re
import sys
from typing import List, Optional, Tuple

from src.config import OptimizerConfig, ProjectionConfig, RuntimeConfig
from src.core.errors import ConfigError, DomainError, ImageIOError, NumericError
from src.core.logging import ContextLogger, configure_logging
from src.distortion import distortion_field, saliency_e1, weighted_error
from src.image_io import read_image, write_csv, write_heatmap, write_image
from src.models import AspectSpec, BlendBeta, EllipseAxes, RectifierKind, RectifierName, StdLatitude
from src.monitoring.metrics import MetricsCollector
from src.optimizer import optimize_beta
from src.processing.render import project, project_cylindrical, project_mercator
from src.projection.cylindrical import PRESETS, blended_generalized_extent, preset_latitude

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

DEFAULT_HEIGHT = 512
DEFAULT_CYL_WIDTH = 1024
DEFAULT_MERCATOR_LAT = 85.0

logger = ContextLogger("panorama")


def parse_size(text: str) -> Tuple[int, int]:
    """'<W>x<H>' -> (W, H)"""
    match = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not match:
        raise ConfigError(f"--size must look like 512x512, got {text!r}")
    width, height = int(match.group(1)), int(match.group(2))
    if width < 1 or height < 1:
        raise ConfigError(f"--size must be at least 1x1, got {text!r}")
    return width, height


def runtime_from_args(args: argparse.Namespace) -> RuntimeConfig:
    runtime = RuntimeConfig(show_progress=args.progress)
    if args.threads is not None:
        runtime.threads = args.threads
    runtime.validate()
    return runtime


def projection_from_args(args: argparse.Namespace, beta: float) -> ProjectionConfig:
    rectifier = RectifierKind.parse(args.rectifier, args.rho)
    axes = EllipseAxes(a=args.ellipse, b=1.0)
    if getattr(args, "size", None):
        width, height = parse_size(args.size)
    else:
        width, height = int(round(DEFAULT_HEIGHT * axes.a)), DEFAULT_HEIGHT
    config = ProjectionConfig(
        beta=BlendBeta(beta),
        rectifier=rectifier,
        axes=axes,
        aspect=AspectSpec(
            center_lon=math.radians(args.center_lon),
            center_lat=math.radians(args.center_lat),
            roll=math.radians(args.roll),
        ),
        ceiling_cap=math.radians(args.crop_lat),
        out_width=width,
        out_height=height,
        interpolation=getattr(args, "interp", "bilinear"),
    )
    config.validate()
    return config


def optimizer_from_args(args: argparse.Namespace) -> OptimizerConfig:
    opt = OptimizerConfig(
        k_c=args.kc,
        k_q=args.kq,
        beta_min=args.beta_min,
        beta_max=args.beta_max,
        tolerance=args.tol,
        grid=args.grid,
        resolution=args.resolution,
    )
    opt.validate()
    return opt


def cmd_render(args: argparse.Namespace) -> int:
    """Render a revolvable square (or rectangular) overhead view"""
    runtime = runtime_from_args(args)
    metrics = MetricsCollector()
    # validate flags before touching the input
    config = projection_from_args(args, 0.5 if args.beta is None else args.beta)
    opt = optimizer_from_args(args) if args.auto_beta else None

    img = read_image(args.input)
    if opt is not None:
        beta, e_total = optimize_beta(img, opt, config, runtime, logger, metrics)
        logger.info("Automatic beta selected", beta=beta, e_total=e_total)
        config = config.with_beta(beta)

    output = project(img, config, runtime, logger, metrics)
    write_image(args.output, output)
    logger.info("Run metrics", **metrics.get_current_metrics())
    print(f"rendered {args.output} beta={config.beta_value:.6f}")
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    """Search the blend parameter with the least weighted distortion"""
    runtime = runtime_from_args(args)
    metrics = MetricsCollector()
    config = projection_from_args(args, 0.5)
    opt = optimizer_from_args(args)

    img = read_image(args.input)
    beta, e_total = optimize_beta(img, opt, config, runtime, logger, metrics)
    logger.info("Run metrics", **metrics.get_current_metrics())
    print(f"beta={beta:.6f} e_total={e_total:.6f}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    """Export distortion fields for a fixed blend parameter"""
    exports = [args.heatmap_ec, args.heatmap_eq, args.heatmap_e1, args.csv]
    if not any(exports):
        raise ConfigError("metrics needs at least one of --heatmap-ec, --heatmap-eq, --heatmap-e1, --csv")
    runtime = runtime_from_args(args)
    config = projection_from_args(args, args.beta)
    opt = optimizer_from_args(args)

    img = read_image(args.input)
    saliency = saliency_e1(img)
    field = distortion_field(
        config.beta_value, config, opt.resolution, opt.step,
        img=img, saliency=saliency, runtime=runtime
    )

    if args.heatmap_ec:
        write_heatmap(args.heatmap_ec, field.e_c, vmax=1.0)
    if args.heatmap_eq:
        write_heatmap(args.heatmap_eq, field.e_q, vmax=1.0)
    if args.heatmap_e1:
        write_heatmap(args.heatmap_e1, field.e1)
    if args.csv:
        write_csv(args.csv, field)

    e_total = weighted_error(field, opt)
    print(f"mean_e_c={field.mean('e_c'):.6f} mean_e_q={field.mean('e_q'):.6f} e_total={e_total:.6f}")
    return EXIT_OK


def cmd_cyl(args: argparse.Namespace) -> int:
    """Render through the blended cylindrical family or the Mercator endpoint"""
    runtime = runtime_from_args(args)
    metrics = MetricsCollector()
    interp = args.interp

    if args.mercator:
        if args.beta is not None:
            raise ConfigError("--mercator replaces --beta; pass only one of them")
        if args.phi0 is not None or args.preset is not None:
            raise ConfigError("--mercator has no standard latitude; drop --phi0 and --preset")
        mercator_lat = DEFAULT_MERCATOR_LAT if args.mercator_lat is None else args.mercator_lat
        if not 0.0 < mercator_lat < 90.0:
            raise ConfigError(f"--mercator-lat must lie in (0, 90), got {mercator_lat}")
        max_lat = math.radians(mercator_lat)
        width, height = parse_size(args.size) if args.size else (DEFAULT_CYL_WIDTH, DEFAULT_CYL_WIDTH // 2)
        img = read_image(args.input)
        output = project_mercator(img, max_lat, width, height, interp, runtime, logger, metrics)
        label = "mercator"
    else:
        if args.mercator_lat is not None:
            raise ConfigError("--mercator-lat only applies with --mercator")
        if args.beta is None:
            raise ConfigError("cyl needs --beta in (0, 1] (or --mercator)")
        if args.beta <= 0.0:
            raise ConfigError("beta = 0 is the Mercator endpoint; use --mercator instead")
        if args.beta > 1.0:
            raise ConfigError(f"--beta must lie in (0, 1], got {args.beta}")
        if args.preset:
            phi0 = preset_latitude(args.preset)
        else:
            phi0 = StdLatitude(math.radians(0.0 if args.phi0 is None else args.phi0))
        if args.size:
            width, height = parse_size(args.size)
        else:
            half_width, half_height = blended_generalized_extent(args.beta, phi0)
            width = DEFAULT_CYL_WIDTH
            height = max(1, int(round(width * half_height / half_width)))
        img = read_image(args.input)
        output = project_cylindrical(img, args.beta, phi0, width, height, interp, runtime, logger, metrics)
        label = f"{args.beta:.6f}"

    write_image(args.output, output)
    logger.info("Run metrics", **metrics.get_current_metrics())
    print(f"rendered {args.output} beta={label}")
    return EXIT_OK


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=int, default=None,
                        help='Worker threads (default: all cores)')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        default='WARNING', help='Set the logging level (logs go to stderr)')
    common.add_argument('--progress', action='store_true',
                        help='Show progress bars on stderr')
    return common


def _projection_options() -> argparse.ArgumentParser:
    projection = argparse.ArgumentParser(add_help=False)
    projection.add_argument('--rectifier', default='squircle',
                            choices=[name.value for name in RectifierName],
                            help='Disc rectifier (default: squircle)')
    projection.add_argument('--rho', type=float, default=None,
                            help='Blend factor of the blended-isosquare rectifier')
    projection.add_argument('--ellipse', type=float, default=1.0,
                            help='Semi-major axis a with b = 1 (default: 1)')
    projection.add_argument('--center-lat', type=float, default=-90.0,
                            help='Latitude placed at the image centre, degrees (default: -90)')
    projection.add_argument('--center-lon', type=float, default=0.0,
                            help='Longitude placed at the image centre, degrees (default: 0)')
    projection.add_argument('--roll', type=float, default=0.0,
                            help='Rotation about the image centre, degrees (default: 0)')
    projection.add_argument('--crop-lat', type=float, default=90.0,
                            help='Latitude at the image rim, degrees (default: 90, no crop)')
    return projection


def _optimizer_options() -> argparse.ArgumentParser:
    defaults = OptimizerConfig()
    optimizer = argparse.ArgumentParser(add_help=False)
    optimizer.add_argument('--kc', type=float, default=defaults.k_c,
                           help='Weight of the conformal error (default: 2)')
    optimizer.add_argument('--kq', type=float, default=defaults.k_q,
                           help='Weight of the equiareal error (default: 1)')
    optimizer.add_argument('--beta-min', type=float, default=defaults.beta_min)
    optimizer.add_argument('--beta-max', type=float, default=defaults.beta_max)
    optimizer.add_argument('--tol', type=float, default=defaults.tolerance,
                           help='Golden-section tolerance on beta (default: 0.005)')
    optimizer.add_argument('--grid', type=int, default=defaults.grid,
                           help='Coarse scan points (default: 16)')
    optimizer.add_argument('--resolution', type=int, default=defaults.resolution,
                           help='Metric grid size per side (default: 128)')
    return optimizer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='panorama',
        description='Reproject equirectangular panoramas into revolvable overhead views'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _common_options()
    projection = _projection_options()
    optimizer = _optimizer_options()

    render = subparsers.add_parser('render', parents=[common, projection, optimizer],
                                   help='Render a revolvable view')
    render.add_argument('--input', required=True)
    render.add_argument('--output', required=True)
    beta_choice = render.add_mutually_exclusive_group()
    beta_choice.add_argument('--beta', type=float, default=None,
                             help='Blend parameter in [0.001, 1] (default: 0.5)')
    beta_choice.add_argument('--auto-beta', action='store_true',
                             help='Pick beta with the optimizer first')
    render.add_argument('--size', default=None, help='Output size WxH (default: 512 high, a:b wide)')
    render.add_argument('--interp', choices=['nearest', 'bilinear'], default='bilinear')
    render.set_defaults(handler=cmd_render)

    optimize = subparsers.add_parser('optimize', parents=[common, projection, optimizer],
                                     help='Find the best blend parameter')
    optimize.add_argument('--input', required=True)
    optimize.set_defaults(handler=cmd_optimize)

    metrics = subparsers.add_parser('metrics', parents=[common, projection, optimizer],
                                    help='Export distortion heatmaps and CSV')
    metrics.add_argument('--input', required=True)
    metrics.add_argument('--beta', type=float, required=True)
    metrics.add_argument('--heatmap-ec', default=None)
    metrics.add_argument('--heatmap-eq', default=None)
    metrics.add_argument('--heatmap-e1', default=None)
    metrics.add_argument('--csv', default=None)
    metrics.set_defaults(handler=cmd_metrics)

    cyl = subparsers.add_parser('cyl', parents=[common], help='Render the blended cylindrical projection')
    cyl.add_argument('--input', required=True)
    cyl.add_argument('--output', required=True)
    cyl.add_argument('--beta', type=float, default=None)
    latitude = cyl.add_mutually_exclusive_group()
    latitude.add_argument('--phi0', type=float, default=None,
                          help='Standard latitude, degrees (default: 0)')
    latitude.add_argument('--preset', choices=list(PRESETS), default=None)
    cyl.add_argument('--mercator', action='store_true',
                     help='Render the Mercator endpoint instead of a blend')
    cyl.add_argument('--mercator-lat', type=float, default=None,
                     help='Latitude limit of the Mercator render, degrees (default: 85)')
    cyl.add_argument('--size', default=None)
    cyl.add_argument('--interp', choices=['nearest', 'bilinear'], default='bilinear')
    cyl.set_defaults(handler=cmd_cyl)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except (ConfigError, DomainError) as e:
        return _fail(e, EXIT_USAGE)
    except ImageIOError as e:
        return _fail(e, EXIT_IO)
    except NumericError as e:
        return _fail(e, EXIT_NUMERIC)
    except Exception as e:
        logger.debug("Unexpected failure", exc_info=True, error=str(e))
        return _fail(e, EXIT_NUMERIC)


def _fail(error: Exception, code: int) -> int:
    """One diagnostic line on stderr"""
    message = " ".join(str(error).split()) or type(error).__name__
    print(f"error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    exit(main())
