"""
Command-line interface for selfsim.

    selfsim analyze --config FILE [--out report.json] [--svg scene.svg] [--depth N] [--resolution N]
    selfsim classify --config FILE --point X,Y --point X,Y
    selfsim presets

Exit codes: 0 success, 2 configuration or bounds errors, 3 resource caps
exceeded, 1 any other selfsim error.
"""

import argparse
import logging
import sys
from typing import List, Optional, Sequence, Tuple

from .config import apply_overrides, load_config
from .errors import BoundsError, ConfigError, ResourceError, SelfSimError, ValidationError
from .ifs import generate_scene
from .presets import list_presets
from .raster import component_of_point, label_complement, rasterize, write_pgm
from .report import run_report
from .serializer import ReportSerializer
from .topology import homotopy_equivalent
from .visualization import render_svg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


def parse_point(text: str) -> Tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y but got '{text}'")
    return x, y


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfsim",
                                     description="Complementary self-similarity constants of IFS fractals")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug output")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the analysis pipeline and write a report")
    analyze.add_argument("--config", required=True, help="configuration file")
    analyze.add_argument("--out", help="report JSON path (stdout when omitted)")
    analyze.add_argument("--svg", help="SVG figure path")
    analyze.add_argument("--depth", type=int, help="override the configured depth")
    analyze.add_argument("--resolution", type=float, help="override the configured resolution")
    analyze.add_argument("--timings", action="store_true", help="include wall-clock stage timings")
    analyze.add_argument("--dump-grid", metavar="PREFIX",
                         help="write PREFIX-occupancy.pgm and PREFIX-distance.pgm")

    classify = sub.add_parser("classify", help="decide homotopy equivalence of radial maps at points")
    classify.add_argument("--config", required=True, help="configuration file")
    classify.add_argument("--point", action="append", type=parse_point, required=True,
                          metavar="X,Y", help="query point (repeat at least twice)")
    classify.add_argument("--depth", type=int, help="override the configured depth")
    classify.add_argument("--resolution", type=float, help="override the configured resolution")

    sub.add_parser("presets", help="list the registered preset systems")
    return parser


def cmd_analyze(args: argparse.Namespace) -> int:
    config = apply_overrides(load_config(args.config), depth=args.depth, resolution=args.resolution,
                             timings=True if args.timings else None, out=args.out, svg=args.svg)
    report = run_report(config)
    data = report.to_dict()
    if config.out:
        ReportSerializer.write(data, config.out)
    else:
        ReportSerializer.validate(data)
        sys.stdout.write(ReportSerializer.to_json(data))
    if config.svg:
        render_svg(report.scene, report, config.svg)
    if args.dump_grid:
        write_pgm(report.grid, f"{args.dump_grid}-occupancy.pgm")
        write_pgm(report.distance, f"{args.dump_grid}-distance.pgm")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    points: List[Tuple[float, float]] = args.point
    if len(points) < 2:
        raise ConfigError("classify needs at least two --point arguments", "point", "at least two points")
    config = apply_overrides(load_config(args.config), depth=args.depth, resolution=args.resolution)
    scene = generate_scene(config.system, config.depth, config.max_depth, config.max_components)
    labeled = label_complement(rasterize(scene, config.resolution, config.max_grid_side))
    labels = [component_of_point(labeled, p) for p in points]
    for p, label in zip(points, labels):
        kind = "unbounded" if label == labeled.unbounded_label else "bounded"
        print(f"({p[0]:g}, {p[1]:g}) label {label} ({kind})")
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            verdict = "homotopic" if homotopy_equivalent(labeled, points[i], points[j]) else "not homotopic"
            print(f"{i} {j} {verdict}")
    return EXIT_OK


def cmd_presets(args: argparse.Namespace) -> int:
    for name in list_presets():
        print(name)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "classify": cmd_classify, "presets": cmd_presets}


def exit_code_for(error: SelfSimError) -> int:
    if isinstance(error, ResourceError):
        return EXIT_RESOURCE
    if isinstance(error, (ConfigError, BoundsError, ValidationError)):
        return EXIT_CONFIG
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except SelfSimError as e:
        logger.debug("error details: %s", e.to_dict())
        print(f"error: {e.message}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
