"""
Command line front end: scenarios, continued fractions, point and grid classification, figures,
certificate verification and grid audits.
"""
import argparse
import dataclasses
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from .affine import Vector
from .classification import SearchConfig, classify_grid, classify_point, consistency_audit, verify_certificate
from .graphs import facet_sequence, polygon_boundary
from .parsing import parse_certificate, parse_grid, parse_polygon
from .rendering import RenderStyle, write_svg
from .resolutions import SCENARIOS, build_scenario, conormal_chain, hj_expand
from .utils import format_rational, parse_rational
from .writing import dumps, write_json


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """An argument parser that raises on usage errors instead of exiting with status 2."""
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _rationals(count: Optional[int] = None):
    def parse(text: str) -> List[Fraction]:
        values = [_rational(part) for part in text.split(",")]
        if count is not None and len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated rationals, got {text!r}")
        return values
    return parse


def _assignment(text: str):
    key, separator, value = text.partition("=")
    if not separator or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="toric-probes", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")
    commands = parser.add_subparsers(dest="command", required=True)

    scenario = commands.add_parser("scenario", help="list, show or emit the built-in polygons")
    scenario_commands = scenario.add_subparsers(dest="scenario_command", required=True)
    scenario_commands.add_parser("list", help="print scenario names and default parameters")
    emit = scenario_commands.add_parser("emit", help="write the polygon JSON of a scenario")
    emit.add_argument("name", choices=sorted(SCENARIOS))
    emit.add_argument("parameters", nargs="*", type=_assignment, metavar="KEY=VALUE")
    emit.add_argument("--out", help="output file [default: stdout]")
    show = scenario_commands.add_parser("show", help="print the facets of a scenario in boundary order")
    show.add_argument("name", choices=sorted(SCENARIOS))
    show.add_argument("parameters", nargs="*", type=_assignment, metavar="KEY=VALUE")

    hj = commands.add_parser("hj", help="Hirzebruch-Jung continued fraction of n/m and its conormal chain")
    hj.add_argument("n", type=int)
    hj.add_argument("m", type=int)

    classify = commands.add_parser("classify", help="classify a single interior point")
    classify.add_argument("--polygon", required=True)
    classify.add_argument("--point", required=True, type=_rationals(2), help="x1,x2")
    classify.add_argument("--out", help="verdict JSON output [default: stdout]")
    _add_config_arguments(classify)

    grid = commands.add_parser("grid", help="classify the grid points of a bounding box")
    grid.add_argument("--polygon", required=True)
    grid.add_argument("--bbox", required=True, type=_rationals(4), help="x0,y0,x1,y1")
    grid.add_argument("--res", required=True, type=_rational, help="grid step p/q")
    grid.add_argument("--out", required=True)
    grid.add_argument("--workers", type=int, default=None,
                      help="worker processes [default: TORIC_PROBE_THREADS, or one per CPU]")
    _add_config_arguments(grid)

    render = commands.add_parser("render", help="render a classified grid as SVG")
    render.add_argument("--grid", required=True)
    render.add_argument("--out", required=True)
    render.add_argument("--scale", type=int, default=40, help="pixels per unit")
    render.add_argument("--no-legend", action="store_true")

    plot = commands.add_parser("plot", help="plot a classified grid with matplotlib")
    plot.add_argument("--grid", required=True)
    plot.add_argument("--out", required=True, help="image file, format taken from the extension")

    verify = commands.add_parser("verify-certificate", help="re-verify a serialized certificate")
    verify.add_argument("--cert", required=True)
    verify.add_argument("--polygon", required=True)

    audit = commands.add_parser("audit", help="re-verify every certificate of a grid")
    audit.add_argument("--grid", required=True)
    return parser


def _add_config_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="search config JSON; flags override its values")
    parser.add_argument("--direction-height", type=int)
    parser.add_argument("--mu", type=_rationals(), help="comma-separated mu samples in [0, 1]")
    parser.add_argument("--epsilon", type=_rational)
    parser.add_argument("--samples", type=int, help="samples of the probe-deflector intersection")
    parser.add_argument("--ghost-height", type=int)
    parser.add_argument("--flag-cap", type=_rational)


def search_config(args: argparse.Namespace) -> SearchConfig:
    config = SearchConfig() if args.config is None else SearchConfig.from_json(args.config)
    overrides = {
        "direction_height": args.direction_height,
        "mu_samples": None if args.mu is None else tuple(args.mu),
        "epsilon": args.epsilon,
        "x_pq_samples": args.samples,
        "ghost_height": args.ghost_height,
        "max_flag_cap": args.flag_cap,
    }
    return dataclasses.replace(config, **{k: v for k, v in overrides.items() if v is not None})


def _scenario(args: argparse.Namespace):
    if args.scenario_command == "list":
        for name, scenario in sorted(SCENARIOS.items()):
            parameters = " ".join(f"{k}={_format_parameter(v)}" for k, v in scenario.parameters.items())
            print(f"{name} {parameters}  # {scenario.description}")
        return
    polygon = build_scenario(args.name, dict(args.parameters))
    if args.scenario_command == "show":
        print(polygon.name)
        for i, constraint in zip(polygon_boundary(polygon), facet_sequence(polygon)):
            print(f"{i}: {constraint}")
        for i in sorted(polygon.ghost_facets):
            print(f"{i}: {polygon.halfspaces[i]}  # ghost")
        return
    if args.out is None:
        print(dumps(polygon))
    else:
        write_json(polygon, args.out)


def _format_parameter(value) -> str:
    if isinstance(value, tuple):
        return ",".join(format_rational(v) for v in value)
    return format_rational(value)


def _hj(args: argparse.Namespace):
    cf = hj_expand(args.n, args.m)
    terms = ",".join(str(term) for term in cf.terms)
    conormals = ",".join(str(eta) for eta in conormal_chain(cf))
    print(f"E = [{terms}]; conormals = {conormals}")


def _classify(args: argparse.Namespace):
    polygon = parse_polygon(args.polygon)
    verdict = classify_point(polygon, Vector(*args.point), search_config(args))
    if args.out is None:
        print(dumps(verdict))
    else:
        write_json(verdict, args.out)


def _grid(args: argparse.Namespace):
    polygon = parse_polygon(args.polygon)
    grid = classify_grid(polygon, tuple(args.bbox), args.res, search_config(args), workers=args.workers)
    write_json(grid, args.out)


def _render(args: argparse.Namespace):
    grid = parse_grid(args.grid)
    write_svg(grid, args.out, RenderStyle(scale=args.scale, legend=not args.no_legend))


def _plot(args: argparse.Namespace):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from .plotting import plot_grid

    grid = parse_grid(args.grid)
    ax = plot_grid(grid)
    ax.figure.savefig(args.out, bbox_inches="tight")
    plt.close(ax.figure)


def _verify(args: argparse.Namespace):
    polygon = parse_polygon(args.polygon)
    certificate = parse_certificate(args.cert, polygon)
    verify_certificate(polygon, certificate)
    print("ok")


def _audit(args: argparse.Namespace):
    report = consistency_audit(parse_grid(args.grid))
    for classification, count in report.counts.items():
        print(f"{classification.value} {count} {format_rational(report.areas[classification])}")
    print(f"verified {report.verified}")


COMMANDS = {
    "scenario": _scenario,
    "hj": _hj,
    "classify": _classify,
    "grid": _grid,
    "render": _render,
    "plot": _plot,
    "verify-certificate": _verify,
    "audit": _audit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs the command line.

    Returns:
        0 on success, 1 on a usage error, 2 when an input fails validation, a certificate does
        not verify, or an audit fails.
    """
    if argv is None:
        argv = sys.argv[1:]

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_OK if e.code in (None, 0) else EXIT_USAGE

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        COMMANDS[args.command](args)
    except ValueError as e:
        print(f"error: {type(e).__name__}: {' '.join(str(e).split())}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK
