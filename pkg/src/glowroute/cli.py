"""Command-line entry points.

Exit codes: 0 success, 1 routing failure, 2 input error, 3 solver timeout.
Failures print a JSON error block on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bench import derive_netlist, gen_thermal
from .flow import finish, prepare, route_prepared
from .glow import SolverTimeout, build_ilp
from .ilp import export_lp
from .ingest import (Config, ParseError, parse_config, parse_netlist, parse_thermal,
                     write_netlist, write_report, write_thermal)
from .oil import ModelError
from .placement import PlacementError
from .power import RoutingError

EXIT_OK, EXIT_ROUTING, EXIT_INPUT, EXIT_TIMEOUT = 0, 1, 2, 3

log = logging.getLogger("glowroute")


class InputError(Exception):
    def __init__(self, message: str, locus: dict | None = None):
        super().__init__(message)
        self.locus = locus or {}


def _error(kind: str, message: str, **fields) -> None:
    doc = {"error": {"kind": kind, "message": message, **fields}}
    sys.stderr.write(json.dumps(doc, indent=2) + "\n")


def _read(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {what} file: {exc.strerror}",
                         {"source": path, "line": 0, "column": 0}) from exc


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load(args):
    try:
        netlist = parse_netlist(_read(args.netlist, "netlist"), args.netlist)
        thermal = parse_thermal(_read(args.thermal, "thermal"), args.thermal)
        cfg = parse_config(_read(args.config, "config"), args.config) if args.config else Config()
    except ParseError as exc:
        raise InputError(exc.message, exc.locus()) from exc
    except ModelError as exc:
        raise InputError(str(exc), {"source": args.config or "", "line": 0, "column": 0}) from exc
    return netlist, thermal, cfg


def _prepare(netlist, thermal, cfg):
    try:
        return prepare(netlist, thermal, cfg)
    except ParseError as exc:
        raise InputError(exc.message, exc.locus()) from exc


def cmd_route(args) -> int:
    netlist, thermal, cfg = _load(args)
    if args.export_lp and args.algo != "glow":
        raise InputError("--export-lp needs --algo glow")
    prepared = _prepare(netlist, thermal, cfg)
    code = EXIT_OK
    try:
        flow = route_prepared(args.algo, *prepared, thermal, cfg, args.time_limit)
    except SolverTimeout as exc:
        if exc.result is None:
            _error("timeout", str(exc))
            return EXIT_TIMEOUT
        flow = finish(args.algo, *prepared[:3], exc.result, thermal, cfg)
        _error("timeout", str(exc), incumbent_p_total=flow.report.p_total)
        code = EXIT_TIMEOUT
    if args.export_lp and flow.route is not None:
        g = build_ilp(flow.route.plan, flow.onet, flow.route.accesses, cfg.models, thermal)
        Path(args.export_lp).write_text(export_lp(g.model))
    _emit(write_report(flow.report, flow.summary()), args.out)
    if args.plot:
        from .plotting import plot_layout
        plot_layout(flow, thermal, args.plot)
    return code


def cmd_compare(args) -> int:
    netlist, thermal, cfg = _load(args)
    prepared = _prepare(netlist, thermal, cfg)
    flows = {algo: route_prepared(algo, *prepared, thermal, cfg, args.time_limit)
             for algo in ("cat", "glow")}
    cat, glow = flows["cat"].report.p_total, flows["glow"].report.p_total
    doc = {algo: json.loads(write_report(f.report, {"placement_revisions":
                                                    f.summary()["placement_revisions"]}))
           for algo, f in flows.items()}
    doc["power_reduction"] = (cat - glow) / cat if cat > 0 else 0.0
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if args.plot:
        from .plotting import plot_power
        plot_power({k.upper(): f.report for k, f in flows.items()}, args.plot)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    netlist, thermal, cfg = _load(args)
    _, onet, _, plan, accesses = _prepare(netlist, thermal, cfg)
    if plan is None:
        raise InputError("netlist has no optical links, nothing to export")
    g = build_ilp(plan, onet, accesses, cfg.models, thermal)
    _emit(export_lp(g.model), args.out)
    return EXIT_OK


def cmd_derive(args) -> int:
    if args.nets < 1:
        raise InputError("--nets must be at least 1")
    try:
        nl = derive_netlist(args.nets, args.chip_mm[0], args.chip_mm[1], args.seed,
                            args.pins_min, args.pins_max)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit(write_netlist(nl), args.out)
    return EXIT_OK


def cmd_gen_thermal(args) -> int:
    try:
        prof = gen_thermal(args.hotspots, args.peak, args.sigma, args.grid[0], args.grid[1],
                           args.tile_mm, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _emit(write_thermal(prof), args.out)
    return EXIT_OK


def _inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--netlist", required=True, help="netlist file")
    p.add_argument("--thermal", required=True, help="thermal grid file")
    p.add_argument("--config", help="key = value parameter file (defaults otherwise)")
    p.add_argument("--out", help="output path (stdout when omitted)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glowroute",
                                 description="Thermal-aware WDM waveguide global router")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="route a design and write a JSON report")
    _inputs(p)
    p.add_argument("--algo", choices=("cat", "glow"), default="glow")
    p.add_argument("--export-lp", metavar="PATH", help="write the final GLOW ILP in LP format")
    p.add_argument("--time-limit", type=float, metavar="S", help="ILP wall-clock limit")
    p.add_argument("--plot", metavar="PNG", help="render the routed layout")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("compare", help="route with CAT and GLOW on the same trunk plan")
    _inputs(p)
    p.add_argument("--time-limit", type=float, metavar="S")
    p.add_argument("--plot", metavar="PNG", help="render the power breakdown")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-lp", help="write the GLOW ILP for the initial trunk plan")
    _inputs(p)
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("derive", help="generate a clustered synthetic netlist")
    p.add_argument("--nets", type=int, required=True)
    p.add_argument("--chip-mm", type=float, nargs=2, metavar=("W", "H"), default=(20.0, 20.0))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pins-min", type=int, default=2)
    p.add_argument("--pins-max", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("gen-thermal", help="generate a Gaussian hotspot thermal grid")
    p.add_argument("--hotspots", type=int, default=3)
    p.add_argument("--peak", type=float, default=10.0, help="hotspot height in °C")
    p.add_argument("--sigma", type=float, default=2.0, help="hotspot radius in mm")
    p.add_argument("--grid", type=int, nargs=2, metavar=("COLS", "ROWS"), default=(20, 20))
    p.add_argument("--tile-mm", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_thermal)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        _error("input", str(exc), locus=exc.locus)
        return EXIT_INPUT
    except SolverTimeout as exc:
        _error("timeout", str(exc))
        return EXIT_TIMEOUT
    except (RoutingError, PlacementError) as exc:
        _error("routing", str(exc), links=list(getattr(exc, "links", []) or []))
        return EXIT_ROUTING


if __name__ == "__main__":
    sys.exit(main())
