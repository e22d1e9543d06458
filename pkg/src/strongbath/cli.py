"""Command-line front end.

    strongbath spectrum      --config cfg.json [--lambda 0,0.5,1] [--out spec.csv]
    strongbath steady-sweep  --config cfg.json [--temp 1,2,4] [--method rc,eff] [--levels 50]
    strongbath dynamics      --config cfg.json [--lambda 2.5] [--out run.csv]
    strongbath plot          --table run.csv --x t --y rc_sz1,eff_sz1 --y rc_sz2 --out run.svg

Exit status: 0 on success, 2 for configuration errors, 3 for solver failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, plotting, scenarios
from .config import RunConfig, load_config
from .errors import ColumnMissing, ConfigInvalid, StrongBathError
from .tables import ResultTable

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("strongbath")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strongbath", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, scen in (("spectrum", "spectrum"), ("steady-sweep", "steady-sweep"), ("dynamics", "dynamics")):
        sp = sub.add_parser(name, help=f"run a {scen} scenario")
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--lambda", dest="lam", type=_floats, help="coupling value or comma list")
        sp.add_argument("--temp", type=_floats, help="temperature or comma list")
        sp.add_argument("--levels", type=int, help="RC truncation M")
        sp.add_argument("--method", type=_names, help="comma list from rc, eff, weak")
        sp.add_argument("--out", type=Path, help="CSV output path")
        sp.add_argument("--svg", type=Path, help="SVG output path")
        sp.add_argument("--workers", type=int, help="worker processes (default: STRONGBATH_THREADS or all cores)")
        sp.set_defaults(scenario=scen)

    pp = sub.add_parser("plot", help="plot columns of a result CSV")
    pp.add_argument("--table", required=True, type=Path)
    pp.add_argument("--x", required=True)
    pp.add_argument("--y", type=_names, action="append", required=True,
                    help="comma list of columns; repeat for stacked panels")
    pp.add_argument("--group-by", type=_names, default=[])
    pp.add_argument("--period", type=float, help="draw markers at multiples of this period")
    pp.add_argument("--out", required=True, type=Path)
    return p


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config)
    accepted = ("dynamics", "sweep-dynamics") if args.scenario == "dynamics" else (args.scenario,)
    if cfg.scenario not in accepted:
        raise ConfigInvalid(f"config {args.config} describes {cfg.scenario!r}, not {args.scenario!r}")
    scenario = cfg.scenario
    if scenario == "dynamics" and any(v is not None and len(v) > 1 for v in (args.lam, args.temp)):
        scenario = "sweep-dynamics"
    return cfg.with_overrides(
        scenario=scenario,
        lambdas=args.lam,
        temperatures=args.temp,
        M=args.levels,
        methods=args.method,
        output_csv=None if args.out is None else str(args.out),
        output_svg=None if args.svg is None else str(args.svg),
    )


def _plot(args) -> None:
    table = ResultTable.read(args.table)
    markers = []
    if args.period:
        markers = plotting.period_markers(args.period, float(max(table.column(args.x))))
    plotting.emit_plot(table, args.x, panels=args.y, out=args.out,
                       group_by=args.group_by, markers=markers)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            _plot(args)
            return EXIT_OK
        cfg = _config_from_args(args)
        table = scenarios.execute(cfg, workers=args.workers)
        if not cfg.output_csv:
            sys.stdout.write(table.to_csv())
    except (ConfigInvalid, ColumnMissing, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StrongBathError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
