"""Command-line entry point: ``uwisac <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .config import SystemConfig, load_config
from .errors import ConfigError


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _orders(text: str) -> list[int]:
    try:
        v = [int(x) for x in text.split(",")]
    except ValueError:
        v = []
    if len(v) != 3 or min(v) < 1:
        raise argparse.ArgumentTypeError("expected N1,N2,N3 with each >= 1")
    return v


def _build_config(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig.from_dict()
    changes = {}
    if args.seed is not None:
        changes["simulation__seed"] = args.seed
    if args.trials is not None:
        changes["simulation__mse_trials"] = args.trials
        changes["simulation__rate_trials"] = args.trials
    if args.quadrature is not None:
        changes["simulation__quadrature_orders"] = args.quadrature
    if args.workers is not None:
        changes["simulation__workers"] = args.workers
    return cfg.replace(**changes) if changes else cfg


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML scenario file (defaults when omitted)")
    p.add_argument("--seed", type=int, help="override simulation.seed")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point (MSE and rate)")
    p.add_argument("--quadrature", type=_orders, metavar="N1,N2,N3",
                   help="rate quadrature orders")
    p.add_argument("--workers", type=int, help="processes for Monte Carlo blocks")


def _output(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-montecarlo", action="store_true", help="analytic results only")
    p.add_argument("--mse-method", choices=("linearized", "determinant"), default="linearized",
                   help="closed-form MSE variant")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwisac", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per point")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="analytic and Monte Carlo results at one point")
    _common(p)
    _output(p)
    for name, default in (("sweep-power", "P_DL in watts"), ("sweep-spacing", "spacing in metres"),
                          ("sweep-alpha", "harvest fractions")):
        p = sub.add_parser(name, help=f"sweep over {default}")
        _common(p)
        _output(p)
        p.add_argument("--grid", type=_floats, help=f"comma-separated {default}")

    p = sub.add_parser("validate-config", help="check a scenario file and print its hash")
    _common(p)
    return parser


_SWEEPS = {
    "sweep-power": harness.sweep_power,
    "sweep-spacing": harness.sweep_spacing,
    "sweep-alpha": harness.sweep_alpha,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate-config":
        print(f"ok config_hash={cfg.config_hash()} seed={cfg.seed}")
        return 0

    kw = dict(montecarlo=not args.no_montecarlo, mse_method=args.mse_method)
    if args.command == "simulate":
        result = harness.simulate(cfg, **kw)
    else:
        sweep = _SWEEPS[args.command]
        try:
            result = sweep(cfg, args.grid, **kw) if args.grid else sweep(cfg, **kw)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2

    if args.out:
        harness.emit_results(result, args.out, args.format)
    else:
        sys.stdout.write(harness.to_csv(result) if args.format == "csv" else harness.to_json(result) + "\n")
    return 1 if result.metadata["errors"] else 0


if __name__ == "__main__":
    sys.exit(main())
