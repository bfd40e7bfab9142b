"""Command line entry point: ``windbias {simulate,validate,sweep-distance,synthetic,full}``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import biascorr, grid
from .config import ConfigError, RunConfig, load_config
from .io import IngestError
from .pipeline import DegradationError, run_full, run_simulate, run_sweep_distance, run_validate
from .synthetic import run_synthetic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGRADED = 3

log = logging.getLogger("windbias")


def _apply_method(cfg: RunConfig, name: str):
    if "/" in name:
        interp, bc = name.split("/", 1)
        cfg.interpolation, cfg.biascorr = [interp], [bc]
    elif name in grid.METHODS:
        cfg.interpolation = [name]
    elif name in biascorr.METHODS:
        cfg.biascorr = [name]
    else:
        raise ConfigError(f"--method: unknown method {name!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="windbias", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("simulate", "simulate park and regional generation"),
        ("validate", "compare simulated with observed generation"),
        ("sweep-distance", "repeat station mean correction over distance limits"),
        ("synthetic", "write a synthetic input bundle with known truth"),
        ("full", "simulate, validate and sweep in one run"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=name != "synthetic", help="config file (key = value)")
        sp.add_argument("--method", help="override: interpolation name, biascorr name, or interp/biascorr")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.method:
            _apply_method(cfg, args.method)
        if args.out:
            cfg.out_dir = args.out
        if args.command == "synthetic":
            path = run_synthetic(cfg)
            print(path)
            return EXIT_OK
        if args.command == "simulate":
            run_simulate(cfg)
        elif args.command == "validate":
            cfg.validate()
            run_validate(cfg)
        elif args.command == "sweep-distance":
            run_sweep_distance(cfg)
        elif args.command == "full":
            run_full(cfg)
    except (ConfigError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegradationError as exc:
        print(f"degraded: {exc}", file=sys.stderr)
        return EXIT_DEGRADED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
