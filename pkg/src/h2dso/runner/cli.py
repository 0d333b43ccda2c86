"""Command line: ``h2dso {run,sweep-h2,gen-profiles,validate}``.

Exit status 0 on success, 1 for configuration or input errors, 2 when a
case fails to solve or a written schedule fails re-validation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..metrics import CAPEX_RATE, E_SPEC
from .config import ConfigError, load_manifest
from .core import EXIT_CONFIG, EXIT_OK, run, sweep_h2, validate, write_profiles, write_sweep


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _manifest_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", type=Path, help="YAML run manifest")
    p.add_argument("--case", action="append", dest="cases", metavar="ID",
                   help="case id to run (repeatable; default: manifest selection or all)")
    p.add_argument("--seed", type=int, help="seed for synthetic profiles")
    p.add_argument("--network-mode", choices=("full", "copperplate"))
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--horizon", type=int, help="hours to optimise (default 336, or 72 in full mode)")
    p.add_argument("--workers", type=int, help="cases solved in parallel")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h2dso", description="Feeder case studies, H2 cost sweeps and synthetic profiles.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="solve case studies and write reports")
    _manifest_args(p)

    p = sub.add_parser("validate", help="check a manifest and re-check written schedules")
    _manifest_args(p)

    p = sub.add_parser("sweep-h2", help="H2 cost over electrolyser capex and PV LCOE grids")
    p.add_argument("--ez-capex", type=_floats, default=_floats("50,75,100,125,150,175,200,250"))
    p.add_argument("--pv-lcoe", type=_floats, default=_floats("8,9,10,11,12,13"))
    p.add_argument("--compressor", action="store_true", help="add compressor capex")
    p.add_argument("--comp-capex", type=float, default=148.0)
    p.add_argument("--e-spec", type=float, default=E_SPEC)
    p.add_argument("--capex-rate", type=float, default=CAPEX_RATE)
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("gen-profiles", help="write seeded synthetic load/PV profiles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penetration", type=float, default=1.2)
    p.add_argument("--out", type=Path, default=Path("."))
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.verb in ("run", "validate"):
            manifest = load_manifest(args.manifest, cases=args.cases, seed=args.seed,
                                     network_mode=args.network_mode, out_dir=args.out,
                                     horizon=args.horizon, workers=args.workers)
            outcome = (run if args.verb == "run" else validate)(manifest)
            for name, msg in outcome.failures.items():
                print(f"error [{name}]: {msg}", file=sys.stderr)
            if args.verb == "run" and outcome.reports:
                print(f"wrote {len(outcome.reports)} case report(s) to {manifest.out_dir}")
            elif args.verb == "validate" and outcome.status == EXIT_OK:
                print(f"ok: manifest valid, {len(outcome.files)} schedule(s) re-checked")
            return outcome.status
        if args.verb == "sweep-h2":
            try:
                sw = sweep_h2(args.ez_capex, args.pv_lcoe, args.compressor, args.comp_capex,
                              args.e_spec, args.capex_rate)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            args.out.mkdir(parents=True, exist_ok=True)
            path = args.out / f"h2_sweep_{'compressor' if args.compressor else 'electrolyzer'}.csv"
            write_sweep(path, sw)
            print(f"wrote {path}")
            return EXIT_OK
        if args.verb == "gen-profiles":
            if args.penetration <= 0:
                raise ConfigError("penetration must be positive")
            args.out.mkdir(parents=True, exist_ok=True)
            path = args.out / f"profiles_seed{args.seed}.csv"
            write_profiles(path, args.seed, args.penetration)
            print(f"wrote {path}")
            return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG
