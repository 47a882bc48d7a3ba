"""Command-line entry points.

Subcommands: eigen, run, scan, thermal, check, export. Every subcommand takes
a YAML configuration file; the subcommand overrides the configured job type.
Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 convergence-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (ConfigError, CurveDomainError, NumericalError,
                     RovibError, SpectralWindowError, TableFormatError)
from .runner import RunConfig, load_config, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONVERGENCE = 4

JOB_OVERRIDES = {
    "eigen": "eigen",
    "run": None,          # honour the configured job type
    "scan": None,         # nu0_scan or intensity_scan from the config
    "thermal": "thermal",
    "check": "convergence_check",
    "export": "export",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rovib",
        description="Ro-vibrational dynamics of a diatomic in laser pulses")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("eigen", "build/cache the eigen library and export level tables"),
            ("run", "run the configured job (single propagation by default)"),
            ("scan", "run a nu0 or intensity scan"),
            ("thermal", "run a thermal-ensemble job"),
            ("check", "convergence check: refine grid, basis and step"),
            ("export", "export pulse profile and spectrum tables")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", required=True,
                       help="YAML configuration file")
        p.add_argument("--output-dir", help="override the output directory")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    raw = dict(config.raw)
    if args.output_dir:
        raw["output_dir"] = args.output_dir
    override = JOB_OVERRIDES.get(args.command)
    if override:
        raw.setdefault("job", {})
        raw["job"] = dict(raw["job"] or {})
        raw["job"]["type"] = override
    if args.command == "scan":
        job = dict(raw.get("job") or {})
        if job.get("type") not in ("nu0_scan", "intensity_scan"):
            job["type"] = "nu0_scan"
        raw["job"] = job
    return RunConfig(raw=raw, path=config.path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        manifest = run(config)
    except (ConfigError, TableFormatError, CurveDomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SpectralWindowError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RovibError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(json.dumps(manifest.data.get("results", {}), indent=2,
                     sort_keys=True))
    if args.command == "check" and not manifest.data["results"].get("passed"):
        print("convergence check FAILED", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
