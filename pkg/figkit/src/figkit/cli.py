"""Batch figure rendering driven by a JSON figure-spec file.

The spec file lists figure requests:

    {"figures": [
        {"kind": "alignment_trace",
         "inputs": {"series": "out/series.csv",
                    "rotor_series": "out/rotor_series.csv"},
         "output": "figs/alignment.png",
         "options": {"title": "ground state"}}
    ]}

Exit codes: 0 success, 2 spec/schema validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .render import FIGURE_KINDS, render
from .schemas import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="figkit",
        description="render paper-style figures from simulation CSV output")
    parser.add_argument("spec", help="JSON figure-spec file")
    parser.add_argument("--only", choices=FIGURE_KINDS,
                        help="render only requests of this kind")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    path = Path(args.spec)
    try:
        if not path.exists():
            raise SchemaError(f"spec file {path} does not exist")
        try:
            spec = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"spec file is not valid JSON: {exc}")
        figures = spec.get("figures")
        if not isinstance(figures, list) or not figures:
            raise SchemaError("spec must carry a non-empty 'figures' list")
        rendered = []
        for request in figures:
            if args.only and request.get("kind") != args.only:
                continue
            rendered.append(render(request))
    except SchemaError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    for out in rendered:
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
