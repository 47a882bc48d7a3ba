"""CSV schema definitions and strict validation.

Each figure kind consumes specific column sets; validation failures name the
offending column (and row, for value errors) so broken pipelines surface
immediately instead of producing silent nonsense plots.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

SCHEMAS = {
    "projections": ("t", "nu", "N", "re", "im", "weight"),
    "series": ("t", "norm", "cos2", "pdiss"),
    "rotor_series": ("t", "cos2"),
    "scan_summary": ("pulse", "peak", "nu0", "mean_rotation", "pdiss",
                     "v1", "v2", "final_norm"),
    "thermal": ("T", "N", "weight"),
    "distribution": ("key", "weight"),
}

TEXT_COLUMNS = {"pulse"}


class SchemaError(ValueError):
    """Input file does not conform to its declared schema."""


def read_table(path, schema: str) -> dict[str, np.ndarray]:
    """Load a CSV into column arrays after validating its header."""
    required = SCHEMAS[schema]
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty")
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{path} is missing required column(s) {missing} "
                f"for schema {schema!r}")
        index = {c: header.index(c) for c in required}
        columns: dict[str, list] = {c: [] for c in required}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            for c in required:
                value = row[index[c]]
                if c in TEXT_COLUMNS:
                    columns[c].append(value)
                    continue
                try:
                    columns[c].append(float(value))
                except ValueError:
                    raise SchemaError(
                        f"{path}: column {c!r} has non-numeric value "
                        f"{value!r} at row {row_no}")
    out = {}
    for c in required:
        if c in TEXT_COLUMNS:
            out[c] = np.array(columns[c], dtype=object)
        else:
            out[c] = np.asarray(columns[c], dtype=float)
    n_rows = {len(v) for v in out.values()}
    if n_rows == {0}:
        raise SchemaError(f"{path} has a header but no data rows")
    return out
