"""CSV/JSON serialization helpers shared by the engines and the CLI.

All floats are written with 17 significant digits so that outputs
round-trip exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def fmt_float(x) -> str:
    """Format a float with 17 significant digits (shortest exact form not
    required; fixed precision keeps files byte-stable across runs)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def read_csv_columns(path) -> dict:
    """Read a CSV with a header row into {name: list-of-strings}."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty CSV file: {path}") from None
        cols = {name: [] for name in header}
        for row in reader:
            if not row:
                continue
            for name, value in zip(header, row):
                cols[name].append(value)
    return cols


def numeric_column(cols: dict, name: str, path="<csv>"):
    import numpy as np

    if name not in cols:
        raise KeyError(
            f"column '{name}' not found in {path}; available: {sorted(cols)}"
        )
    return np.asarray([float(v) for v in cols[name]])


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def canonical_json(obj) -> str:
    """Deterministic JSON used for hashing plans and journal records."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
