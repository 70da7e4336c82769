"""CSV loading with schema validation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """The CSV does not carry the columns a figure needs."""


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV, figure kind, value column, output path."""

    input_path: Path
    kind: str                      # "bounds" | "heatmap"
    value_column: str | None = None
    output_path: Path | None = None
    vmin: float | None = None
    vmax: float | None = None

    def resolve_output(self, suffix: str) -> Path:
        if self.output_path is not None:
            return self.output_path
        return self.input_path.with_name(self.input_path.stem + suffix)


def read_csv_columns(path, required: tuple[str, ...]) -> dict[str, list[float]]:
    """Read a CSV into float columns, requiring at least `required`."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SchemaError(f"{path} has no data rows")
    missing = [c for c in required if c not in rows[0]]
    if missing:
        raise SchemaError(f"{path} is missing columns {missing}; found {sorted(rows[0])}")
    out: dict[str, list[float]] = {c: [] for c in required}
    for row in rows:
        for c in required:
            out[c].append(float(row[c]))
    return out
