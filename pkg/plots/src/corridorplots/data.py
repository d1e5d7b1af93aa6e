"""CSV loading, column checks, and row filtering shared by every figure."""

from __future__ import annotations

import csv
from pathlib import Path

Row = dict[str, str]


class PlotDataError(ValueError):
    """Bad inputs: missing files/columns, or a filter selecting nothing."""


def read_csv(path: str | Path) -> tuple[list[str], list[Row]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PlotDataError(f"{path}: empty file")
        return list(reader.fieldnames), list(reader)


def read_many(paths: list[str | Path]) -> tuple[list[str], list[Row]]:
    """Concatenate CSVs; headers must agree exactly."""
    header: list[str] | None = None
    rows: list[Row] = []
    for p in paths:
        h, r = read_csv(p)
        if header is None:
            header = h
        elif h != header:
            raise PlotDataError(f"{p}: header {h} does not match first "
                                f"input's {header}")
        rows.extend(r)
    assert header is not None
    return header, rows


def require_columns(header: list[str], needed: tuple[str, ...],
                    what: str) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise PlotDataError(f"{what} needs columns {missing}, input has "
                            f"{header}")


def _matches(cell: str, want: str) -> bool:
    if cell == want:
        return True
    try:  # 0.10 should match the %g-formatted "0.1"
        return float(cell) == float(want)
    except ValueError:
        return False


def apply_filters(rows: list[Row], header: list[str],
                  filters: list[tuple[str, str]]) -> list[Row]:
    for key, val in filters:
        if key not in header:
            raise PlotDataError(f"filter {key}={val}: no column {key!r} "
                                f"(columns: {', '.join(header)})")
    out = [r for r in rows
           if all(_matches(r[k], v) for k, v in filters)]
    if not out:
        shown = " ".join(f"{k}={v}" for k, v in filters)
        raise PlotDataError(f"no rows match filter {shown or '(none)'}")
    return out
