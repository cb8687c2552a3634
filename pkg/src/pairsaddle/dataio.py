"""Delimited dataset files.

Datasets are comma-separated numeric text: row samples as ``n x q`` tables,
series as a single column, lattice fields as ``q x q`` tables.  An optional
single header line is skipped when its first field is not numeric.  Writing
uses 17 significant digits so values round-trip exactly through float64.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ParseError

__all__ = ["load_dataset", "store_dataset"]

DATASET_KINDS = ("rows", "series", "field")


def _parse_lines(lines, path):
    table = []
    expected = None
    for lineno, raw in lines:
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        fields = [f.strip() for f in text.split(",")]
        row = []
        for col, fieldtext in enumerate(fields, start=1):
            try:
                row.append(float(fieldtext))
            except ValueError:
                if not table and col == 1:
                    row = None  # header line
                    break
                raise ParseError(
                    f"could not parse {fieldtext!r} as a number in {path}",
                    line=lineno,
                    column=col,
                ) from None
        if row is None:
            continue
        if expected is None:
            expected = len(row)
        elif len(row) != expected:
            raise ParseError(
                f"expected {expected} fields but found {len(row)} in {path}",
                line=lineno,
            )
        table.append(row)
    if not table:
        raise ParseError(f"no data rows in {path}")
    return np.asarray(table, dtype=float)


def load_dataset(path, kind):
    """Read a dataset of the given kind (``rows``, ``series`` or ``field``)."""
    if kind not in DATASET_KINDS:
        raise DomainError(f"unknown dataset kind {kind!r}; expected one of {DATASET_KINDS}")
    with open(path, "r", encoding="utf-8") as handle:
        table = _parse_lines(enumerate(handle, start=1), path)
    if kind == "series":
        if table.shape[1] != 1:
            raise ParseError(f"series file must have one column, found {table.shape[1]} in {path}")
        return table[:, 0]
    if kind == "field" and table.shape[0] != table.shape[1]:
        raise ParseError(
            f"lattice field must be square, found {table.shape[0]} x {table.shape[1]} in {path}"
        )
    return table


def store_dataset(path, data):
    """Write a dataset (1-d data becomes a single column)."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError(f"dataset must be 1-d or 2-d, got shape {arr.shape}")
    with open(path, "w", encoding="utf-8") as handle:
        for row in arr:
            handle.write(",".join(format(v, ".17g") for v in row))
            handle.write("\n")
