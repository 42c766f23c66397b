"""Rectangular result tables and their CSV form.

Layout: a header row of column names, a row of unit labels, data rows with
every real printed as ``%.17g`` (enough digits for an exact round trip),
then ``#``-prefixed metadata and comment lines.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ResultTable", "format_real", "parse_real"]


def format_real(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def parse_real(s: str) -> float:
    return float(s)


@dataclass
class ResultTable:
    columns: list
    units: list
    rows: np.ndarray
    metadata: list = field(default_factory=list)
    comments: list = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.columns):
            raise ValueError("rows must be a 2-D array with one entry per column")
        if len(self.units) != len(self.columns):
            raise ValueError("need one unit label per column")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def meta(self, key: str) -> str:
        for k, v in self.metadata:
            if k == key:
                return v
        raise KeyError(key)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.columns) + "\n")
        out.write(",".join(self.units) + "\n")
        for row in self.rows:
            out.write(",".join(format_real(v) for v in row) + "\n")
        for key, value in self.metadata:
            out.write(f"# {key} = {value}\n")
        for line in self.comments:
            out.write(f"#{line}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        lines = text.splitlines()
        body = [ln for ln in lines if not ln.startswith("#")]
        if len(body) < 2:
            raise ValueError("table needs a header and a units row")
        columns = body[0].split(",")
        units = body[1].split(",")
        rows = [[parse_real(s) for s in ln.split(",")] for ln in body[2:] if ln]
        metadata, comments = [], []
        for ln in lines:
            if ln.startswith("# ") and " = " in ln:
                k, v = ln[2:].split(" = ", 1)
                metadata.append((k, v))
            elif ln.startswith("#"):
                comments.append(ln[1:])
        arr = np.array(rows, dtype=float).reshape(len(rows), len(columns))
        return cls(columns, units, arr, metadata, comments)
