"""Plain-text CSV tables with deterministic, locale-independent formatting."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

FLOAT_FORMAT = "%.16e"  # 17 significant digits


@dataclass
class Table:
    """Column names, numeric rows and free-text comment lines.

    Comment lines are written first, each prefixed with ``# ``. They carry
    provenance (revision, parameter echo, axis choices) and never data.
    """

    columns: List[str]
    rows: List[Tuple[float, ...]]
    comments: List[str] = field(default_factory=list)

    def column(self, name: str) -> List[float]:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return FLOAT_FORMAT % x


def to_csv(table: Table) -> str:
    out = io.StringIO()
    for line in table.comments:
        for part in str(line).splitlines() or [""]:
            out.write(f"# {part}\n")
    out.write(",".join(table.columns) + "\n")
    for row in table.rows:
        if len(row) != len(table.columns):
            raise ValueError(f"row has {len(row)} values for {len(table.columns)} columns")
        out.write(",".join(format_value(v) for v in row) + "\n")
    return out.getvalue()


def write_csv(table: Table, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_csv(table))
    return path


def read_csv(text: str) -> Table:
    """Inverse of :func:`to_csv` (used by tests and downstream scripts)."""
    comments, lines = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            comments.append(line[2:] if line.startswith("# ") else line[1:])
        elif line:
            lines.append(line)
    columns = lines[0].split(",")
    rows = [tuple(float(v) for v in line.split(",")) for line in lines[1:]]
    return Table(columns=columns, rows=rows, comments=comments)


def merge_columns(key: str, parts: Sequence[Tuple[str, Table]], names: Sequence[str]) -> Table:
    """Join several tables sharing the ``key`` column, suffixing ``names``."""
    base = parts[0][1]
    columns = [key]
    data = [base.column(key)]
    for suffix, t in parts:
        if t.column(key) != data[0]:
            raise ValueError("tables do not share the same key column")
        for n in names:
            columns.append(f"{n}_{suffix}")
            data.append(t.column(n))
    rows = list(zip(*data))
    return Table(columns=columns, rows=rows)
