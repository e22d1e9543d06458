"""Result tables and their CSV form.

File layout: a ``# meta: {json}`` line, a header line, then one line per
row. Numbers are written with 17 significant digits so a write/read cycle
reproduces every double exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ColumnMissing

META_PREFIX = "# meta: "
# columns holding labels rather than numbers
TEXT_COLUMNS = frozenset({"method", "warnings"})


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    x = float(v)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise ValueError(f"duplicate column names in {self.columns}")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row of length {len(r)} in a table with {len(self.columns)} columns")

    def append(self, row: Sequence) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row of length {len(row)} in a table with {len(self.columns)} columns")
        self.rows.append(list(row))

    def __len__(self) -> int:
        return len(self.rows)

    def index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise ColumnMissing(f"no column {name!r}; have {self.columns}") from None

    def column(self, name: str) -> np.ndarray:
        k = self.index(name)
        vals = [r[k] for r in self.rows]
        if name in TEXT_COLUMNS:
            return np.array(vals, dtype=object)
        return np.array(vals, dtype=float)

    def where(self, **match) -> "ResultTable":
        """Rows whose columns equal the given values."""
        keys = [(self.index(k), v) for k, v in match.items()]
        rows = [r for r in self.rows if all(r[k] == v for k, v in keys)]
        return ResultTable(list(self.columns), rows, dict(self.meta))

    # -- CSV ---------------------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(META_PREFIX + json.dumps(self.meta, sort_keys=True, separators=(",", ":")) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        lines = text.splitlines()
        meta = {}
        if lines and lines[0].startswith(META_PREFIX):
            meta = json.loads(lines[0][len(META_PREFIX):])
            lines = lines[1:]
        reader = csv.reader(lines)
        columns = next(reader)
        text_idx = {i for i, c in enumerate(columns) if c in TEXT_COLUMNS}
        rows = [[v if i in text_idx else float(v) for i, v in enumerate(rec)] for rec in reader if rec]
        return cls(columns, rows, meta)

    @classmethod
    def read(cls, path) -> "ResultTable":
        return cls.from_csv(Path(path).read_text())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultTable):
            return NotImplemented
        if self.columns != other.columns or self.meta != other.meta or len(self) != len(other):
            return False
        for a, b in zip(self.rows, other.rows):
            for x, y in zip(a, b):
                if isinstance(x, str) or isinstance(y, str):
                    if x != y:
                        return False
                elif not (float(x) == float(y) or (math.isnan(x) and math.isnan(y))):
                    return False
        return True
