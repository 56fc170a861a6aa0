"""Experiment reports and their CSV / JSON serialisation.

CSV numbers are written with 17 significant digits, LF line endings and no
locale dependence; JSON keys are sorted so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np


@dataclass
class Table:
    """Named columns and rows, written to ``<name>.csv``."""

    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"table {self.name!r} expects {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]


@dataclass
class Check:
    """A tolerance check; failures drive exit code 3."""

    name: str
    value: float
    tolerance: float
    passed: bool
    comparison: str = "<="
    context: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    tables: list[Table] = field(default_factory=list)
    scalars: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def check(self, name: str, value: float, tolerance: float, comparison: str = "<=", **context) -> Check:
        value = float(value)
        if comparison == "<=":
            ok = value <= tolerance
        elif comparison == ">=":
            ok = value >= tolerance
        elif comparison == ">":
            ok = value > tolerance
        else:
            raise ValueError(f"unknown comparison {comparison!r}")
        c = Check(name, value, float(tolerance), bool(ok), comparison, context)
        self.checks.append(c)
        return c

    @property
    def failed_checks(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "scalars": self.scalars,
            "checks": [vars(c) for c in self.checks],
            "tables": {t.name: {"columns": t.columns, "rows": t.rows} for t in self.tables},
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            kind=data["kind"],
            config=data["config"],
            tables=[Table(name, t["columns"], t["rows"]) for name, t in data["tables"].items()],
            scalars=data["scalars"],
            checks=[Check(**c) for c in data["checks"]],
            metadata=data["metadata"],
        )


def _plain(value):
    """Convert numpy scalars / arrays / tuples into JSON-native values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def to_json(report: ExperimentReport) -> str:
    return json.dumps(_plain(report.to_dict()), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def emit_csv(table: Table, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([format_cell(v) for v in row])
    except OSError as exc:
        raise OSError(f"could not write {path}: {exc}") from exc
    return path


def write_report(report: ExperimentReport, outdir) -> list[Path]:
    """``report.json`` plus one CSV per table; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for table in report.tables:
        written.append(emit_csv(table, outdir / f"{table.name}.csv"))
    json_path = outdir / "report.json"
    json_path.write_text(to_json(report), encoding="utf-8", newline="\n")
    written.append(json_path)
    return written


def read_report(path) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def sorted_rows(rows: Sequence[Sequence], keys: Sequence[int]) -> list[list]:
    return sorted((list(r) for r in rows), key=lambda r: tuple(r[k] for k in keys))
