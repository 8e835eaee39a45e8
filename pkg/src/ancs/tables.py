"""Result tables: the sweep-row schema and CSV/JSON emission.

One row summarizes one (scenario, sampler, estimator) cell of a sweep.
Floats are written with ``repr`` so values round-trip exactly and two runs
of the same experiment produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

__all__ = ["SweepRow", "CSV_HEADER", "emit", "emit_csv", "emit_json", "parse", "parse_csv"]

CSV_HEADER = (
    "scenario_id",
    "swept_param",
    "swept_value",
    "sampler",
    "estimator",
    "trials",
    "tnmse_lin",
    "tnmse_db",
    "roi_tnmse_db",
    "nonroi_tnmse_db",
    "stderr_lin",
)


@dataclass(frozen=True)
class SweepRow:
    """One aggregated result cell, mirroring the CSV schema exactly."""

    scenario_id: str
    swept_param: str
    swept_value: float
    sampler: str
    estimator: str
    trials: int
    tnmse_lin: float
    tnmse_db: float
    roi_tnmse_db: float
    nonroi_tnmse_db: float
    stderr_lin: float

    def __eq__(self, other) -> bool:
        # Field-wise equality with nan == nan, so parse(emit(rows)) == rows
        # holds even for columns that are undefined in a given scenario.
        if not isinstance(other, SweepRow):
            return NotImplemented
        for f in fields(self):
            a = getattr(self, f.name)
            b = getattr(other, f.name)
            if isinstance(a, float) and isinstance(b, float):
                if math.isnan(a) and math.isnan(b):
                    continue
            if a != b:
                return False
        return True


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_format_cell(getattr(row, name)) for name in CSV_HEADER])
    return buf.getvalue()


def emit_json(rows: list[SweepRow]) -> str:
    payload = [asdict(row) for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def emit(rows: list[SweepRow], path: str, fmt: str = "csv") -> None:
    """Write rows to path. I/O problems are re-raised with the path named."""
    if fmt == "csv":
        text = emit_csv(rows)
    elif fmt == "json":
        text = emit_json(rows)
    else:
        raise ValueError(f"unknown format {fmt!r} (expected 'csv' or 'json')")
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path!r}: {exc}") from exc


def parse_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise ValueError("empty results file: missing header") from None
    if header != CSV_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    rows = []
    for cells in reader:
        if not cells:
            continue
        rec = dict(zip(CSV_HEADER, cells))
        rows.append(
            SweepRow(
                scenario_id=rec["scenario_id"],
                swept_param=rec["swept_param"],
                swept_value=float(rec["swept_value"]),
                sampler=rec["sampler"],
                estimator=rec["estimator"],
                trials=int(rec["trials"]),
                tnmse_lin=float(rec["tnmse_lin"]),
                tnmse_db=float(rec["tnmse_db"]),
                roi_tnmse_db=float(rec["roi_tnmse_db"]),
                nonroi_tnmse_db=float(rec["nonroi_tnmse_db"]),
                stderr_lin=float(rec["stderr_lin"]),
            )
        )
    return rows


def parse(path: str) -> list[SweepRow]:
    """Read a CSV results file back into rows."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            return parse_csv(handle.read())
    except OSError as exc:
        raise OSError(f"cannot read results from {path!r}: {exc}") from exc
