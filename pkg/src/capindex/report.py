"""Deterministic JSON and CSV encoding of index reports and sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

SCHEMA = 1
SIG_DIGITS = 12
CSV_HEADER = ("r", "mi_q", "typeI", "classification", "a", "b", "c")


def format_float(x):
    """Round to 12 significant digits; non-finite values become ``None``."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def to_jsonable(obj):
    """Plain JSON types with floats rounded; integers stay integers."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if hasattr(obj, "value"):
        return obj.value
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(payload):
    """``{"schema": 1, ...payload}`` as indented JSON with a trailing newline."""
    body = {"schema": SCHEMA}
    body.update(to_jsonable(payload))
    return json.dumps(body, indent=2, allow_nan=False) + "\n"


@dataclass(frozen=True)
class SweepRow:
    r: float
    mi_q: int
    typeI: int | None
    classification: str
    a: int | None
    b: int | None
    c: int | None

    def to_dict(self):
        return {k: getattr(self, k) for k in CSV_HEADER}


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(format_float(value))
    return str(value)


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        d = row.to_dict() if hasattr(row, "to_dict") else row
        writer.writerow([_csv_cell(d[k]) for k in CSV_HEADER])
    return buf.getvalue()


def _parse_int(text):
    return int(text) if text != "" else None


def csv_to_rows(text):
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(
            r=float(rec["r"]),
            mi_q=int(rec["mi_q"]),
            typeI=_parse_int(rec["typeI"]),
            classification=rec["classification"],
            a=_parse_int(rec["a"]),
            b=_parse_int(rec["b"]),
            c=_parse_int(rec["c"]),
        ))
    return rows


def json_to_rows(text):
    data = json.loads(text)
    return [SweepRow(**{k: rec[k] for k in CSV_HEADER}) for rec in data["rows"]]
