"""Deterministic JSON/CSV emission.

Floats are written in Python's shortest round-trip form, rationals as
``"p/q"`` strings, complex numbers as ``[re, im]`` pairs.  Dictionary keys
keep insertion order, so the field order is fixed by the producer and two
runs with identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .ncalg.scalar import Scalar, format_rational

REPORT_SCHEMA = "freesub.report.v1"


class EmitError(OSError):
    """Writing an artifact failed."""


def to_jsonable(x: Any) -> Any:
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, Scalar):
        return [format_rational(x.re), format_rational(x.im)]
    if isinstance(x, (float, np.floating)):
        f = float(x)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    if isinstance(x, (complex, np.complexfloating)):
        return [to_jsonable(x.real), to_jsonable(x.imag)]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, Mapping):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return to_jsonable(x.to_json())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_json(doc: Any) -> str:
    # json uses float.__repr__, which is the shortest round-trip decimal
    return json.dumps(to_jsonable(doc), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _cell(v: Any) -> str:
    v = to_jsonable(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def dumps_csv(columns: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_text(path: str | os.PathLike, text: str) -> Path:
    """Write atomically: a partial file never replaces a good one."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            tmp.unlink()
        except OSError:
            pass
        raise EmitError(str(exc)) from exc
    return path


def emit_report(doc: Mapping, fmt: str, path: str | os.PathLike,
                columns: Sequence[str] | None = None, rows: Iterable[Mapping] | None = None) -> Path:
    """Write ``doc`` as JSON, or ``rows`` under ``columns`` as CSV."""
    if fmt == "json":
        return write_text(path, dumps_json(doc))
    if fmt == "csv":
        if columns is None or rows is None:
            raise ValueError("CSV output needs columns and rows")
        return write_text(path, dumps_csv(columns, rows))
    raise ValueError(f"unknown format {fmt!r}")
