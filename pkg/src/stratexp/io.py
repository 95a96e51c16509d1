"""CSV/JSON writers. Files are written to a temporary sibling and renamed."""

from __future__ import annotations

import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

SCHEMA_VERSION = "1"

COEFF_HEADER = ("j1", "j2", "c")
SAMPLE_HEADER = ("seed", "i1", "i2", "p1", "p2", "stratonovich", "ito")
ERROR_HEADER = ("p1", "p2", "proj_error_sq", "diag_integral", "ms_exact_offdiag", "ms_bound_equal")
TRACE_HEADER = ("p", "partial_sum", "target", "gap")
GRID_HEADER = ("x1", "x2", "r")
SWEEP_HEADER = ("p1", "p2", "i1", "i2", "mean_sq_diff", "stderr", "theory", "theory_is_bound",
                "n_half_estimate", "bias_shift", "bias_flag")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def coeff_rows(values: np.ndarray):
    for j1 in range(values.shape[0]):
        for j2 in range(values.shape[1]):
            yield j1, j2, values[j1, j2]


def read_coeff_csv(path) -> np.ndarray:
    """Inverse of the coefficient CSV export: ``values[j1, j2]``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    j1 = data[:, 0].astype(int)
    j2 = data[:, 1].astype(int)
    out = np.zeros((j1.max() + 1, j2.max() + 1))
    out[j1, j2] = data[:, 2]
    return out


def write_output(path: Optional[str], text: str, meta: Optional[dict] = None, stream=None) -> None:
    """Write ``text`` to ``path`` (or ``stream``); ``meta`` goes to ``<path>.meta.json``."""
    if path is None:
        (stream or _stdout()).write(text)
        return
    atomic_write(path, text)
    if meta is not None:
        atomic_write(str(path) + ".meta.json", json_text(meta))


def _stdout():
    import sys

    return sys.stdout
