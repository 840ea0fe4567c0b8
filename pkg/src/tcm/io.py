"""
Field snapshots and CSV output.

A field block is the ASCII header ``TCMF v1 n=<N> kind=<real|vector>``
followed by the row-major float64 little-endian samples (two payloads,
x then y, for a vector field).  A state snapshot is the u, v and theta
blocks followed by one ``META`` line with t, alpha, eta, n, dt and scheme.
"""

from __future__ import annotations

import csv
import io
import re
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .solver import Params, State

MAGIC = "TCMF v1"
_HEADER = re.compile(r"^TCMF v1 n=(\d+) kind=(real|vector)$")
_DTYPE = np.dtype("<f8")


class FormatError(ValueError):
    pass


def write_field(fh: BinaryIO, f: np.ndarray) -> None:
    if f.ndim == 2:
        kind = "real"
    elif f.ndim == 3 and f.shape[0] == 2:
        kind = "vector"
    else:
        raise ValueError(f"cannot serialize array of shape {f.shape}")
    n = f.shape[-1]
    fh.write(f"{MAGIC} n={n} kind={kind}\n".encode("ascii"))
    fh.write(np.ascontiguousarray(f, dtype=_DTYPE).tobytes())


def read_field(fh: BinaryIO) -> np.ndarray:
    line = fh.readline().decode("ascii", errors="replace").rstrip("\n")
    m = _HEADER.match(line)
    if not m:
        raise FormatError(f"bad field header: {line!r}")
    n, kind = int(m.group(1)), m.group(2)
    shape = (n, n) if kind == "real" else (2, n, n)
    count = int(np.prod(shape))
    buf = fh.read(count * _DTYPE.itemsize)
    if len(buf) != count * _DTYPE.itemsize:
        raise FormatError("truncated field payload")
    return np.frombuffer(buf, dtype=_DTYPE).reshape(shape).astype(float)


def save_field(path, f: np.ndarray) -> None:
    with open(path, "wb") as fh:
        write_field(fh, f)


def load_field(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_field(fh)


def snapshot_bytes(x: State, p: Params) -> bytes:
    buf = io.BytesIO()
    for f in (x.u, x.v, x.theta):
        write_field(buf, f)
    meta = (f"META t={x.t!r} alpha={p.alpha!r} eta={p.eta!r} n={p.n} "
            f"dt={p.dt!r} scheme={p.scheme}\n")
    buf.write(meta.encode("ascii"))
    return buf.getvalue()


def save_snapshot(path, x: State, p: Params) -> None:
    Path(path).write_bytes(snapshot_bytes(x, p))


def parse_snapshot(data: bytes) -> tuple[State, dict]:
    fh = io.BytesIO(data)
    u, v, th = read_field(fh), read_field(fh), read_field(fh)
    line = fh.readline().decode("ascii").strip()
    if not line.startswith("META "):
        raise FormatError("missing META line")
    meta = dict(item.split("=", 1) for item in line[5:].split())
    for key in ("t", "alpha", "eta", "dt"):
        meta[key] = float(meta[key])
    meta["n"] = int(meta["n"])
    if u.shape != (2, meta["n"], meta["n"]):
        raise FormatError("snapshot grid does not match META")
    return State(u, v, th, meta["t"]), meta


def load_snapshot(path) -> tuple[State, dict]:
    return parse_snapshot(Path(path).read_bytes())


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def write_csv(path, rows: Iterable[dict], columns: list[str] | None = None) -> None:
    """Rows to CSV with repr-exact floats; columns default to first-seen key order."""
    rows = list(rows)
    if columns is None:
        columns = []
        for r in rows:
            columns.extend(k for k in r if k not in columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
