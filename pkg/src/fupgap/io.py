"""Plain-text serialisation of covers, Schottky groups, trees and sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .fractal_sets import IntervalCover, SchottkyGroup
from .multiscale_tree import MultiscaleTree, TripleTree


def fmt(x) -> str:
    """17 significant digits for floats; plain text otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _data_lines(text: str) -> list[str]:
    return [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def _meta(text: str) -> dict:
    out = {}
    for ln in text.splitlines():
        if ln.startswith("#"):
            for part in ln[1:].split(","):
                if "=" in part:
                    k, v = part.split("=", 1)
                    out[k.strip()] = v.strip()
    return out


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return [_jsonable(v) for v in o.tolist()]
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    return o


# --- covers -----------------------------------------------------------------


def cover_to_csv(cover: IntervalCover) -> str:
    return csv_text(
        ["lo", "hi"],
        cover.intervals.tolist(),
        [f"ambient={cover.ambient}, resolution={fmt(cover.resolution)}"],
    )


def cover_from_csv(text: str) -> IntervalCover:
    meta = _meta(text)
    if "ambient" not in meta or "resolution" not in meta:
        raise ValidationError("cover file needs an 'ambient=..., resolution=...' header comment")
    lines = _data_lines(text)
    if not lines or lines[0].replace(" ", "") != "lo,hi":
        raise ValidationError("cover file needs a 'lo,hi' header row")
    rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]]
    return IntervalCover(np.array(rows, dtype=float).reshape(-1, 2), float(meta["resolution"]), meta["ambient"])


# --- Schottky groups --------------------------------------------------------


def schottky_to_text(g: SchottkyGroup) -> str:
    lines = ["lengths = " + " ".join(fmt(v) for v in g.lengths)]
    for name, m in (("gen1", g.gen1), ("gen2", g.gen2)):
        lines.append(f"{name} = " + " ".join(fmt(v) for v in np.asarray(m, dtype=float).ravel()))
    if g.disks is not None:
        lines.append("disks = " + " ".join(fmt(v) for v in np.asarray(g.disks, dtype=float).ravel()))
    return "\n".join(lines) + "\n"


def schottky_from_text(text: str) -> SchottkyGroup:
    kv = {}
    for ln in _data_lines(text):
        k, _, v = ln.partition("=")
        kv[k.strip()] = np.array([float(t) for t in v.split()])
    try:
        disks = kv["disks"].reshape(4, 2) if "disks" in kv else None
        return SchottkyGroup(
            kv["gen1"].reshape(2, 2), kv["gen2"].reshape(2, 2), tuple(kv["lengths"].tolist()), disks
        )
    except KeyError as exc:
        raise ValidationError(f"missing key {exc} in Schottky record") from None


# --- trees ------------------------------------------------------------------


def tree_to_text(T: MultiscaleTree) -> str:
    head = f"# M={T.M}, N={T.N}\n# index height cell_lo cell_hi parent lo hi\n"
    lo, hi = T.lo, T.hi
    body = "".join(
        f"{i} {T.height[i]} {T.cell_lo[i]} {T.cell_hi[i]} {T.parent[i]} {fmt(lo[i])} {fmt(hi[i])}\n"
        for i in range(len(T))
    )
    return head + body


def tree_from_text(text: str) -> MultiscaleTree:
    meta = _meta(text)
    rows = np.array([[int(v) for v in ln.split()[:5]] for ln in _data_lines(text)], dtype=np.int64)
    if np.any(rows[:, 0] != np.arange(len(rows))):
        raise ValidationError("vertex indices must be 0..n-1 in order")
    return MultiscaleTree(int(meta["M"]), int(meta["N"]), rows[:, 4], rows[:, 1], rows[:, 2], rows[:, 3])


def triples_to_text(TT: TripleTree) -> str:
    head = "# row height parent i j k hit\n"
    return head + "".join(
        f"{r} {TT.height[r]} {TT.parent[r]} {a} {b} {c} {int(TT.hit[r])}\n"
        for r, (a, b, c) in enumerate(TT.triples.tolist())
    )


def triples_from_text(text: str, underlying: MultiscaleTree) -> TripleTree:
    rows = np.array([[int(v) for v in ln.split()] for ln in _data_lines(text)], dtype=np.int64).reshape(-1, 7)
    return TripleTree(underlying, rows[:, 3:6], rows[:, 1], rows[:, 2], rows[:, 6].astype(bool))


# --- files ------------------------------------------------------------------


def write(path: str | Path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    return p
