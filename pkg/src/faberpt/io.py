"""File formats: GPT table JSON, shape JSON, CSV exports, run logs and SVG.

Complex numbers are stored as [re, im] pairs.  Real GPT entries are keyed
"a1,a2|b1,b2".  Every writer embeds the caller's metadata (including the
config hash) and produces byte-identical output for identical input.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .gpt import GptTable
from .mesh import BoundaryMesh


def config_hash(config: dict) -> str:
    """Short SHA-256 of the canonical JSON form of ``config``."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def dumps(obj) -> str:
    """JSON with one top-level key per line."""
    obj = _jsonable(obj)
    if not isinstance(obj, dict) or not obj:
        return json.dumps(obj) + "\n"
    body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in obj.items())
    return "{\n" + body + "\n}\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


# --- GPT tables -------------------------------------------------------------


def _complex_matrix(rows) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in rows]


def _m_key(alpha, beta) -> str:
    return f"{alpha[0]},{alpha[1]}|{beta[0]},{beta[1]}"


def table_to_json(table: GptTable, metadata: dict | None = None) -> dict:
    sigma0 = table.sigma0
    return {
        "lambda": table.lam,
        "sigma0": sigma0,
        "order": table.order,
        "N1": _complex_matrix(table.N1),
        "N2": _complex_matrix(table.N2),
        "M": {_m_key(a, b): v for (a, b), v in sorted(table.M.items())},
        "radius": table.radius,
        "metadata": {**table.metadata, **(metadata or {})},
    }


def _parse_complex_matrix(data, name: str, order: int) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"field {name!r} must be an array of [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] < 1 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"field {name!r} must be a square matrix of [re, im] pairs")
    if arr.shape[0] < order:
        raise InputError(f"field {name!r} has order {arr.shape[0]} < declared order {order}")
    return arr[..., 0] + 1j * arr[..., 1]


def _parse_float(value, name: str) -> float:
    if isinstance(value, str) and value in ("inf", "-inf"):
        return float(value)
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"field {name!r} must be a number") from exc


def table_from_json(data: dict) -> GptTable:
    if not isinstance(data, dict):
        raise InputError("GPT table must be a JSON object")
    for key in ("lambda", "order", "N1", "N2"):
        if key not in data:
            raise InputError(f"GPT table is missing field {key!r}")
    lam = _parse_float(data["lambda"], "lambda")
    if not abs(lam) >= 0.5:
        raise InputError(f"field 'lambda' must satisfy |lambda| >= 1/2, got {lam}")
    order = int(data["order"])
    if order < 1:
        raise InputError("field 'order' must be >= 1")
    N1 = _parse_complex_matrix(data["N1"], "N1", order)
    N2 = _parse_complex_matrix(data["N2"], "N2", order)
    if not np.isfinite(N2[0, 0]) or N2[0, 0] == 0:
        raise InputError("field 'N2' is missing the entry N2_11")
    M = {}
    for key, v in (data.get("M") or {}).items():
        try:
            a, b = key.split("|")
            alpha = tuple(int(x) for x in a.split(","))
            beta = tuple(int(x) for x in b.split(","))
        except ValueError as exc:
            raise InputError(f"bad M key {key!r}; expected 'a1,a2|b1,b2'") from exc
        M[(alpha, beta)] = float(v)
    sigma0 = data.get("sigma0")
    sigma0 = None if sigma0 is None else _parse_float(sigma0, "sigma0")
    radius = data.get("radius")
    return GptTable(lam, order, N1[:order, :order], N2[:order, :order], M, sigma0,
                    None if radius is None else float(radius), dict(data.get("metadata") or {}))


def write_table(path, table: GptTable, metadata: dict | None = None) -> Path:
    return write_json(path, table_to_json(table, metadata))


def read_table(path) -> GptTable:
    return table_from_json(read_json(path))


# --- CSV --------------------------------------------------------------------


def _csv(header, columns, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def mesh_csv(mesh: BoundaryMesh, comment: str | None = None) -> str:
    return _csv(["theta", "x", "y", "nx", "ny", "weight"],
                [mesh.theta, mesh.x, mesh.y, mesh.normals.real, mesh.normals.imag, mesh.weights],
                comment)


def density_csv(mesh: BoundaryMesh, phi: np.ndarray, comment: str | None = None) -> str:
    return _csv(["theta", "phi"], [mesh.theta, np.real(phi)], comment)


def curve_csv(points: np.ndarray, comment: str | None = None) -> str:
    return _csv(["x", "y"], [points.real, points.imag], comment)


def field_csv(z: np.ndarray, u: np.ndarray, comment: str | None = None) -> str:
    return _csv(["x", "y", "u"], [z.real, z.imag, u], comment)


def read_mesh_csv(path) -> np.ndarray:
    """Node coordinates from a mesh or curve CSV, as complex points."""
    rows = [r for r in Path(path).read_text().splitlines() if r and not r.startswith("#")]
    reader = csv.DictReader(rows)
    try:
        return np.array([complex(float(r["x"]), float(r["y"])) for r in reader])
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: expected columns x, y") from exc


# --- run log ----------------------------------------------------------------


def run_log_jsonl(records) -> str:
    return "".join(json.dumps(_jsonable(r), sort_keys=True) + "\n" for r in records)


# --- SVG --------------------------------------------------------------------


def _path(points: np.ndarray, to_px) -> str:
    xy = [to_px(p) for p in points]
    head = f"M{xy[0][0]:.3f},{xy[0][1]:.3f}"
    return head + "".join(f" L{x:.3f},{y:.3f}" for x, y in xy[1:]) + " Z"


def svg_overlay(recovered: np.ndarray, truth: np.ndarray | None = None, size: int = 480,
                title: str | None = None, metadata: dict | None = None) -> str:
    """Recovered curve in black over the true curve in gray, equal axes."""
    curves = [c for c in (truth, recovered) if c is not None]
    allpts = np.concatenate(curves)
    lo = np.array([allpts.real.min(), allpts.imag.min()])
    hi = np.array([allpts.real.max(), allpts.imag.max()])
    span = float(max(hi - lo)) * 1.1 or 1.0
    mid = (lo + hi) / 2
    scale = size / span

    def to_px(p):
        return ((p.real - mid[0]) * scale + size / 2, size / 2 - (p.imag - mid[1]) * scale)

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">']
    if metadata:
        lines.append(f"<metadata>{json.dumps(_jsonable(metadata), sort_keys=True)}</metadata>")
    if title:
        lines.append(f"<title>{title}</title>")
    lines.append(f'<rect width="{size}" height="{size}" fill="white"/>')
    if truth is not None:
        lines.append(f'<path d="{_path(truth, to_px)}" fill="none" stroke="#999999" stroke-width="2"/>')
    lines.append(f'<path d="{_path(recovered, to_px)}" fill="none" stroke="black" stroke-width="1.5"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
