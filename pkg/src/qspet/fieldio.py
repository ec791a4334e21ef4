"""File formats: CSV fields with JSON sidecars, and 8-bit PGM heatmaps.

CSV rows are ordered with the signal index varying fastest. Each ``name.csv``
has a ``name.json`` sidecar holding the grid and any tags (theta, eta, ...),
which is all :func:`load_field` needs to rebuild the object.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .fields import ComplexField2D, FrequencyGrid, Interferogram, JspMap, RealField2D
from .noise import CountField

PathLike = Union[str, Path]

_AXES = "nu_s_offset_hz,nu_i_offset_hz"


def _axes_columns(grid: FrequencyGrid):
    ds, di = grid.detuning_mesh()
    return ds.T.ravel(), di.T.ravel()


def _flat(values):
    return np.asarray(values).T.ravel()


def _unflat(col, grid: FrequencyGrid):
    return np.asarray(col).reshape(grid.n_idler, grid.n_signal).T


def _kind(obj) -> str:
    if isinstance(obj, ComplexField2D):
        return "complex_field"
    if isinstance(obj, Interferogram):
        return "interferogram"
    if isinstance(obj, RealField2D):
        return "real_field"
    if isinstance(obj, CountField):
        return "counts"
    if isinstance(obj, JspMap):
        return "jsp_map"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_csv(path: PathLike, obj) -> None:
    kind = _kind(obj)
    s, i = _axes_columns(obj.grid)
    if kind == "complex_field":
        v = _flat(obj.values)
        cols, header, fmt = [s, i, v.real, v.imag], f"{_AXES},re,im", ["%.17g"] * 4
    elif kind == "counts":
        cols, header, fmt = [s, i, _flat(obj.values)], f"{_AXES},re", ["%.17g", "%.17g", "%d"]
    elif kind == "jsp_map":
        inten = _flat(obj.intensity) if obj.intensity is not None else np.full(s.shape, np.nan)
        cols = [s, i, _flat(obj.phase), _flat(obj.valid).astype(int), inten]
        header, fmt = f"{_AXES},phase_rad,valid,intensity", ["%.17g", "%.17g", "%.17g", "%d", "%.17g"]
    else:
        cols, header, fmt = [s, i, _flat(obj.values)], f"{_AXES},re", ["%.17g"] * 3
    table = np.column_stack(cols)
    np.savetxt(path, table, delimiter=",", header=header, comments="", fmt=fmt)


def manifest(obj, csv_name: str, **extra) -> dict:
    kind = _kind(obj)
    m = {"kind": kind, "csv": csv_name, "grid": obj.grid.to_dict()}
    if kind in ("interferogram", "counts"):
        m.update(theta_rad=float(obj.theta), eta=float(obj.eta), process=obj.process)
    if kind == "jsp_map":
        m.update(provenance=obj.provenance, offset_rad=float(obj.offset))
    m.update(extra)
    return m


def write_json(path: PathLike, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def save_field(obj, directory: PathLike, name: str, **extra) -> tuple[Path, Path]:
    """Write ``name.csv`` and ``name.json`` under ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = d / f"{name}.csv", d / f"{name}.json"
    write_csv(csv_path, obj)
    write_json(json_path, manifest(obj, csv_path.name, **extra))
    return csv_path, json_path


def read_manifest(path: PathLike) -> dict:
    return json.loads(Path(path).read_text())


def load_field(json_path: PathLike):
    """Rebuild a field from its JSON sidecar and CSV."""
    json_path = Path(json_path)
    m = read_manifest(json_path)
    grid = FrequencyGrid.from_dict(m["grid"])
    csv_path = json_path.parent / m["csv"]
    with open(csv_path) as fh:
        header = fh.readline().strip().split(",")
    table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    if table.shape[0] != grid.n_signal * grid.n_idler:
        raise ValueError(f"{csv_path}: expected {grid.n_signal * grid.n_idler} rows, found {table.shape[0]}")
    s, i = _axes_columns(grid)
    if not (np.allclose(table[:, 0], s, rtol=0, atol=1e-6 * grid.step_signal)
            and np.allclose(table[:, 1], i, rtol=0, atol=1e-6 * grid.step_idler)):
        raise ValueError(f"{csv_path}: frequency columns do not match the grid in {json_path.name}")
    col = {h: table[:, k] for k, h in enumerate(header)}
    kind = m["kind"]
    if kind == "complex_field":
        return ComplexField2D(grid, _unflat(col["re"] + 1j * col["im"], grid))
    if kind == "real_field":
        return RealField2D(grid, _unflat(col["re"], grid))
    if kind == "interferogram":
        return Interferogram(grid, _unflat(col["re"], grid), theta=m["theta_rad"], eta=m["eta"], process=m.get("process", "spontaneous"))
    if kind == "counts":
        return CountField(grid, np.rint(_unflat(col["re"], grid)).astype(np.int64), theta=m["theta_rad"], eta=m["eta"], process=m.get("process", "spontaneous"))
    if kind == "jsp_map":
        inten = _unflat(col["intensity"], grid)
        return JspMap(
            grid,
            _unflat(col["phase_rad"], grid),
            _unflat(col["valid"], grid).astype(bool),
            provenance=m.get("provenance", "spontaneous"),
            intensity=None if np.all(np.isnan(inten)) else inten,
            offset=m.get("offset_rad", 0.0),
        )
    raise ValueError(f"unknown field kind {kind!r}")


def to_image(values, vmin=None, vmax=None) -> np.ndarray:
    """Scale to uint8 with idler increasing upward and signal to the right."""
    v = np.asarray(values, float)
    lo = np.nanmin(v) if vmin is None else vmin
    hi = np.nanmax(v) if vmax is None else vmax
    span = hi - lo if hi > lo else 1.0
    img = np.clip((v - lo) / span, 0, 1)
    img = np.nan_to_num(img, nan=0.0)
    return np.rint(255 * img).astype(np.uint8).T[::-1]


def write_pgm(path: PathLike, values, vmin=None, vmax=None) -> None:
    """Binary 8-bit grayscale PGM (P5)."""
    img = to_image(values, vmin, vmax)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path: PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def save_heatmap(obj, directory: PathLike, name: str) -> Path:
    """PGM of a field: intensity for real/complex fields, wrapped phase for JSP maps."""
    path = Path(directory) / f"{name}.pgm"
    if isinstance(obj, JspMap):
        write_pgm(path, np.where(obj.valid, obj.phase, np.nan), -np.pi, np.pi)
    elif isinstance(obj, ComplexField2D):
        write_pgm(path, np.abs(obj.values) ** 2)
    else:
        write_pgm(path, obj.values)
    return path
