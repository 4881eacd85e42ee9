"""File formats: geometry specs (JSON), PGM rasters, CSV tables and text reports.

Geometry spec, schema version 1::

    {
      "schema_version": 1,
      "name": "reference",
      "margin": 1,
      "domain": [{"type": "rectangle", "min": [0.1, 0.1], "max": [0.9, 0.9]}],
      "solid":  [{"type": "disk", "center": [0.5, 0.5], "radius": 0.2},
                 {"type": "polygon", "vertices": [[0.5, 0.5], [0.8, 0.3], [0.8, 0.7]],
                  "negative": true}],
      "stencil": "classes.pgm"
    }

``stencil`` is optional and, when present, replaces the shape lists; its path
is relative to the JSON file.  Rasters are written with row ``n-1-j`` and
column ``i`` so that ``y`` points up in an image viewer.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np
from scipy import ndimage

from .analysis import QuantizationError, level_set_components, particles_in_set, quantize_three
from .grid import Disk, GeometryError, GeometrySpec, Polygon, Rectangle, Stencil

SCHEMA_VERSION = 1
PGM_MAX = 65535


def fmt(x) -> str:
    """17 significant digits: enough to round-trip any double."""
    return "%.17g" % float(x)


# -- geometry -----------------------------------------------------------------

def _shape_from_dict(d):
    kind = d.get("type")
    neg = bool(d.get("negative", False))
    try:
        if kind == "rectangle":
            return Rectangle(tuple(map(float, d["min"])), tuple(map(float, d["max"])), neg)
        if kind == "disk":
            return Disk(tuple(map(float, d["center"])), float(d["radius"]), neg)
        if kind == "polygon":
            return Polygon(tuple(tuple(map(float, p)) for p in d["vertices"]), neg)
    except KeyError as e:
        raise GeometryError(f"{kind} shape is missing field {e}") from None
    raise GeometryError(f"unknown shape type: {kind!r}")


def _shape_to_dict(s):
    if isinstance(s, Rectangle):
        d = {"type": "rectangle", "min": list(s.min), "max": list(s.max)}
    elif isinstance(s, Disk):
        d = {"type": "disk", "center": list(s.center), "radius": s.radius}
    else:
        d = {"type": "polygon", "vertices": [list(p) for p in s.vertices]}
    if s.negative:
        d["negative"] = True
    return d


def load_geometry(path) -> tuple[GeometrySpec, int]:
    """Read a geometry spec; returns ``(spec, margin)``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"geometry file not found: {path}")
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise GeometryError(f"{path}: not valid JSON ({e})") from None
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise GeometryError(f"{path}: unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    stencil = None
    if data.get("stencil"):
        stencil = Stencil(read_pgm(path.parent / data["stencil"]))
    spec = GeometrySpec(
        domain_shapes=tuple(_shape_from_dict(d) for d in data.get("domain", [])),
        solid_shapes=tuple(_shape_from_dict(d) for d in data.get("solid", [])),
        stencil=stencil,
        name=str(data.get("name", path.stem)),
    )
    return spec, int(data.get("margin", 1))


def save_geometry(spec: GeometrySpec, path, margin: int = 1):
    if spec.stencil is not None:
        raise GeometryError("stencil geometries are saved by writing the PGM and referencing it")
    data = {
        "schema_version": SCHEMA_VERSION,
        "name": spec.name,
        "margin": margin,
        "domain": [_shape_to_dict(s) for s in spec.domain_shapes],
        "solid": [_shape_to_dict(s) for s in spec.solid_shapes],
    }
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


# -- PGM ----------------------------------------------------------------------

def _tokens(buf, count, pos):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    while len(out) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        out.append(buf[start:pos])
    return out, pos + 1  # exactly one whitespace byte before the raster


def read_pgm(path) -> np.ndarray:
    """Binary (P5) PGM with 8- or 16-bit samples, in image orientation."""
    buf = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _tokens(buf, 4, 0)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5)")
    w, h, maxval = int(w), int(h), int(maxval)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    data = np.frombuffer(buf, dtype=dtype, count=w * h, offset=pos)
    return data.reshape(h, w).astype(np.int64)


def write_pgm(path, pixels, maxval: int = 255):
    pixels = np.asarray(pixels)
    h, w = pixels.shape
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
        f.write(pixels.astype(dtype).tobytes())


def field_to_image(v) -> np.ndarray:
    return np.asarray(v)[:, ::-1].T


def image_to_field(img) -> np.ndarray:
    return np.asarray(img).T[:, ::-1]


def write_field_pgm(path, v) -> tuple[float, float]:
    """16-bit raster of ``v``; returns ``(offset, step)`` with ``v ~ offset + step * pixel``."""
    v = np.asarray(v, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    step = (hi - lo) / PGM_MAX if hi > lo else 1.0
    pix = np.rint((v - lo) / step).astype(np.int64)
    write_pgm(path, field_to_image(pix), PGM_MAX)
    return lo, step


def read_field_pgm(path, offset: float, step: float) -> np.ndarray:
    return offset + step * image_to_field(read_pgm(path)).astype(float)


# -- CSV ----------------------------------------------------------------------

def write_cells_csv(path, v, labels):
    """One row per cell: ``i, j, class, value`` with class the cell label
    (-1 exterior, 0 fluid, k >= 1 particle k)."""
    v = np.asarray(v, dtype=float)
    labels = np.asarray(labels)
    n = v.shape[0]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "j", "class", "value"])
        for i in range(n):
            for j in range(n):
                w.writerow([i, j, int(labels[i, j]), repr(float(v[i, j]))])


def read_cells_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_cells_csv`: returns ``(v, labels)``."""
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise ValueError(f"{path}: no cells")
    n = int(round(len(rows) ** 0.5))
    if n * n != len(rows):
        raise ValueError(f"{path}: {len(rows)} rows is not a square grid")
    v = np.empty((n, n))
    labels = np.empty((n, n), dtype=np.int64)
    for r in rows:
        i, j = int(r["i"]), int(r["j"])
        v[i, j] = float(r["value"])
        labels[i, j] = int(r["class"])
    return v, labels


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Y", "tv", "dirichlet", "drive", "rate_bound_ok"])
        for r in rows:
            w.writerow([fmt(r.Y), fmt(r.tv), fmt(r.dirichlet), fmt(r.drive), str(bool(r.rate_bound_ok)).lower()])


def read_sweep_csv(path):
    with open(path, newline="") as f:
        return [dict(r) for r in csv.DictReader(f)]


def write_histogram_csv(path, centers, counts):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["center", "count"])
        for c, k in zip(centers, counts):
            w.writerow([fmt(c), int(k)])


# -- reports ------------------------------------------------------------------

def quantization_lines(v, masks):
    """Report block for the three-value quantisation and the level sets."""
    try:
        q = quantize_three(v, masks)
    except QuantizationError as e:
        return [f"quantization = {e}"]
    h = masks.grid.h
    tv = q.tv_original
    lines = [
        f"beta_plus = {fmt(q.beta_plus)}",
        f"beta_minus = {fmt(q.beta_minus)}",
        f"beta_plus_normalized = {fmt(q.beta_plus / tv)}",
        f"beta_minus_normalized = {fmt(q.beta_minus / tv)}",
        f"tv_quantized = {fmt(q.tv_quantized)}",
        f"tv_ratio = {fmt(q.tv_ratio)}",
        "",
        "level sets (set, component, cells, perimeter, particles)",
    ]
    for tag, cells in (("E+", q.positive_set), ("E-", q.negative_set)):
        lab = ndimage.label(cells, structure=ndimage.generate_binary_structure(2, 1))[0]
        for c in level_set_components(cells, h):
            parts = particles_in_set(lab == c.label, masks)
            lines.append(f"{tag} {c.label} {c.cells} {fmt(c.perimeter)} {' '.join(map(str, parts)) or '-'}")
    return lines


def write_text(path, lines):
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory not writable: {path}")
    return path
