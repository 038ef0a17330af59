"""JSON pattern files and CSV variable tables.

A pattern file stores every finite circle and point of a map. Numbers are
written as hex-float strings by default, which makes ``load(save(m))``
reproduce the arrays bit for bit; the decimal format writes shortest
round-trip decimals instead and is equally lossless in Python.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Mapping

import jsonschema
import numpy as np

from .engine import MiquelMap
from .errors import SchemaViolation, UnsupportedVersion
from .variables import VariableField

FORMAT_VERSION = 1
FORMATS = ("hex", "decimal")

_HEX = r"^-?0x[0-9a-f](\.[0-9a-f]*)?p[+-]?[0-9]+$"
_NUM = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": _HEX}]}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_TRIPLE = {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3}
_LEVELS = {"type": "array", "items": {"type": "integer"}, "uniqueItems": True}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "format", "window", "circles", "points", "provenance"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "integer"},
        "format": {"enum": list(FORMATS)},
        "window": {
            "type": "object",
            "required": ["shape", "circle_levels", "point_levels"],
            "additionalProperties": False,
            "properties": {
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2, "maxItems": 2},
                "circle_levels": _LEVELS,
                "point_levels": _LEVELS,
            },
        },
        "circles": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["z", "center", "radius"],
                "additionalProperties": False,
                "properties": {"z": _TRIPLE, "center": _PAIR, "radius": _NUM},
            },
        },
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "pos"],
                "additionalProperties": False,
                "properties": {"t": _TRIPLE, "pos": _PAIR},
            },
        },
        "provenance": {"type": "object"},
    },
}
_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _enc(x: float, fmt: str):
    x = float(x)
    return x.hex() if fmt == "hex" else x


def _dec(x) -> float:
    return float.fromhex(x) if isinstance(x, str) else float(x)


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


# ----------------------------------------------------------------- pattern files


def map_to_dict(m: MiquelMap, fmt: str = "hex") -> dict:
    if fmt not in FORMATS:
        raise ValueError(f"unknown number format {fmt!r}")
    circles, points = [], []
    for k, c in m.centers.items():
        r = m.radii[k]
        for i, j in np.argwhere(np.isfinite(c)):
            v = complex(c[i, j])
            circles.append({"z": [int(i), int(j), k], "center": [_enc(v.real, fmt), _enc(v.imag, fmt)],
                            "radius": _enc(r[i, j], fmt)})
    for k, p in m.points.items():
        for i, j in np.argwhere(np.isfinite(p)):
            v = complex(p[i, j])
            points.append({"t": [int(i), int(j), k], "pos": [_enc(v.real, fmt), _enc(v.imag, fmt)]})
    return {
        "version": FORMAT_VERSION,
        "format": fmt,
        "window": {"shape": list(m.shape), "circle_levels": sorted(m.centers), "point_levels": sorted(m.points)},
        "circles": circles,
        "points": points,
        "provenance": dict(m.provenance),
    }


def dumps_map(m: MiquelMap, fmt: str = "hex") -> str:
    return json.dumps(map_to_dict(m, fmt), sort_keys=True, indent=1) + "\n"


def save_map(m: MiquelMap, path, fmt: str = "hex") -> None:
    Path(path).write_text(dumps_map(m, fmt))


def map_from_dict(doc) -> MiquelMap:
    """Validate a parsed pattern file and build the map it describes."""
    if isinstance(doc, dict) and "version" in doc and doc["version"] != FORMAT_VERSION:
        raise UnsupportedVersion(f"pattern file version {doc['version']!r}; this build reads {FORMAT_VERSION}")
    err = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if err is not None:
        raise SchemaViolation(_pointer(err.absolute_path), err.message)

    n, mm = doc["window"]["shape"]
    clev, plev = doc["window"]["circle_levels"], doc["window"]["point_levels"]
    centers = {k: np.full((n, mm), np.nan, complex) for k in clev}
    radii = {k: np.full((n, mm), np.nan) for k in clev}
    points = {k: np.full((n, mm), np.nan, complex) for k in plev}

    def site(z, ptr, store):
        i, j, k = z
        if k not in store:
            raise SchemaViolation(ptr, f"level {k} is not listed in the window")
        if not (0 <= i < n and 0 <= j < mm):
            raise SchemaViolation(ptr, f"site {z} lies outside the {n} x {mm} window")
        return i, j, k

    for idx, c in enumerate(doc["circles"]):
        ptr = f"/circles/{idx}/z"
        i, j, k = site(c["z"], ptr, centers)
        if (i + j + k) % 2:
            raise SchemaViolation(ptr, f"circle site {c['z']} has odd coordinate sum")
        if np.isfinite(centers[k][i, j]):
            raise SchemaViolation(ptr, f"duplicate circle {c['z']}")
        r = _dec(c["radius"])
        if not r > 0 or not np.isfinite(r):
            raise SchemaViolation(f"/circles/{idx}/radius", "radius must be positive and finite")
        centers[k][i, j] = complex(_dec(c["center"][0]), _dec(c["center"][1]))
        radii[k][i, j] = r
    for idx, p in enumerate(doc["points"]):
        ptr = f"/points/{idx}/t"
        i, j, k = site(p["t"], ptr, points)
        if np.isfinite(points[k][i, j]):
            raise SchemaViolation(ptr, f"duplicate point {p['t']}")
        points[k][i, j] = complex(_dec(p["pos"][0]), _dec(p["pos"][1]))
    _check_referenced_points(centers, points, (n, mm))
    return MiquelMap((n, mm), centers, radii, points, provenance=doc["provenance"])


def _check_referenced_points(centers: Mapping, points: Mapping, shape) -> None:
    """A face of a stored layer whose four circles are present must carry its point."""
    n, m = shape
    I, J = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    for k, p in points.items():
        if k not in centers or k + 1 not in centers:
            continue
        c = np.where((I + J + k) % 2 == 0, centers[k], centers[k + 1])
        ok = np.isfinite(c)
        full = ok[:-1, :-1] & ok[1:, :-1] & ok[:-1, 1:] & ok[1:, 1:]
        missing = full & ~np.isfinite(p[:-1, :-1])
        if missing.any():
            i, j = np.argwhere(missing)[0]
            raise SchemaViolation("/points", f"point {[int(i), int(j), k]} is missing although its four circles exist")


def loads_map(text: str) -> MiquelMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("", f"invalid JSON: {exc}") from exc
    return map_from_dict(doc)


def load_map(path) -> MiquelMap:
    return loads_map(Path(path).read_text())


# ----------------------------------------------------------------- CSV tables


def dumps_values(values: Mapping, edge: bool = False) -> str:
    """Rows z1, z2, z3, [edge,] re, im in sorted site order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z1", "z2", "z3", "edge", "re", "im"] if edge else ["z1", "z2", "z3", "re", "im"])
    for z in sorted(values):
        v = complex(values[z])
        w.writerow([*z, repr(v.real), repr(v.imag)])
    return buf.getvalue()


def save_field(f: VariableField, path) -> None:
    Path(path).write_text(dumps_values(f.values, edge=f.kind == "Gamma"))


def loads_values(text: str) -> dict:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SchemaViolation("", "empty CSV file")
    head = [h.strip() for h in rows[0]]
    edge = head == ["z1", "z2", "z3", "edge", "re", "im"]
    if not edge and head != ["z1", "z2", "z3", "re", "im"]:
        raise SchemaViolation("/0", f"unexpected header {head}")
    out = {}
    for n, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(head):
            raise SchemaViolation(f"/{n}", f"expected {len(head)} columns, got {len(row)}")
        try:
            z = tuple(int(x) for x in row[:3])
            re_, im = (float(x) for x in row[-2:])
        except ValueError as exc:
            raise SchemaViolation(f"/{n}", str(exc)) from exc
        key = (*z, row[3].strip()) if edge else z
        if key in out:
            raise SchemaViolation(f"/{n}", f"duplicate site {key}")
        out[key] = complex(re_, im)
    return out


def load_values(path) -> dict:
    return loads_values(Path(path).read_text())
