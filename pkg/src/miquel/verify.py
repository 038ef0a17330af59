"""Residual reports over every invariant a Miquel map is expected to satisfy.

``run_suite`` evaluates the requested suites on all sites where they are
defined and returns a ``VerificationReport``. Each suite expands into one
or more named checks. A check either bounds its largest residual from
above (``max_below``) or, for claims of non-invariance, requires its
smallest residual to exceed a threshold (``min_above``), so a suite cannot
pass on data that trivially satisfies everything.

The report serializes to JSON deterministically; running the same map and
selection twice gives byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import subvarieties as sv
from .circles import cross_ratio_residual
from .engine import MiquelMap, extract_p, extract_t
from .errors import CircleThroughInfinity, MiquelError, SingularSolve, WindowTooSmall
from .generators import apply_moebius
from .lattice import LatticeSite, Role, a4_octahedra, dskp_neighbours, octahedron_vertices, tetra_vertices, vertex_tetrahedra
from .projective import INF, MoebiusTransform, multi_ratio
from .reconstruction import reconstruct_from_x, reconstruct_from_y, x_boundary, y_boundary
from .variables import VariableField, fields, gamma_field, ysystem_residuals

REPORT_VERSION = 1

SUITES = ("incidence", "miquel_residual", "dskp_t", "dskp_p", "a4", "ysystem_all", "realness",
          "w_conjugacy", "moebius_invariance", "subvarieties", "reconstruction_roundtrip")

# upper bounds, multiplied by the tolerance scale
TOL = {
    "incidence": 1e-8,
    "miquel_residual": 1e-8,
    "dskp": 1e-8,
    "ysystem": 1e-7,
    "realness": 1e-9,
    "w_conjugacy": 1e-9,
    "moebius_xw": 1e-8,
    "integrable": 1e-9,
    "zigzag": 1e-9,
    "harmonic": 1e-8,
    "packing": 1e-8,
    "roundtrip": 1e-7,
}
# lower bounds for non-invariance claims; not scaled
CHANGE_THRESHOLD = 1e-3
MOEBIUS_TRIALS = 3
MOEBIUS_SEED = 20240917


@dataclass(frozen=True)
class Check:
    name: str
    claim: str
    mode: str  # "max_below" | "min_above"
    tolerance: float
    site_count: int
    max_residual: float
    mean_residual: float
    min_residual: float
    skipped_singular: int = 0
    details: dict = field(default_factory=dict)
    applicable: bool = True

    @property
    def passed(self) -> bool:
        if not self.applicable or self.site_count == 0:
            return False
        if self.mode == "max_below":
            return self.max_residual < self.tolerance
        return self.min_residual > self.tolerance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "not_applicable" if not self.applicable else ("pass" if self.passed else "fail")
        return {k: _clean(v) for k, v in d.items()}


def _clean(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


@dataclass(frozen=True)
class VerificationReport:
    map_id: str
    tol_scale: float
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        live = [c for c in self.checks if c.applicable]
        return bool(live) and all(c.passed for c in live)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if c.applicable and not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "map_id": self.map_id,
            "tol_scale": self.tol_scale,
            "checks": [c.to_dict() for c in self.checks],
            "verdict": "pass" if self.passed else "fail",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def map_id(m: MiquelMap) -> str:
    """Content hash of the stored geometry."""
    h = hashlib.sha256()
    h.update(repr(m.shape).encode())
    for name in ("centers", "radii", "points"):
        for k, a in getattr(m, name).items():
            h.update(f"{name}:{k}:".encode())
            h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:16]


def _make(name, claim, mode, tol, residuals, skipped=0, details=None) -> Check:
    vals = np.asarray(list(residuals), dtype=float)
    if vals.size == 0:
        raise WindowTooSmall(f"check {name!r} has no applicable sites")
    bad = ~np.isfinite(vals)
    vals = np.where(bad, np.inf, vals)
    return Check(name, claim, mode, float(tol), int(vals.size), float(vals.max()), float(vals.mean()),
                 float(vals.min()), int(skipped), details or {})


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def _mr_plus_one(vals) -> float:
    r = multi_ratio(vals)
    return math.inf if r is INF else abs(r + 1)


# ----------------------------------------------------------------- suites


def _incidence(m, s, ctx):
    res = []
    for k, arr in m.points.items():
        for i, j in np.argwhere(np.isfinite(arr)):
            p = complex(arr[i, j])
            for v in tetra_vertices((int(i), int(j), k)):
                c = m.circle(v)
                if c is not None:
                    res.append(abs(abs(p - c.center) - c.radius) / c.radius)
    return [_make("incidence", "every stored point lies on its stored incident circles", "max_below",
                  TOL["incidence"] * s, res)]


def _miquel(m, s, ctx):
    pts = {**ctx.pb, **ctx.pw}
    res = []
    for v in sorted(ctx.t):
        tets = [T.z for T in vertex_tetrahedra(v)]
        for group in (tets[:4], tets[4:]):
            if all(T in pts for T in group):
                res.append(cross_ratio_residual(*(pts[T] for T in group)))
    return [_make("miquel_residual", "same-color points around each circle site are concyclic", "max_below",
                  TOL["miquel_residual"] * s, res)]


def _octahedral(values: dict, centers: Iterable) -> tuple[list, int]:
    res, skipped = [], 0
    for o in centers:
        nb = [values.get(z) for z in dskp_neighbours(o)]
        if any(x is None for x in nb):
            continue
        try:
            res.append(_mr_plus_one(nb))
        except MiquelError:
            skipped += 1
    return res, skipped


def _odd_sites(values: dict, parity: int) -> list:
    cand = set()
    for z in values:
        for o in dskp_neighbours(z):
            if sum(o) % 2 == parity:
                cand.add(o)
    return sorted(cand)


def _dskp_t(m, s, ctx):
    octs = _odd_sites(ctx.t, 1)
    res, sk = _octahedral(ctx.t, octs)
    return [_make("dskp_t", "centers satisfy the octahedral -1 multi-ratio", "max_below", TOL["dskp"] * s, res, sk)]


def _dskp_p(m, s, ctx):
    out = []
    for color, vals, par in (("black", ctx.pb, 1), ("white", ctx.pw, 0)):
        res, sk = _octahedral(vals, _odd_sites(vals, par))
        out.append(_make(f"dskp_p.{color}", f"{color} points satisfy the octahedral -1 multi-ratio",
                         "max_below", TOL["dskp"] * s, res, sk))
    return out


def _a4(m, s, ctx):
    sites = ([LatticeSite(z, Role.VERTEX) for z in ctx.t] + [LatticeSite(z, Role.BLACK) for z in ctx.pb]
             + [LatticeSite(z, Role.WHITE) for z in ctx.pw])
    table = {Role.VERTEX: ctx.t, Role.BLACK: ctx.pb, Role.WHITE: ctx.pw}
    res, sk, kinds = [], 0, {"pure": 0, "mixed": 0}
    for o in a4_octahedra(sites):
        try:
            res.append(_mr_plus_one([table[x.role][x.z] for x in o.sites]))
            kinds[o.kind] += 1
        except MiquelError:
            sk += 1
    return [_make("a4", "centers and points together satisfy -1 multi-ratios on every A4 octahedron",
                  "max_below", TOL["dskp"] * s, res, sk, {"octahedra": kinds})]


def _ysystem(m, s, ctx):
    out = []
    for kind in ("Y", "Xb", "Xw", "Wb", "Ww"):
        res, sk = ysystem_residuals(ctx.fields[kind])
        out.append(_make(f"ysystem_all.{kind}", f"{kind} satisfies the Y-system recurrence", "max_below",
                         TOL["ysystem"] * s, res.values(), sk))
    return out


def _realness(m, s, ctx):
    out = []
    for kind in ("Y", "Xb", "Xw"):
        vals = ctx.fields[kind].values.values()
        out.append(_make(f"realness.{kind}", f"{kind} values are real", "max_below", TOL["realness"] * s,
                         [abs(v.imag) / max(abs(v), 1.0) for v in vals]))
    return out


def _conjugacy(m, s, ctx):
    wb, ww = ctx.fields["Wb"], ctx.fields["Ww"]
    res = [_rel(ww[z], wb[z].conjugate()) for z in wb.values if z in ww]
    return [_make("w_conjugacy", "white W is the conjugate of black W", "max_below", TOL["w_conjugacy"] * s, res)]


def random_moebius(m: MiquelMap, rng: np.random.Generator) -> MoebiusTransform:
    """A Möbius transform whose pole lies well outside the pattern."""
    vals = [a[np.isfinite(a)] for a in m.centers.values()]
    allc = np.concatenate(vals)
    mid = complex(allc.real.min() + allc.real.max(), allc.imag.min() + allc.imag.max()) / 2
    rmax = max(float(np.nanmax(r)) for r in m.radii.values() if np.isfinite(r).any())
    reach = float(np.abs(allc - mid).max()) + rmax
    pole = mid + reach * (2.0 + rng.random()) * np.exp(2j * np.pi * rng.random())
    a = reach * np.exp(2j * np.pi * rng.random())
    b = reach * reach * (rng.random() + 1j * rng.random())
    return MoebiusTransform(a, b, 1.0, -pole)


def _moebius(m, s, ctx):
    rng = np.random.Generator(np.random.PCG64(MOEBIUS_SEED))
    inv, change = [], []
    for _ in range(MOEBIUS_TRIALS):
        for _attempt in range(16):
            M = random_moebius(m, rng)
            try:
                img = apply_moebius(m, M)
                break
            except CircleThroughInfinity:
                continue
        else:
            raise CircleThroughInfinity("no admissible random Möbius transform found")
        f2 = fields(img)
        for kind in ("Xb", "Xw", "Wb", "Ww"):
            a, b = ctx.fields[kind], f2[kind]
            inv.extend(_rel(a[z], b[z]) for z in a.values if z in b)
        y1, y2 = ctx.fields["Y"], f2["Y"]
        change.append(max((_rel(y1[z], y2[z]) for z in y1.values if z in y2), default=0.0))
    return [
        _make("moebius_invariance.x_w", "X and W are unchanged by Möbius transforms", "max_below",
              TOL["moebius_xw"] * s, inv),
        _make("moebius_invariance.y_changes", "some Y value changes under each Möbius transform", "min_above",
              CHANGE_THRESHOLD, change),
    ]


def _subvarieties(m, s, ctx):
    F = ctx.fields
    kind = (m.provenance.get("generator") or {}).get("kind")
    dev = sv.integrability_deviations(F["Wb"], F["Ww"], gamma_field(m))
    three = [dev["im_wb"], dev["wb_minus_ww"], dev["gamma_product"]]
    if any(math.isnan(x) for x in three):
        raise WindowTooSmall("integrability indicators need W-variables and a full layer")
    lo, hi = TOL["integrable"] * s, CHANGE_THRESHOLD
    co = all(x < lo for x in three) or all(x > hi for x in three)
    details = {"im_wb": three[0], "wb_minus_ww": three[1], "gamma_product": three[2]}
    out = [Check("subvarieties.integrability_cooccurrence",
                 "real W, equal W colors and unit vertex gamma-products hold or fail together",
                 "max_below", 0.5, 1, 0.0 if co else 1.0, 0.0 if co else 1.0, 0.0 if co else 1.0, 0, details)]
    if kind in ("isoradial", "regular_grid"):
        out.append(_make("subvarieties.integrable", "the pattern is integrable", "max_below", lo, three))
        layers = [k for k in m.point_levels if k + 1 in m.point_levels and k + 2 in m.centers]
        zz = []
        for k in layers:
            r, n = sv.zigzag_permutation_residual(m, k)
            if n:
                zz.append(r)
        if zz:
            out.append(_make("subvarieties.zigzag", "each step permutes the zig-zag multipliers", "max_below",
                             TOL["zigzag"] * s, zz))
    elif kind == "generic":
        out.append(_make("subvarieties.non_integrable", "a generic pattern violates all three integrability indicators",
                         "min_above", hi, three))
    elif kind == "orthodiagonal":
        tol = TOL["harmonic"] * s
        out.append(_make("subvarieties.harmonic_xy", "black X mirrors Y across z3 = 0", "max_below", tol,
                         sv.harmonic_xy_residuals(F["Xb"], F["Y"]).values()))
        out.append(_make("subvarieties.resistor", "black X satisfies the resistor relation", "max_below", tol,
                         sv.resistor_residuals(F["Xb"]).values()))
        out.append(_make("subvarieties.focal", "black points obey the focal formulas", "max_below", tol,
                         sv.focal_residuals(m).values()))
    elif kind == "packing":
        tol = TOL["packing"] * s
        res = sv.s_symmetry_residuals(F)
        claims = {"y_product": "Y times its time reflection is 1",
                  "y_reflection": "Y equals its time reflection",
                  "x": "black X equals white X reflected in time",
                  "w": "black W equals white W reflected in time"}
        for key in ("y_product", "y_reflection", "x", "w"):
            out.append(_make(f"subvarieties.packing_{key}", claims[key], "max_below", tol, res[key].values()))
    return out


def _roundtrip(m, s, ctx):
    out = []
    scale = m.scale()
    tol = TOL["roundtrip"] * s
    k = ctx.rt_layer
    if k is None:
        raise WindowTooSmall("reconstruction needs three consecutive point levels")
    try:
        bd = y_boundary(ctx.t, m.shape, k)
        rec = reconstruct_from_y(ctx.fields["Y"].layer(k), bd, k)
        res = [abs(v - ctx.t[z]) / scale for z, v in rec.items() if z in ctx.t]
        missing = sum(1 for z in ctx.t if z[2] in (k, k + 1) and z not in rec)
    except SingularSolve:
        res, missing = [math.inf], 0
    out.append(_make("reconstruction_roundtrip.y", "centers are recovered from Y and boundary centers",
                     "max_below", tol, res, details={"layer": k, "unreached": missing}))
    for color, kind, pts in (("black", "Xb", ctx.pb), ("white", "Xw", ctx.pw)):
        try:
            bd = x_boundary(pts, color, m.shape, k)
            rec = reconstruct_from_x(ctx.fields[kind].layer(k), bd, color, k)
            res = [abs(v - pts[z]) / scale for z, v in rec.items() if z in pts]
        except SingularSolve:
            res = [math.inf]
        out.append(_make(f"reconstruction_roundtrip.{kind}", f"{color} points are recovered from {kind} and strips",
                         "max_below", tol, res, details={"layer": k}))
    return out


RUNNERS: dict[str, Callable] = {
    "incidence": _incidence,
    "miquel_residual": _miquel,
    "dskp_t": _dskp_t,
    "dskp_p": _dskp_p,
    "a4": _a4,
    "ysystem_all": _ysystem,
    "realness": _realness,
    "w_conjugacy": _conjugacy,
    "moebius_invariance": _moebius,
    "subvarieties": _subvarieties,
    "reconstruction_roundtrip": _roundtrip,
}


class _Context:
    """Lazily computed data shared between suites."""

    def __init__(self, m: MiquelMap):
        self.m = m
        self.t = extract_t(m)
        self.pb = extract_p(m, "black")
        self.pw = extract_p(m, "white")
        self._fields = None

    @property
    def fields(self) -> dict[str, VariableField]:
        if self._fields is None:
            self._fields = fields(self.m)
        return self._fields

    @property
    def rt_layer(self):
        """Layer used for round trips: among the k with points on k-1, k, k+1,
        the one with the most stored data (nearest to z3 = 0 on ties)."""
        lv = set(self.m.point_levels)
        ok = [k for k in sorted(lv) if k - 1 in lv and k + 1 in lv and k + 1 in self.m.centers]
        if not ok:
            return None
        count = lambda a: int(np.isfinite(a).sum())  # noqa: E731
        return max(ok, key=lambda k: (count(self.m.points[k]) + count(self.m.centers[k]) + count(self.m.centers[k + 1]),
                                      -abs(k), -k))


def parse_suites(spec: str | Iterable[str]) -> list[str]:
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    names = [n.strip() for n in names if n.strip()]
    if names == ["all"]:
        return list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    return [n for n in SUITES if n in names]


def run_suite(m: MiquelMap, suites: Iterable[str] = SUITES, tol_scale: float = 1.0,
              skip_inapplicable: bool = False) -> VerificationReport:
    """Run the selected suites in a fixed order and collect their checks.

    A suite without applicable sites raises ``WindowTooSmall``, unless
    ``skip_inapplicable`` is set; then it is listed as not applicable and
    ignored by the overall verdict.
    """
    if not tol_scale > 0:
        raise ValueError("tolerance scale must be positive")
    ctx = _Context(m)
    checks = []
    for name in parse_suites(suites):
        try:
            checks.extend(RUNNERS[name](m, tol_scale, ctx))
        except WindowTooSmall as exc:
            if not skip_inapplicable:
                raise
            checks.append(Check(name, str(exc), "max_below", 0.0, 0, math.nan, math.nan, math.nan,
                                applicable=False))
    return VerificationReport(map_id(m), float(tol_scale), tuple(checks))
