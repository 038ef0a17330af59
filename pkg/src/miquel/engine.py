"""Miquel maps on a finite window and their evolution in both time directions.

A map stores, for every level z3, an (N, M) array of circle centers and radii
indexed by (z1, z2) and an (N, M) array of intersection points indexed by the
tetrahedron (z1, z2, z3). Missing entries are NaN. Circles at level k only
occupy sites with z1 + z2 + k even; points may occupy every site.

The circle pattern of layer k has c_k(i, j) = c(i, j, k) for i + j + k even,
c(i, j, k + 1) otherwise, and p_k(i, j) = p(i, j, k) on face (i, j) with
corners (i, j), (i+1, j), (i, j+1), (i+1, j+1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .circles import Circle, circle_intersections, circumcircle_array, on_circle, reflect_array
from .errors import (
    DegenerateOctahedron,
    LayerNotCovered,
    MiquelResidualExceeded,
    NoCommonPoint,
    WindowExhausted,
)
from .lattice import Window

MIQUEL_TOL = 1e-8
COMMON_POINT_TOL = 1e-9
COLLINEAR_CENTERS_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MiquelMap:
    shape: tuple[int, int]
    centers: Mapping[int, np.ndarray]
    radii: Mapping[int, np.ndarray]
    points: Mapping[int, np.ndarray]
    provenance: Mapping = field(default_factory=dict)
    log: tuple = ()

    def __post_init__(self):
        n, m = self.shape
        for name in ("centers", "radii", "points"):
            store = {int(k): _frozen(v) for k, v in sorted(getattr(self, name).items())}
            for k, v in store.items():
                if v.shape != (n, m):
                    raise ValueError(f"{name}[{k}] has shape {v.shape}, expected {(n, m)}")
            object.__setattr__(self, name, store)
        object.__setattr__(self, "shape", (int(n), int(m)))

    # ------------------------------------------------------------ access

    @property
    def circle_levels(self) -> list[int]:
        return [k for k, v in self.centers.items() if np.isfinite(v).any()]

    @property
    def point_levels(self) -> list[int]:
        return [k for k, v in self.points.items() if np.isfinite(v).any()]

    def circle(self, z) -> Circle | None:
        i, j, k = z
        c = self._get(self.centers, i, j, k)
        if c is None:
            return None
        return Circle(c, float(self.radii[k][i, j]))

    def point(self, T) -> complex | None:
        return self._get(self.points, *T)

    def _get(self, store, i, j, k):
        a = store.get(k)
        if a is None or not (0 <= i < self.shape[0] and 0 <= j < self.shape[1]):
            return None
        v = a[i, j]
        return None if np.isnan(v) else complex(v)

    def gather(self, store: str, I, J, K) -> np.ndarray:
        """Vectorized lookup; out-of-window or missing sites give NaN."""
        data = getattr(self, store)
        I, J, K = np.broadcast_arrays(np.asarray(I), np.asarray(J), np.asarray(K))
        dtype = float if store == "radii" else complex
        out = np.full(I.shape, np.nan, dtype=dtype)
        inside = (I >= 0) & (I < self.shape[0]) & (J >= 0) & (J < self.shape[1])
        for k in np.unique(K[inside]) if inside.any() else []:
            a = data.get(int(k))
            if a is None:
                continue
            sel = inside & (K == k)
            out[sel] = a[I[sel], J[sel]]
        return out

    def t_at(self, I, J, K) -> np.ndarray:
        return self.gather("centers", I, J, K)

    def p_at(self, I, J, K) -> np.ndarray:
        return self.gather("points", I, J, K)

    @property
    def window(self) -> Window:
        """Bounding boxes of stored circles per level."""
        ranges = {}
        for k in self.circle_levels:
            ii, jj = np.nonzero(np.isfinite(self.centers[k]))
            ranges[k] = (int(ii.min()), int(ii.max()), int(jj.min()), int(jj.max()))
        return Window(ranges)

    def scale(self) -> float:
        """Diameter of the bounding box of all stored centers and points."""
        vals = [v[np.isfinite(v)] for v in list(self.centers.values()) + list(self.points.values())]
        allv = np.concatenate(vals) if vals else np.zeros(1, complex)
        if allv.size == 0:
            return 1.0
        d = max(np.ptp(allv.real), np.ptp(allv.imag))
        return float(d) if d > 0 else 1.0

    def replace(self, **kw) -> "MiquelMap":
        args = dict(shape=self.shape, centers=self.centers, radii=self.radii,
                    points=self.points, provenance=self.provenance, log=self.log)
        args.update(kw)
        return MiquelMap(**args)

    def restrict(self, circle_levels, point_levels) -> "MiquelMap":
        return self.replace(
            centers={k: v for k, v in self.centers.items() if k in circle_levels},
            radii={k: v for k, v in self.radii.items() if k in circle_levels},
            points={k: v for k, v in self.points.items() if k in point_levels},
        )


@dataclass(frozen=True)
class CirclePatternLayer:
    k: int
    circles: dict
    points: dict

    @property
    def shape(self) -> tuple[int, int]:
        n = 1 + max(a for a, _ in self.circles)
        m = 1 + max(b for _, b in self.circles)
        return n, m


def _grid(n, m):
    return np.meshgrid(np.arange(n), np.arange(m), indexing="ij")


def _empty(n, m, dtype=complex):
    return np.full((n, m), np.nan, dtype=dtype)


# ----------------------------------------------------------------- construction


def from_circle_pattern(circles, branch_choices=None, k: int = 0, provenance=None) -> MiquelMap:
    """Build the map of one layer from a grid of circles.

    ``circles`` is a nested sequence or dict keyed by (i, j). For each face
    the point is one of the two intersections of its bottom circles; it is
    the one lying on all four circles, or the one selected by the face's bit
    (0 = left of the line from c(i, j) to c(i+1, j)).
    """
    if isinstance(circles, Mapping):
        grid = dict(circles)
    else:
        grid = {(i, j): c for i, row in enumerate(circles) for j, c in enumerate(row)}
    n = 1 + max(i for i, _ in grid)
    m = 1 + max(j for _, j in grid)
    lo_c, lo_r = _empty(n, m), _empty(n, m, float)
    hi_c, hi_r = _empty(n, m), _empty(n, m, float)
    for (i, j), c in grid.items():
        if c is None:
            continue
        tc, tr = (lo_c, lo_r) if (i + j + k) % 2 == 0 else (hi_c, hi_r)
        tc[i, j] = c.center
        tr[i, j] = c.radius
    pts = _empty(n, m)
    for i in range(n - 1):
        for j in range(m - 1):
            corners = [grid.get(q) for q in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1))]
            if any(c is None for c in corners):
                continue
            cand = circle_intersections(corners[0], corners[1])
            common = [all(on_circle(c, p, COMMON_POINT_TOL) for c in corners[2:]) for p in cand]
            if branch_choices is not None:
                bit = int(branch_choices[i][j])
                if not common[bit]:
                    raise NoCommonPoint(f"face {(i, j)}: selected branch is not on all four circles")
                pts[i, j] = cand[bit]
            elif common[0]:
                pts[i, j] = cand[0]
            elif common[1]:
                pts[i, j] = cand[1]
            else:
                raise NoCommonPoint(f"the four circles of face {(i, j)} share no point")
    return MiquelMap((n, m), {k: lo_c, k + 1: hi_c}, {k: lo_r, k + 1: hi_r}, {k: pts},
                     provenance=dict(provenance or {}))


def from_layer_arrays(centers: np.ndarray, radii: np.ndarray, points: np.ndarray, k: int = 0,
                      provenance=None) -> MiquelMap:
    """Build a single-layer map from (N, M) arrays of a circle pattern."""
    n, m = centers.shape
    I, J = _grid(n, m)
    even = (I + J + k) % 2 == 0
    lo_c = np.where(even, centers, np.nan)
    hi_c = np.where(even, np.nan, centers)
    lo_r = np.where(even, radii, np.nan)
    hi_r = np.where(even, np.nan, radii)
    pts = _empty(n, m)
    pts[:-1, :-1] = points[: n - 1, : m - 1]
    return MiquelMap((n, m), {k: lo_c, k + 1: hi_c}, {k: lo_r, k + 1: hi_r}, {k: pts},
                     provenance=dict(provenance or {}))


# ----------------------------------------------------------------- dynamics


def _collinear_mask(cols: list[np.ndarray]) -> np.ndarray:
    """True where all finite points of the column stack lie on one line."""
    P = np.stack(cols)
    ok = np.isfinite(P)
    cnt = ok.sum(axis=0)
    Pz = np.where(ok, P, 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = Pz.sum(axis=0) / np.maximum(cnt, 1)
        d = np.where(ok, P - mean, 0)
        S = np.abs((d * d).sum(axis=0))
        T = (np.abs(d) ** 2).sum(axis=0)
        small = np.sqrt(np.maximum(T - S, 0) / np.maximum(T + S, 1e-300))
    return (cnt >= 3) & (small < COLLINEAR_CENTERS_TOL)


def evolve_step(m: MiquelMap, direction: str = "forward", tol: float = MIQUEL_TOL) -> MiquelMap:
    """One Miquel step from the top (forward) or bottom (backward) layer of ``m``."""
    fwd = _direction(direction)
    n, mm = m.shape
    levels = m.point_levels
    if not levels:
        raise WindowExhausted("map stores no points")
    k = levels[-1] if fwd else levels[0]
    kept_level = k + 1 if fwd else k
    if kept_level not in m.centers:
        raise LayerNotCovered(f"circles at level {kept_level} are missing")
    P = m.points[k]
    Ck, Rk = m.centers[kept_level], m.radii[kept_level]
    I, J = _grid(n - 1, mm - 1)
    f = (I + J + k) % 2 == 0
    A, B, C, D = Ck[:-1, :-1], Ck[1:, :-1], Ck[:-1, 1:], Ck[1:, 1:]
    rA, rB, rC, rD = Rk[:-1, :-1], Rk[1:, :-1], Rk[:-1, 1:], Rk[1:, 1:]
    use_bc = f if fwd else ~f
    c1 = np.where(use_bc, B, A)
    c2 = np.where(use_bc, C, D)
    rad = np.where(use_bc, np.fmin(rB, rC), np.fmin(rA, rD))
    new_level = k + 1 if fwd else k - 1
    newP = _empty(n, mm)
    newP[:-1, :-1] = reflect_array(P[:-1, :-1], c1, c2, rad)

    # new circles through the four new points around each replaced vertex
    circle_level = k + 2 if fwd else k - 1
    p12 = newP[1:-1, 1:-1]
    p23 = newP[:-2, 1:-1]
    p34 = newP[:-2, :-2]
    p41 = newP[1:-1, :-2]
    Iv, Jv = _grid(n - 2, mm - 2)
    Iv, Jv = Iv + 1, Jv + 1
    replaced = (Iv + Jv + circle_level) % 2 == 0
    valid = replaced & np.isfinite(p12) & np.isfinite(p23) & np.isfinite(p34) & np.isfinite(p41)
    if not valid.any():
        raise WindowExhausted(f"no octahedron left to update at level {circle_level}")
    cen, rad_new, degenerate = circumcircle_array(p12, p23, p34)
    old_level = k if fwd else k + 1
    old = m.centers.get(old_level, _empty(n, mm))[1:-1, 1:-1]
    nb = [Ck[2:, 1:-1], Ck[:-2, 1:-1], Ck[1:-1, 2:], Ck[1:-1, :-2]]
    degenerate = degenerate | _collinear_mask(nb + [old])
    for a, b in np.argwhere(valid & degenerate):
        raise DegenerateOctahedron((int(a) + 1, int(b) + 1, circle_level + (-1 if fwd else 1)))
    with np.errstate(invalid="ignore", divide="ignore"):
        resid = np.abs(np.abs(p41 - cen) - rad_new) / rad_new
    resid = np.where(valid, resid, 0.0)
    bad = np.argwhere(resid > tol)
    if len(bad):
        a, b = bad[0]
        raise MiquelResidualExceeded((int(a) + 1, int(b) + 1, circle_level + (-1 if fwd else 1)),
                                     float(resid[a, b]), tol)
    newC = _empty(n, mm)
    newR = _empty(n, mm, float)
    newC[1:-1, 1:-1] = np.where(valid, cen, np.nan)
    newR[1:-1, 1:-1] = np.where(valid, rad_new, np.nan)
    centers = dict(m.centers)
    radii = dict(m.radii)
    points = dict(m.points)
    centers[circle_level] = newC
    radii[circle_level] = newR
    points[new_level] = newP
    entry = {"direction": "forward" if fwd else "backward", "circle_level": circle_level,
             "octahedra": int(valid.sum()), "max_residual": float(resid.max())}
    return m.replace(centers=centers, radii=radii, points=points, log=m.log + (entry,))


def evolve(m: MiquelMap, steps: int, direction: str = "forward", tol: float = MIQUEL_TOL) -> MiquelMap:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    for _ in range(steps):
        m = evolve_step(m, direction, tol)
    return m


def _direction(direction: str) -> bool:
    if direction in ("forward", "fwd", "+"):
        return True
    if direction in ("backward", "bwd", "-"):
        return False
    raise ValueError(f"unknown direction {direction!r}")


# ----------------------------------------------------------------- extraction


def extract_t(m: MiquelMap) -> dict:
    out = {}
    for k, a in m.centers.items():
        for i, j in np.argwhere(np.isfinite(a)):
            out[(int(i), int(j), k)] = complex(a[i, j])
    return out


def extract_p(m: MiquelMap, color: str) -> dict:
    want = {"black": 0, "white": 1}[color]
    out = {}
    for k, a in m.points.items():
        for i, j in np.argwhere(np.isfinite(a)):
            if (i + j + k) % 2 == want:
                out[(int(i), int(j), k)] = complex(a[i, j])
    return out


def layer_arrays(m: MiquelMap, k: int):
    """(centers, radii, points) arrays of the layer-k circle pattern."""
    if k not in m.centers or k + 1 not in m.centers or k not in m.points:
        raise LayerNotCovered(f"layer {k} needs circles at {k}, {k + 1} and points at {k}")
    n, mm = m.shape
    I, J = _grid(n, mm)
    even = (I + J + k) % 2 == 0
    c = np.where(even, m.centers[k], m.centers[k + 1])
    r = np.where(even, m.radii[k], m.radii[k + 1])
    return c, r, np.array(m.points[k])


def layer(m: MiquelMap, k: int) -> CirclePatternLayer:
    c, r, p = layer_arrays(m, k)
    circles = {(int(i), int(j)): Circle(c[i, j], r[i, j]) for i, j in np.argwhere(np.isfinite(c))}
    points = {(int(i), int(j)): complex(p[i, j]) for i, j in np.argwhere(np.isfinite(p))}
    if not circles:
        raise LayerNotCovered(f"layer {k} is empty")
    return CirclePatternLayer(k, circles, points)


def layer_map(m: MiquelMap, k: int) -> MiquelMap:
    """The sub-map holding only the layer-k circle pattern."""
    layer_arrays(m, k)
    return m.restrict({k, k + 1}, {k})
