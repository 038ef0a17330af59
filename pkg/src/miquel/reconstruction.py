"""Rebuilding centers or same-color points of one layer from its variables.

Every relation used here has the shape ``value = c * prod (x - y) ** e`` over
lattice sites. Whenever a relation contains exactly one unknown site and
that site enters linear-fractionally, the relation is solved for it; the
relations are swept in a fixed order until nothing changes.

Layer k of the Y-variables consists of one value per vertex of the layer-k
pattern (z3 in {k-1, k}); the centers are solved outward from a boundary
of two rows plus the two side columns. Layer k of the X-variables lives on
z3 in {k, k+1}: the values with z3 = k+1 are cross-ratios of points on the
two levels k, k+1, the values with z3 = k are rewritten as eight-point
multi-ratios of the same two levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .circles import circumcircle, reflect_about_line
from .engine import MiquelMap, from_layer_arrays
from .errors import (
    CoincidentPoints,
    CollinearPoints,
    ConcyclicityViolated,
    InconsistentBoundary,
    MissingData,
    SingularSolve,
)
from .lattice import shift, vertex_tetrahedra
from .variables import VariableField

SOLVE_TOL = 1e-12
CONSISTENCY_TOL = 1e-7
CONCYCLIC_TOL = 1e-8

Site = tuple[int, int, int]

# eight-point rewrite of X at the lower level, as offsets (dz1, dz2, dz3)
X8_OFFSETS = {
    "black": ((1, -1, 0), (0, -1, 1), (0, -2, 0), (-1, -1, 0),
              (-2, 0, 0), (-1, 0, 1), (-1, 1, 0), (0, 0, 0)),
    "white": ((0, -1, 0), (-1, -2, 0), (-1, -1, 1), (-2, -1, 0),
              (-1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 0)),
}
X4_OPS = {
    "black": ([-1, -2], [-2, -3], [], [-1, -3]),
    "white": ([-1, -2, -3], [-2], [-3], [-1]),
}


@dataclass(frozen=True)
class Relation:
    """``value = const * prod (x - y) ** e`` with factors ``(x, y, e)``, e = +-1."""

    site: tuple
    value: complex
    const: complex
    factors: tuple

    @property
    def sites(self) -> set:
        return {s for x, y, _ in self.factors for s in (x, y)}

    def residual(self, known: Mapping) -> float:
        lhs = self.const
        for x, y, e in self.factors:
            lhs *= (known[x] - known[y]) ** e
        return abs(lhs - self.value) / max(abs(lhs), abs(self.value), 1e-300)


def mr_relation(site, value: complex, pts: list, sign: int = -1) -> Relation:
    """``value = sign * mr(pts)``."""
    n = len(pts)
    factors = []
    for i in range(0, n, 2):
        factors.append((pts[i], pts[i + 1], 1))
        factors.append((pts[i + 1], pts[(i + 2) % n], -1))
    return Relation(tuple(site), complex(value), complex(sign), tuple(factors))


def solve_relation(rel: Relation, known: Mapping, unknown) -> complex:
    """Solve ``rel`` for its single unknown site.

    Raises ValueError when the unknown does not enter linear-fractionally
    (it sits in more than one numerator or denominator factor).
    """
    K = rel.const
    num = den = None
    for x, y, e in rel.factors:
        if unknown in (x, y):
            other = known[y] if x == unknown else known[x]
            if x == unknown and y == unknown:
                raise ValueError("degenerate factor")
            # (x - y) = s * (u - other)
            s = 1 if x == unknown else -1
            K *= s ** e
            if e > 0:
                if num is not None:
                    raise ValueError("unknown is not linear-fractional")
                num = other
            else:
                if den is not None:
                    raise ValueError("unknown is not linear-fractional")
                den = other
        else:
            K *= (known[x] - known[y]) ** e
    V = rel.value
    scale = max(abs(K), abs(V), 1e-300)
    if num is not None and den is not None:
        # K (u - n) / (u - d) = V
        if abs(K - V) < SOLVE_TOL * scale:
            raise SingularSolve(f"coefficient vanishes solving relation at {rel.site} for {unknown}")
        return (K * num - V * den) / (K - V)
    if num is not None:
        if abs(K) < SOLVE_TOL * scale:
            raise SingularSolve(f"coefficient vanishes solving relation at {rel.site} for {unknown}")
        return num + V / K
    if den is not None:
        if abs(V) < SOLVE_TOL * scale:
            raise SingularSolve(f"coefficient vanishes solving relation at {rel.site} for {unknown}")
        return den + K / V
    raise ValueError(f"{unknown} does not occur in the relation")


def propagate(relations: list[Relation], boundary: Mapping, domain: Iterable | None = None) -> dict:
    """Fixed-point sweep: solve every relation with one unknown, in list order."""
    known = {tuple(k): complex(v) for k, v in boundary.items()}
    allowed = None if domain is None else set(domain)
    boundary_sites = set(known)
    for rel in relations:
        if rel.sites <= boundary_sites and rel.residual(known) > CONSISTENCY_TOL:
            raise InconsistentBoundary(f"boundary values violate the relation at {rel.site}")
    pending = list(relations)
    changed = True
    while changed and pending:
        changed = False
        rest = []
        for rel in pending:
            missing = [s for s in rel.sites if s not in known]
            if not missing:
                continue
            if len(missing) > 1 or (allowed is not None and missing[0] not in allowed):
                rest.append(rel)
                continue
            try:
                u = solve_relation(rel, known, missing[0])
            except ValueError:
                rest.append(rel)
                continue
            known[missing[0]] = complex(u)
            changed = True
        pending = rest
    # relations that were never used for a solve still have to hold
    for rel in relations:
        if rel.sites <= known.keys() and rel.residual(known) > CONSISTENCY_TOL:
            raise InconsistentBoundary(f"relation at {rel.site} is violated by the propagated values")
    return known


# ----------------------------------------------------------------- Y path


def y_site_of_vertex(a: int, b: int, k: int) -> Site:
    """The Y-variable attached to vertex (a, b) of the layer-k pattern."""
    return (a, b, k) if (a + b + k) % 2 == 0 else (a, b, k - 1)


def t_site_of_vertex(a: int, b: int, k: int) -> Site:
    return (a, b, k) if (a + b + k) % 2 == 0 else (a, b, k + 1)


def y_relations(y: VariableField | Mapping, k: int = 0) -> list[Relation]:
    """Conical-net relations of layer k, one per Y value, in lexicographic vertex order."""
    values = y.values if isinstance(y, VariableField) else y
    rels = []
    for z in sorted(values):
        a, b, lvl = z
        if lvl not in (k - 1, k) or y_site_of_vertex(a, b, k) != z:
            continue
        T = lambda da, db: t_site_of_vertex(a + da, b + db, k)  # noqa: E731
        c = T(0, 0)
        factors = ((T(1, 0), c, 1), (T(-1, 0), c, 1), (T(0, 1), c, -1), (T(0, -1), c, -1))
        rels.append(Relation(z, complex(values[z]), -1 + 0j, factors))
    return rels


def y_boundary(t: Mapping, shape: tuple[int, int], k: int = 0) -> dict:
    """Centers of the two lowest rows and the two side columns of layer k.

    Rows and columns are taken inside the box where vertices of both
    parities carry centers, so eroded layers get their own boundary.
    """
    n, m = shape
    boxes = []
    for par in (0, 1):
        ab = [(a, b) for a in range(n) for b in range(m)
              if (a + b) % 2 == par and t_site_of_vertex(a, b, k) in t]
        if not ab:
            return {}
        boxes.append((min(x[0] for x in ab), max(x[0] for x in ab), min(x[1] for x in ab), max(x[1] for x in ab)))
    a0, a1 = max(b[0] for b in boxes), min(b[1] for b in boxes)
    b0, b1 = max(b[2] for b in boxes), min(b[3] for b in boxes)
    out = {}
    for a in range(a0, a1 + 1):
        for b in range(b0, b1 + 1):
            if b in (b0, b0 + 1) or a in (a0, a1):
                s = t_site_of_vertex(a, b, k)
                if s in t:
                    out[s] = complex(t[s])
    return out


def _box(sites: Iterable, levels) -> list:
    sites = list(sites)
    if not sites:
        return []
    i0, i1 = min(s[0] for s in sites), max(s[0] for s in sites)
    j0, j1 = min(s[1] for s in sites), max(s[1] for s in sites)
    return [(a, b, lvl) for a in range(i0, i1 + 1) for b in range(j0, j1 + 1) for lvl in levels]


def reconstruct_from_y(y_layer: VariableField | Mapping, boundary: Mapping, k: int = 0) -> dict:
    """Centers of the layer-k pattern from its Y-variables and boundary centers.

    Only sites inside the bounding box of the boundary are solved for.
    """
    rels = y_relations(y_layer, k)
    if not rels:
        raise MissingData(f"no Y-variables of layer {k}")
    return propagate(rels, boundary, domain=_box(boundary, (k, k + 1)))


# ----------------------------------------------------------------- X path


def _add(z, d) -> Site:
    return (z[0] + d[0], z[1] + d[1], z[2] + d[2])


def x_relations(x: VariableField | Mapping, color: str, k: int = 0) -> list[Relation]:
    """Cross-ratio relations (z3 = k+1) and eight-point relations (z3 = k) of layer k."""
    values = x.values if isinstance(x, VariableField) else x
    rels = []
    for z in sorted(values):
        if sum(z) % 2:
            continue
        if z[2] == k + 1:
            pts = [shift(z, op) for op in X4_OPS[color]]
        elif z[2] == k:
            pts = [_add(z, d) for d in X8_OFFSETS[color]]
        else:
            continue
        rels.append(mr_relation(z, values[z], pts))
    return rels


def x_boundary(p_color: Mapping, color: str, shape: tuple[int, int], k: int = 0) -> dict:
    """Points on the two diagonal double strips z1 + z2 in {c, c+1}, z1 - z2 in {d, d+1}.

    The strips cross near the center of the window of faces.
    """
    n, m = shape
    fn, fm = n - 1, m - 1
    c = (fn - 1) // 2 + (fm - 1) // 2
    d = (fn - 1) // 2 - (fm - 1) // 2
    out = {}
    for a in range(fn):
        for b in range(fm):
            if (a + b) not in (c, c + 1) and (a - b) not in (d, d + 1):
                continue
            for lvl in (k, k + 1):
                s = (a, b, lvl)
                if (sum(s) % 2 == 0) == (color == "black") and s in p_color:
                    out[s] = complex(p_color[s])
    return out


def reconstruct_from_x(x_layer: VariableField | Mapping, boundary: Mapping, color: str = "black",
                       k: int = 0) -> dict:
    """Same-color points on levels k, k+1 from layer-k X-variables and boundary points.

    Only sites inside the bounding box of the boundary are solved for.
    """
    rels = x_relations(x_layer, color, k)
    if not rels:
        raise MissingData(f"no X-variables of layer {k}")
    return propagate(rels, boundary, domain=_box(boundary, (k, k + 1)))


# ----------------------------------------------------------------- completion


def _extend_down(p_color: dict, color: str, k: int) -> dict:
    """Same-color points on level k-1 from the dSKP relation of the octahedra at level k."""
    par = 1 if color == "black" else 0
    rels = []
    for z in sorted(p_color):
        if z[2] != k:
            continue
        o = z  # same-color point sites are opposite parity to the octahedron
        for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)):
            c = _add(o, d)
            if sum(c) % 2 != par:
                continue
            pts = [shift(c, [s]) for s in (1, 2, 3, -1, -2, -3)]
            rels.append(mr_relation(c, -1, pts, sign=1))
    rels = sorted(set(rels), key=lambda r: r.site)
    down = {s for r in rels for s in r.sites if s[2] == k - 1}
    return propagate(rels, p_color, domain=down)


def complete_map_from_pcolor(p_color: Mapping, color: str = "black", k: int = 0,
                             shape: tuple[int, int] | None = None,
                             tol: float = CONCYCLIC_TOL) -> MiquelMap:
    """The layer-k Miquel map determined by same-color points on levels k, k+1."""
    pts = {tuple(s): complex(v) for s, v in p_color.items() if s[2] in (k, k + 1)}
    if not pts:
        raise MissingData(f"no points on levels {k}, {k + 1}")
    if shape is None:
        shape = (1 + max(s[0] for s in pts) + 1, 1 + max(s[1] for s in pts) + 1)
    n, m = shape
    ext = _extend_down(pts, color, k)
    black = color == "black"
    centers = np.full((n, m), np.nan, complex)
    radii = np.full((n, m), np.nan)
    for a in range(n):
        for b in range(m):
            v = t_site_of_vertex(a, b, k)
            tets = [T.z for T in vertex_tetrahedra(v)]
            tets = tets[:4] if black else tets[4:]
            # faces around the vertex in order p12, p23, p34, p41
            around = [T for T in tets if T in ext]
            if len(around) < 3:
                continue
            vals = [ext[T] for T in around]
            try:
                c = circumcircle(*vals[:3])
            except (CollinearPoints, CoincidentPoints) as exc:
                raise ConcyclicityViolated(v, float("inf")) from exc
            if len(vals) == 4:
                res = abs(abs(vals[3] - c.center) - c.radius) / c.radius
                if res > tol:
                    raise ConcyclicityViolated(v, float(res))
            centers[a, b], radii[a, b] = c.center, c.radius
    points = np.full((n, m), np.nan, complex)
    for a in range(n - 1):
        for b in range(m - 1):
            s = (a, b, k)
            if s in ext:
                points[a, b] = ext[s]
                continue
            points[a, b] = _reflected(ext, centers, a, b, k)
    return from_layer_arrays(centers, radii, points, k)


def _reflected(ext: Mapping, centers: np.ndarray, a: int, b: int, k: int) -> complex:
    """Point of face (a, b) from a neighbor face across their shared edge."""
    n, m = centers.shape
    # neighbor face, and the two vertices of the shared edge
    for nb, e1, e2 in (((a + 1, b), (a + 1, b), (a + 1, b + 1)),
                       ((a - 1, b), (a, b), (a, b + 1)),
                       ((a, b + 1), (a, b + 1), (a + 1, b + 1)),
                       ((a, b - 1), (a, b), (a + 1, b))):
        q = ext.get((nb[0], nb[1], k))
        if q is None or not all(0 <= e[0] < n and 0 <= e[1] < m for e in (e1, e2)):
            continue
        c1, c2 = centers[e1], centers[e2]
        if np.isfinite(c1) and np.isfinite(c2) and c1 != c2:
            return reflect_about_line(q, complex(c1), complex(c2))
    return complex(np.nan, np.nan)
