"""Constructors for the pattern classes: generic, isoradial, orthodiagonal, packing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circles import Circle, circle_intersections, circumcircle, circumcircle_array
from .engine import MiquelMap, evolve, from_layer_arrays
from .errors import (
    CircleThroughInfinity,
    CoincidentPoints,
    CollinearPoints,
    DegenerateRhombus,
    DisjointCircles,
    FoldedQuad,
    PoleInsidePattern,
    RetryExhausted,
)
from .projective import IDENTITY, MoebiusTransform

KINDS = ("generic", "isoradial", "orthodiagonal", "packing")
MAX_RETRIES = 64
R0 = math.sqrt(0.5)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "generic"
    dims: tuple[int, int] = (12, 12)
    seed: int = 0
    params: dict = field(default_factory=dict)
    moebius: tuple | None = None
    steps: int = 0
    back_steps: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        n, m = self.dims
        if n < 4 or m < 4:
            raise ValueError("windows must be at least 4 x 4")
        object.__setattr__(self, "dims", (int(n), int(m)))

    def to_dict(self) -> dict:
        params = {k: _jsonable(v) for k, v in sorted(self.params.items())}
        return {
            "kind": self.kind,
            "dims": list(self.dims),
            "seed": int(self.seed),
            "params": params,
            "moebius": None if self.moebius is None else [[complex(c).real, complex(c).imag] for c in self.moebius],
            "steps": self.steps,
            "back_steps": self.back_steps,
        }


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _complex_list(v) -> list[complex]:
    out = []
    for x in v:
        if isinstance(x, (list, tuple)):
            out.append(complex(x[0], x[1]))
        else:
            out.append(complex(x))
    return out


def generate(spec: GeneratorSpec) -> MiquelMap:
    """Build the layer-0 pattern described by ``spec``, deform it and evolve it as requested."""
    builders = {"generic": gen_generic, "isoradial": _isoradial_from_spec,
                "orthodiagonal": gen_orthodiagonal, "packing": gen_packing}
    m = builders[spec.kind](spec)
    return m


def _finish(m: MiquelMap, spec: GeneratorSpec) -> MiquelMap:
    if spec.moebius is not None:
        m = apply_moebius(m, MoebiusTransform(*_complex_list(spec.moebius)))
    m = evolve(m, spec.back_steps, "backward")
    m = evolve(m, spec.steps, "forward")
    return m.replace(provenance={"generator": spec.to_dict()})


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    """Independent PCG64 streams, one per row."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


# ------------------------------------------------------------------ generic


def regular_grid(n: int, m: int) -> MiquelMap:
    """Orthogonal grid: radius sqrt(1/2) circles on Z^2, points at the face centers."""
    I, J = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    centers = I + 1j * J
    points = (I + 0.5) + 1j * (J + 0.5)
    return from_layer_arrays(centers.astype(complex), np.full((n, m), R0), points,
                             provenance={"generator": {"kind": "regular_grid", "dims": [n, m]}})


def _bisector_center(p: complex, q: complex, target: complex) -> complex:
    """Point of the perpendicular bisector of pq closest to ``target``."""
    mid = 0.5 * (p + q)
    u = 1j * (q - p) / abs(q - p)
    return mid + u * ((target - mid) * u.conjugate()).real


def _vertex_quads(n: int, m: int) -> np.ndarray:
    """Flat face indices (f12, f23, f34, f41) around every interior vertex."""
    fm = m - 1
    quads = []
    for a in range(1, n - 1):
        for b in range(1, m - 1):
            quads.append((a * fm + b, (a - 1) * fm + b, (a - 1) * fm + b - 1, a * fm + b - 1))
    return np.array(quads, dtype=int).reshape(-1, 4)


def _concyclic_project(P: np.ndarray, quads: np.ndarray, iters: int = 30, tol: float = 1e-14) -> np.ndarray:
    """Minimum-norm Gauss-Newton projection onto arg cr(quad) in {0, pi}."""
    x = P.astype(complex).copy()
    rows = np.repeat(np.arange(len(quads)), 4)
    for _ in range(iters):
        a, b, c, d = (x[quads[:, i]] for i in range(4))
        cr = (a - b) * (c - d) / ((b - c) * (d - a))
        F = np.angle(cr * np.sign(cr.real))
        if np.max(np.abs(F), initial=0.0) < tol:
            return x
        # d arg(cr) = Im(L dz) for each moving point
        L = np.stack([1 / (a - b) + 1 / (d - a), -1 / (a - b) - 1 / (b - c),
                      1 / (c - d) + 1 / (b - c), -1 / (c - d) - 1 / (d - a)], axis=1)
        Jx = np.zeros((len(quads), x.size))
        Jy = np.zeros((len(quads), x.size))
        np.add.at(Jx, (rows, quads.ravel()), L.imag.ravel())
        np.add.at(Jy, (rows, quads.ravel()), L.real.ravel())
        step = np.linalg.lstsq(np.hstack([Jx, Jy]), F, rcond=None)[0]
        x = x - (step[: x.size] + 1j * step[x.size:])
    raise RetryExhausted("concyclicity projection did not converge")


def _generic_layer(n: int, m: int, s: float, rng: np.random.Generator):
    """Generic circle pattern near the orthogonal grid.

    Face points are jittered and then projected onto the concyclicity
    constraints of the interior vertices; interior circles are the resulting
    circumcircles, edge circles pass through their two points with a jittered
    center, corner circles through their single point.
    """
    fi, fj = np.meshgrid(np.arange(n - 1), np.arange(m - 1), indexing="ij")
    quads = _vertex_quads(n, m)
    for _ in range(MAX_RETRIES):
        noise = rng.uniform(-1, 1, fi.size) + 1j * rng.uniform(-1, 1, fi.size)
        P0 = (fi + 0.5 + 1j * (fj + 0.5)).ravel() + 0.12 * s * noise
        try:
            Pf = _concyclic_project(P0, quads)
        except RetryExhausted:
            continue
        gaps = np.abs(Pf.reshape(n - 1, m - 1)[1:, :] - Pf.reshape(n - 1, m - 1)[:-1, :])
        if gaps.min() > 0.3:
            break
    else:
        raise RetryExhausted("could not draw a well-conditioned generic pattern")
    P = np.full((n, m), np.nan, complex)
    P[:-1, :-1] = Pf.reshape(n - 1, m - 1)
    C = np.full((n, m), np.nan, complex)
    R = np.full((n, m), np.nan)
    vi, vj = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    nominal = vi + 1j * vj + 0.05 * s * (rng.uniform(-1, 1, (n, m)) + 1j * rng.uniform(-1, 1, (n, m)))
    for a in range(n):
        for b in range(m):
            faces = [(a, b), (a - 1, b), (a - 1, b - 1), (a, b - 1)]
            pts = [P[f] for f in faces if 0 <= f[0] < n - 1 and 0 <= f[1] < m - 1]
            if len(pts) == 4:
                c = circumcircle(pts[0], pts[1], pts[2])
                C[a, b], R[a, b] = c.center, c.radius
            elif len(pts) == 2:
                C[a, b] = _bisector_center(pts[0], pts[1], nominal[a, b])
                R[a, b] = abs(pts[0] - C[a, b])
            else:
                C[a, b] = nominal[a, b]
                R[a, b] = abs(pts[0] - C[a, b])
    return C, R, P


def gen_generic(spec: GeneratorSpec) -> MiquelMap:
    n, m = spec.dims
    s = float(spec.params.get("perturbation", 1.0))
    C, R, P = _generic_layer(n, m, s, _streams(spec.seed, 1)[0])
    return _finish(from_layer_arrays(C, R, P), spec)


# ------------------------------------------------------------------ moebius


def apply_moebius(m: MiquelMap, M: MoebiusTransform, tol: float = 1e-9) -> MiquelMap:
    """Push every circle and point of the map forward by ``M``."""
    if M == IDENTITY:
        return m
    centers, radii, points = {}, {}, {}
    pole = M.pole
    for k, c in m.centers.items():
        r = m.radii[k]
        ok = np.isfinite(c)
        if isinstance(pole, complex):
            off = np.abs(np.abs(pole - c) - r) <= tol * r
            if (ok & off).any():
                i, j = np.argwhere(ok & off)[0]
                raise CircleThroughInfinity(f"pole {pole} lies on circle {(int(i), int(j), k)}")
        imgs = [M.apply_array(c + r * np.exp(1j * a)) for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
        cen, rad, _ = circumcircle_array(*imgs)
        centers[k] = np.where(ok, cen, np.nan)
        radii[k] = np.where(ok, rad, np.nan)
    for k, p in m.points.items():
        points[k] = M.apply_array(p)
    prov = dict(m.provenance)
    return m.replace(centers=centers, radii=radii, points=points, provenance=prov)


# ------------------------------------------------------------------ isoradial


def _vertex_qg(a, b, n):
    """Quad-graph coordinates of vertex (a, b) of an n-row window."""
    return a + b, b - a + n - 1


def _face_qg(i, j, n):
    return i + j + 1, j - i + n - 1


def gen_isoradial(u, v, dims: tuple[int, int] | None = None, tol: float = 1e-9) -> MiquelMap:
    """Isoradial pattern with unit radius from the unit numbers of the zig-zags.

    Every vertex and face gets a position in the rhombic embedding
    pos(m, n) = sum(u[:m]) + sum(v[:n]); circles sit at the vertex positions
    and pass through the four neighbouring face positions. Both ``u`` and
    ``v`` need ``n + m - 2`` entries for an ``(n, m)`` window.
    """
    u = np.asarray(_complex_list(u), dtype=complex)
    v = np.asarray(_complex_list(v), dtype=complex)
    if dims is None:
        # n + m - 2 = len(u); default to the square window
        total = len(u) + 2
        dims = (total // 2, total - total // 2)
    n, m = dims
    if len(u) != n + m - 2 or len(v) != n + m - 2:
        raise ValueError(f"a {n}x{m} window needs {n + m - 2} zig-zag numbers per family")
    if np.any(np.abs(np.abs(u) - 1) > 1e-14) or np.any(np.abs(np.abs(v) - 1) > 1e-14):
        raise ValueError("zig-zag numbers must have modulus 1")
    U = np.concatenate([[0], np.cumsum(u)])
    V = np.concatenate([[0], np.cumsum(v)])
    I, J = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    mv, nv = _vertex_qg(I, J, n)
    centers = U[mv] + V[nv]
    mf, nf = _face_qg(I[:-1, :-1], J[:-1, :-1], n)
    points = np.full((n, m), np.nan, complex)
    points[:-1, :-1] = U[mf] + V[nf]
    # adjacent circles must not coincide: u[a+b] != v[...] along every edge
    dh = np.abs(centers[1:, :] - centers[:-1, :])
    dv = np.abs(centers[:, 1:] - centers[:, :-1])
    for d in (dh, dv):
        if d.min() < tol:
            a, b = np.unravel_index(np.argmin(d), d.shape)
            raise DegenerateRhombus(f"rhombus at vertex {(int(a), int(b))} is flat")
    return from_layer_arrays(centers, np.ones((n, m)), points)


def random_zigzags(n: int, m: int, seed: int, spread: float = 0.35) -> tuple[np.ndarray, np.ndarray]:
    """Zig-zag numbers scattered around 1 (u) and i (v)."""
    ru, rv = _streams(seed, 2)
    u = np.exp(1j * ru.uniform(-spread, spread, n + m - 2))
    v = np.exp(1j * (0.5 * math.pi + rv.uniform(-spread, spread, n + m - 2)))
    return u, v


def _isoradial_from_spec(spec: GeneratorSpec) -> MiquelMap:
    n, m = spec.dims
    if "u" in spec.params or "v" in spec.params:
        u, v = spec.params["u"], spec.params["v"]
    else:
        u, v = random_zigzags(n, m, spec.seed, float(spec.params.get("spread", 0.35)))
    return _finish(gen_isoradial(u, v, (n, m)), spec)


# ------------------------------------------------------------------ h-Miquel


def _orthodiagonal_points(n: int, m: int, eps: float, rng: np.random.Generator) -> dict:
    """Black points on faces -1..n-1 x -1..m-1 (i + j even) forming orthodiagonal quads.

    The first two columns are jittered grid points; every later point E of a
    quad (W, S, E, N) around an odd face lies on the line through W
    perpendicular to SN, at a jittered multiple of the reflection distance.
    """
    q = {}
    rows = range(-1, m)

    def nominal(i, j):
        z = (i + 0.5) + 1j * (j + 0.5)
        return z + eps * 0.04 * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))

    for i in range(-1, n):
        for j in rows:
            if (i + j) % 2:
                continue
            W, S, N = q.get((i - 2, j)), q.get((i - 1, j - 1)), q.get((i - 1, j + 1))
            if W is None or S is None or N is None:
                q[(i, j)] = nominal(i, j)
                continue
            d = N - S
            foot = S + ((W - S) * d.conjugate()).real / abs(d) ** 2 * d
            lam = 2 * (1 + 0.04 * eps * rng.uniform(-1, 1))
            q[(i, j)] = W + lam * (foot - W)
    return q


def _segment_crossing(a, b, c, d):
    """Intersection of segments ab and cd with the parameters along each."""
    r, s = b - a, d - c
    den = (r.conjugate() * s).imag
    if den == 0:
        return None, -1.0, -1.0
    t = ((c - a).conjugate() * s).imag / den
    w = ((c - a).conjugate() * r).imag / den
    return a + t * r, t, w


def gen_orthodiagonal(spec: GeneratorSpec) -> MiquelMap:
    """h-Miquel map: every odd face of layer 0 carries a rectangle of centers."""
    n, m = spec.dims
    eps = float(spec.params.get("perturbation", 1.0))
    rng = _streams(spec.seed, 1)[0]
    for _ in range(MAX_RETRIES):
        q = _orthodiagonal_points(n, m, eps, rng)
        points = np.full((n, m), np.nan, complex)
        folded = False
        for i in range(n - 1):
            for j in range(m - 1):
                if (i + j) % 2 == 0:
                    points[i, j] = q[(i, j)]
                    continue
                x, t, w = _segment_crossing(q[(i - 1, j)], q[(i + 1, j)], q[(i, j - 1)], q[(i, j + 1)])
                if not (0 < t < 1 and 0 < w < 1):
                    folded = True
                    break
                points[i, j] = x
            if folded:
                break
        if not folded:
            break
    else:
        raise FoldedQuad("orthodiagonal quads kept folding")
    centers = np.full((n, m), np.nan, complex)
    radii = np.full((n, m), np.nan)
    for a in range(n):
        for b in range(m):
            p1, p2 = (q[(a, b)], q[(a - 1, b - 1)]) if (a + b) % 2 == 0 else (q[(a - 1, b)], q[(a, b - 1)])
            centers[a, b] = 0.5 * (p1 + p2)
            radii[a, b] = 0.5 * abs(p1 - p2)
    return _finish(from_layer_arrays(centers, radii, points), spec)


def rectangle_residual(m: MiquelMap) -> float:
    """Max deviation from a rectangle of the four centers around the odd faces of layer 0."""
    worst = 0.0
    n, mm = m.shape
    for a in range(n - 1):
        for b in range(mm - 1):
            if (a + b) % 2 == 0:
                continue
            ts = [m.circle(z) for z in ((a, b, 1), (a + 1, b, 0), (a + 1, b + 1, 1), (a, b + 1, 0))]
            if any(c is None for c in ts):
                continue
            A, B, C, D = (c.center for c in ts)
            scale = max(abs(C - A), abs(D - B))
            # parallelogram with equal diagonals
            worst = max(worst, abs(A + C - B - D) / scale, abs(abs(C - A) - abs(D - B)) / scale)
    return worst


# ------------------------------------------------------------------ s-Miquel


def _packing_layer(n: int, m: int, s: float, rng: np.random.Generator):
    """Square-grid circle packing on the even vertices, built row by row.

    Circles with a + b even touch their four diagonal neighbours. Row 0 is
    free; every later circle gets a random radius and is placed tangent to
    its two lower diagonal neighbours (one neighbour at the window edge).
    The odd circles pass through the tangency points; four circles touching
    in a cycle always have concyclic contact points.
    """
    C = np.full((n, m), np.nan, complex)
    R = np.full((n, m), np.nan)
    jitter = lambda: 0.05 * s * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))  # noqa: E731
    for b in range(m):
        for a in range(n):
            if (a + b) % 2:
                continue
            r = R0 * (1 + 0.15 * s * rng.uniform(-1, 1))
            nominal = a + 1j * b + jitter()
            below = [(x, b - 1) for x in (a - 1, a + 1) if 0 <= x < n and b > 0]
            if len(below) == 2:
                (c1, r1), (c2, r2) = [(C[q], R[q]) for q in below]
                try:
                    hits = circle_intersections(Circle(c1, r1 + r), Circle(c2, r2 + r))
                except DisjointCircles:
                    raise RetryExhausted(f"no room for the coin at {(a, b)}") from None
                # the upper of the two candidates, on the left of c1 -> c2
                C[a, b] = hits[0]
            elif len(below) == 1:
                c1, r1 = C[below[0]], R[below[0]]
                d = nominal - c1
                C[a, b] = c1 + (r1 + r) * d / abs(d)
            else:
                C[a, b] = nominal
            R[a, b] = r
    # tangency points on every face
    P = np.full((n, m), np.nan, complex)
    for i in range(n - 1):
        for j in range(m - 1):
            q1, q2 = ((i, j), (i + 1, j + 1)) if (i + j) % 2 == 0 else ((i + 1, j), (i, j + 1))
            P[i, j] = C[q1] + R[q1] * (C[q2] - C[q1]) / abs(C[q2] - C[q1])
    nominal = np.arange(n)[:, None] + 1j * np.arange(m)[None, :]
    for a in range(n):
        for b in range(m):
            if (a + b) % 2 == 0:
                continue
            faces = [(a, b), (a - 1, b), (a - 1, b - 1), (a, b - 1)]
            pts = [P[f] for f in faces if 0 <= f[0] < n - 1 and 0 <= f[1] < m - 1]
            if len(pts) >= 3:
                c = circumcircle(*pts[:3])
                C[a, b], R[a, b] = c.center, c.radius
            elif len(pts) == 2:
                C[a, b] = _bisector_center(pts[0], pts[1], nominal[a, b] + jitter())
                R[a, b] = abs(pts[0] - C[a, b])
            else:
                C[a, b] = nominal[a, b] + jitter()
                R[a, b] = abs(pts[0] - C[a, b])
    return C, R, P


def gen_packing(spec: GeneratorSpec) -> MiquelMap:
    """s-Miquel map from a square-grid circle packing, optionally pushed by a Möbius map.

    ``perturbation`` 0 gives the regular packing (the orthogonal grid). The
    pole of the Möbius map has to stay outside the disk spanned by the
    pattern, otherwise PoleInsidePattern is raised.
    """
    n, m = spec.dims
    s = float(spec.params.get("perturbation", 1.0))
    rng = _streams(spec.seed, 1)[0]
    if s == 0:
        base = regular_grid(n, m)
    else:
        for _ in range(MAX_RETRIES):
            try:
                base = from_layer_arrays(*_packing_layer(n, m, s, rng))
                break
            except (RetryExhausted, CollinearPoints, CoincidentPoints):
                continue
        else:
            raise RetryExhausted("could not draw a circle packing")
    if spec.moebius is not None:
        M = MoebiusTransform(*_complex_list(spec.moebius))
        pole = M.pole
        if isinstance(pole, complex):
            allc = np.concatenate([base.centers[k][np.isfinite(base.centers[k])] for k in (0, 1)])
            mid = 0.5 * (allc.real.min() + allc.real.max()) + 0.5j * (allc.imag.min() + allc.imag.max())
            reach = max(np.nanmax(np.abs(base.centers[k] - mid) + base.radii[k]) for k in (0, 1))
            if abs(pole - mid) <= reach:
                raise PoleInsidePattern(f"pole {pole} lies within the pattern disk")
    return _finish(base, spec)


def tangency_residual(m: MiquelMap, level: int = 0) -> float:
    """Max | |t - t'| - (r + r') | over diagonal neighbours at one level."""
    c, r = m.centers[level], m.radii[level]
    worst = 0.0
    for sl_a, sl_b in (((slice(1, None), slice(1, None)), (slice(None, -1), slice(None, -1))),
                       ((slice(1, None), slice(None, -1)), (slice(None, -1), slice(1, None)))):
        d = np.abs(c[sl_a] - c[sl_b]) - (r[sl_a] + r[sl_b])
        d = d[np.isfinite(d)]
        if d.size:
            worst = max(worst, float(np.abs(d).max()))
    return worst
