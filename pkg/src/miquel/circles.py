"""Circles as center and radius: circumcircles, reflections, intersections."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CircleThroughInfinity,
    CoincidentCenters,
    CoincidentPoints,
    CollinearPoints,
    DegenerateLine,
    DisjointCircles,
    InfinitePoint,
    InvalidCircle,
    NotOnBothCircles,
)
from .projective import INF, MoebiusTransform, cross_ratio, ext, moebius_apply

COLLINEAR_TOL = 1e-12
TANGENCY_TOL = 1e-10


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def __post_init__(self):
        c = complex(self.center)
        r = float(self.radius)
        if not (cmath.isfinite(c) and math.isfinite(r)):
            raise InvalidCircle(f"non-finite circle ({self.center}, {self.radius})")
        if r <= 0:
            raise InvalidCircle(f"radius must be positive, got {r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    def point_at(self, angle: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * angle)


@dataclass(frozen=True)
class IncidenceReport:
    point: complex
    circle: Circle
    signed_residual: float


def _finite(p) -> complex:
    p = ext(p)
    if p is INF:
        raise InfinitePoint("point at infinity where a finite point is required")
    return p


def incidence(c: Circle, p) -> IncidenceReport:
    p = _finite(p)
    return IncidenceReport(p, c, (abs(p - c.center) - c.radius) / c.radius)


def on_circle(c: Circle, p, tol: float = 1e-9) -> bool:
    return abs(incidence(c, p).signed_residual) <= tol


def reflect_about_line(p, a, b) -> complex:
    p, a, b = _finite(p), _finite(a), _finite(b)
    if a == b:
        raise DegenerateLine("reflection line needs two distinct points")
    d = b - a
    return a + (p - a).conjugate() * d / d.conjugate()


def second_intersection(c1: Circle, c2: Circle, p, tol: float = 1e-9) -> complex:
    """The other common point of two circles through ``p`` (``p`` itself if tangent)."""
    p = _finite(p)
    if c1.center == c2.center:
        raise CoincidentCenters("circles share their center")
    if not (on_circle(c1, p, tol) and on_circle(c2, p, tol)):
        raise NotOnBothCircles(f"{p} does not lie on both circles")
    d = c2.center - c1.center
    dist = abs(((p - c1.center) * d.conjugate()).imag) / abs(d)
    if dist < TANGENCY_TOL * min(c1.radius, c2.radius):
        return p
    return reflect_about_line(p, c1.center, c2.center)


def circle_intersections(c1: Circle, c2: Circle) -> tuple[complex, complex]:
    """Both intersection points; the first lies to the left of the center line c1 -> c2."""
    d = c2.center - c1.center
    D = abs(d)
    if D == 0:
        raise CoincidentCenters("circles share their center")
    r1, r2 = c1.radius, c2.radius
    if D > r1 + r2 + TANGENCY_TOL * (r1 + r2) or D < abs(r1 - r2) - TANGENCY_TOL * (r1 + r2):
        raise DisjointCircles(f"circles at distance {D} with radii {r1}, {r2} do not meet")
    a = (D * D + r1 * r1 - r2 * r2) / (2 * D)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    u = d / D
    base = c1.center + a * u
    return base + 1j * h * u, base - 1j * h * u


def circumcircle(p1, p2, p3) -> Circle:
    p1, p2, p3 = _finite(p1), _finite(p2), _finite(p3)
    if p1 == p2 or p2 == p3 or p1 == p3:
        raise CoincidentPoints("circumcircle needs three distinct points")
    b, c = p2 - p1, p3 - p1
    cross = (b.conjugate() * c).imag
    diam = max(abs(b), abs(c), abs(c - b))
    if abs(cross) / 2 < COLLINEAR_TOL * diam * diam:
        raise CollinearPoints("points are (numerically) collinear")
    center = p1 + (abs(b) ** 2 * c - abs(c) ** 2 * b) / (b.conjugate() * c - b * c.conjugate())
    return Circle(center, abs(p1 - center))


def concyclic_residual(p1, p2, p3, p4) -> float:
    """Incidence residual of ``p4`` against the circle through the first three."""
    c = circumcircle(p1, p2, p3)
    return abs(incidence(c, p4).signed_residual)


def cross_ratio_residual(p1, p2, p3, p4) -> float:
    """|Im cr(p1, p2, p3, p4)|, a Möbius invariant concyclicity measure."""
    cr = cross_ratio(p1, p2, p3, p4)
    return 0.0 if cr is INF else abs(cr.imag)


def moebius_image(c: Circle, M: MoebiusTransform, tol: float = 1e-9) -> Circle:
    pole = M.pole
    if pole is not INF and abs(abs(pole - c.center) - c.radius) <= tol * c.radius:
        raise CircleThroughInfinity(f"pole {pole} lies on circle {c}")
    imgs = [moebius_apply(M, c.point_at(a)) for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    if any(q is INF for q in imgs):
        raise CircleThroughInfinity(f"image of {c} passes through infinity")
    return circumcircle(*imgs)


# vectorized kernels used by the evolution engine; NaN marks missing data


def reflect_array(p: np.ndarray, a: np.ndarray, b: np.ndarray, radius: np.ndarray | None = None) -> np.ndarray:
    """Reflect ``p`` across line ab elementwise; points within the tangency band stay fixed."""
    d = b - a
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a + np.conj(p - a) * d / np.conj(d)
        if radius is not None:
            dist = np.abs(((p - a) * np.conj(d)).imag) / np.abs(d)
            out = np.where(dist < TANGENCY_TOL * radius, p, out)
    return out


def circumcircle_array(p1: np.ndarray, p2: np.ndarray, p3: np.ndarray):
    """Centers, radii and a collinearity mask for triples of points."""
    b, c = p2 - p1, p3 - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        den = np.conj(b) * c - b * np.conj(c)
        center = p1 + (np.abs(b) ** 2 * c - np.abs(c) ** 2 * b) / den
        diam = np.maximum(np.maximum(np.abs(b), np.abs(c)), np.abs(c - b))
        degenerate = np.abs(den.imag) / 4 < COLLINEAR_TOL * diam * diam
    return center, np.abs(p1 - center), degenerate
