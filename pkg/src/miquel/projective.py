"""Arithmetic on the extended complex plane: multi-ratios and Möbius maps."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DeterminantError, IllDefinedMultiRatio, OddLength


class _Infinity:
    """The single point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

ExtComplex = Union[complex, _Infinity]


def is_inf(x) -> bool:
    return x is INF


def ext(x) -> ExtComplex:
    """Normalize a number to ExtComplex; any infinite component becomes INF."""
    if x is INF:
        return INF
    z = complex(x)
    if cmath.isnan(z):
        raise ValueError("NaN is not a point of the extended complex plane")
    if cmath.isinf(z):
        return INF
    return z


def multi_ratio(points: Sequence, flags: list | None = None) -> ExtComplex:
    """Multi-ratio (a1-a2)(a3-a4)... / ((a2-a3)(a4-a5)...(a2m-a1)).

    An infinite argument contributes the limit -1 for the ratio of its two
    factors. A single coincident consecutive pair gives 0 or INF. Pass a list
    as ``flags`` to collect notes about limit cases that were taken.
    """
    pts = [ext(p) for p in points]
    n = len(pts)
    if n % 2:
        raise OddLength(f"multi-ratio needs an even number of arguments, got {n}")
    if n < 4:
        raise OddLength("multi-ratio needs at least four arguments")

    def same(a, b):
        return (a is INF and b is INF) or (a is not INF and b is not INF and a == b)

    # factor k joins pts[k] and pts[k+1]; even k are numerator factors
    zero = [same(pts[k], pts[(k + 1) % n]) for k in range(n)]
    for k in range(n):
        if zero[k] and zero[(k + 1) % n]:
            raise IllDefinedMultiRatio("three or more consecutive arguments coincide")
    zero_num = any(zero[k] for k in range(0, n, 2))
    zero_den = any(zero[k] for k in range(1, n, 2))
    if zero_num and zero_den:
        raise IllDefinedMultiRatio("coincident pairs in both numerator and denominator")

    value = complex(1.0)
    used = [False] * n
    for j, p in enumerate(pts):
        if p is INF and not zero[j] and not zero[(j - 1) % n]:
            # factors (j-1, j) and (j, j+1): one numerator, one denominator
            used[j] = used[(j - 1) % n] = True
            value = -value
    if zero_num or zero_den:
        if any(p is INF for p in pts) and flags is not None:
            flags.append("coincident pair together with an infinite argument")
        return complex(0.0) if zero_num else INF
    if any(p is INF for p in pts) and flags is not None:
        flags.append("infinite argument evaluated by its limit ratio")
    for k in range(n):
        if used[k]:
            continue
        a, b = pts[k], pts[(k + 1) % n]
        if a is INF or b is INF:
            # both neighbours of this factor are consumed elsewhere only when
            # two infinities sit at distance two; the factor ratio is then INF/INF
            raise IllDefinedMultiRatio("infinite factors do not cancel")
        if k % 2 == 0:
            value *= a - b
        else:
            value /= a - b
    return value


def cross_ratio(a, b, c, d, flags: list | None = None) -> ExtComplex:
    return multi_ratio((a, b, c, d), flags)


def mr_array(*cols: np.ndarray) -> np.ndarray:
    """Vectorized multi-ratio of finite arrays; NaN marks missing data."""
    n = len(cols)
    if n % 2 or n < 4:
        raise OddLength(f"multi-ratio needs an even number >= 4 of arguments, got {n}")
    num = np.ones(np.shape(cols[0]), dtype=complex)
    den = np.ones(np.shape(cols[0]), dtype=complex)
    for k in range(n):
        d = cols[k] - cols[(k + 1) % n]
        if k % 2 == 0:
            num = num * d
        else:
            den = den * d
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


@dataclass(frozen=True)
class MoebiusTransform:
    a: complex
    b: complex
    c: complex
    d: complex
    det_tol: float = 1e-12

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d)) ** 2
        if not abs(self.det) > self.det_tol * scale:
            raise DeterminantError(f"ad - bc = {self.det} is (numerically) zero")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def pole(self) -> ExtComplex:
        return INF if self.c == 0 else -self.d / self.c

    def inverse(self) -> "MoebiusTransform":
        return MoebiusTransform(self.d, -self.b, -self.c, self.a, self.det_tol)

    def compose(self, other: "MoebiusTransform") -> "MoebiusTransform":
        """self o other, i.e. apply ``other`` first."""
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return MoebiusTransform(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, self.det_tol)

    def __call__(self, p) -> ExtComplex:
        return moebius_apply(self, p)

    def apply_array(self, z: np.ndarray) -> np.ndarray:
        """Apply to an array of finite points; points at the pole become complex inf."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * z + self.b) / (self.c * z + self.d)

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


IDENTITY = MoebiusTransform(1, 0, 0, 1)


def moebius_apply(M: MoebiusTransform, p) -> ExtComplex:
    p = ext(p)
    if p is INF:
        return INF if M.c == 0 else M.a / M.c
    den = M.c * p + M.d
    if den == 0:
        return INF
    return (M.a * p + M.b) / den


def moebius_invariance_residual(M: MoebiusTransform, points: Sequence) -> float:
    before = multi_ratio(points)
    after = multi_ratio([moebius_apply(M, p) for p in points])
    if before is INF or after is INF:
        return 0.0 if before is after else math.inf
    return abs(before - after)
