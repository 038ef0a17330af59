"""Y, X and W variables, edge cross-ratios, and the Y-system recurrence.

Y and both X families are indexed by vertices (even sites), both W families
by octahedra (odd sites). Y(z) belongs to the vertex whose circle is replaced
when passing from layer z3 to z3 + 1.

The center ratio taken towards the level below (``form="backward"``) at z
equals 1 / Y(z - 2 e3) on a Miquel map, so the Y-variables attached to the
circles of layer k are the values at z3 in {k - 1, k}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .engine import MiquelMap
from .errors import MissingData, SingularRecurrence, ZeroDenominator
from .lattice import shift
from .projective import INF, cross_ratio

KINDS = ("Y", "Xb", "Xw", "Wb", "Ww", "Gamma")
PARITY = {"Y": 0, "Xb": 0, "Xw": 0, "Wb": 1, "Ww": 1}
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class VariableField:
    kind: str
    values: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")

    @property
    def parity_class(self) -> str:
        if self.kind == "Gamma":
            return "edge"
        return "even" if PARITY[self.kind] == 0 else "odd"

    def __getitem__(self, z):
        return self.values[z]

    def __contains__(self, z) -> bool:
        return z in self.values

    def __len__(self) -> int:
        return len(self.values)

    def get(self, z, default=None):
        return self.values.get(z, default)

    def layer(self, k: int) -> "VariableField":
        """Values determined by the circle pattern of layer k.

        That is z3 in {k, k+1} for X and W, z3 in {k-1, k} for Y and the
        edges of layer k for Gamma.
        """
        if self.kind == "Gamma":
            return VariableField(self.kind, {e: v for e, v in self.values.items() if e[2] == k})
        levels = (k - 1, k) if self.kind == "Y" else (k, k + 1)
        return VariableField(self.kind, {z: v for z, v in self.values.items() if z[2] in levels})


# ----------------------------------------------------------------- scalar forms


def _need(mapping: Mapping, z):
    v = mapping.get(tuple(z))
    if v is None or v is INF:
        raise MissingData(f"no value at {tuple(z)}")
    return complex(v)


def compute_y(t: Mapping, site, form: str = "forward") -> complex:
    """Y from the centers above (forward form) or below (backward form) the site."""
    z = tuple(site)
    if sum(z) % 2:
        raise MissingData(f"Y lives on even sites, got {z}")
    c = _need(t, z)
    if form == "forward":
        num = (_need(t, shift(z, [1, 3])) - c) * (_need(t, shift(z, [-1, 3])) - c)
        den = (_need(t, shift(z, [2, 3])) - c) * (_need(t, shift(z, [-2, 3])) - c)
    else:
        num = (_need(t, shift(z, [2, -3])) - c) * (_need(t, shift(z, [-2, -3])) - c)
        den = (_need(t, shift(z, [1, -3])) - c) * (_need(t, shift(z, [-1, -3])) - c)
    if den == 0:
        raise ZeroDenominator(f"coincident centers around {z}")
    return -num / den


X_OPS = {
    "black": ([-1, -2], [-2, -3], [], [-1, -3]),
    "white": ([-1, -2, -3], [-2], [-3], [-1]),
}
W_OPS = {"black": X_OPS["white"], "white": X_OPS["black"]}


def _minus_cr(p: Mapping, z, ops) -> complex:
    vals = [_need(p, shift(z, op)) for op in ops]
    cr = cross_ratio(*vals)
    if cr is INF:
        raise ZeroDenominator(f"cross-ratio at {tuple(z)} is infinite")
    return -cr


def compute_x(p_color: Mapping, site, color: str) -> complex:
    z = tuple(site)
    if sum(z) % 2:
        raise MissingData(f"X lives on even sites, got {z}")
    return _minus_cr(p_color, z, X_OPS[color])


def compute_w(p_color: Mapping, site, color: str) -> complex:
    z = tuple(site)
    if sum(z) % 2 == 0:
        raise MissingData(f"W lives on odd sites, got {z}")
    return _minus_cr(p_color, z, W_OPS[color])


def edge_faces(edge) -> tuple:
    """(v, f, v', f') in counterclockwise order for an edge (a, b, k, 'h' | 'v')."""
    a, b, k, d = edge
    if d == "h":
        return (a, b), (a, b - 1), (a + 1, b), (a, b)
    return (a, b), (a, b), (a, b + 1), (a - 1, b)


def compute_gamma(m: MiquelMap, edge) -> complex:
    """Edge cross-ratio cr(t(v), p(f), t(v'), p(f')) in the layer-k pattern."""
    k = edge[2]
    v, f, v2, f2 = edge_faces(edge)
    vals = []
    for kind, q in (("c", v), ("p", f), ("c", v2), ("p", f2)):
        if kind == "c":
            lvl = k if (q[0] + q[1] + k) % 2 == 0 else k + 1
            c = m.circle((q[0], q[1], lvl))
            if c is None:
                raise MissingData(f"no circle at vertex {q} of layer {k}")
            vals.append(c.center)
        else:
            p = m.point((q[0], q[1], k))
            if p is None:
                raise MissingData(f"no point at face {q} of layer {k}")
            vals.append(p)
    return cross_ratio(*vals)


# ----------------------------------------------------------------- whole fields


def _site_box(m: MiquelMap, par: int):
    levels = sorted(set(m.centers) | set(m.points))
    ks = np.arange(levels[0] - 1, levels[-1] + 2)
    I, J, K = np.meshgrid(np.arange(m.shape[0]), np.arange(m.shape[1]), ks, indexing="ij")
    sel = (I + J + K) % 2 == par
    return I[sel], J[sel], K[sel]


def _sh(I, J, K, ops):
    I, J, K = I.copy(), J.copy(), K.copy()
    for op in ops:
        d = 1 if op > 0 else -1
        if abs(op) == 1:
            I = I + d
        elif abs(op) == 2:
            J = J + d
        else:
            K = K + d
    return I, J, K


def _to_field(kind, I, J, K, vals) -> VariableField:
    ok = np.isfinite(vals)
    return VariableField(kind, {(int(i), int(j), int(k)): complex(v)
                                for i, j, k, v in zip(I[ok], J[ok], K[ok], vals[ok])})


def y_values(m: MiquelMap, form: str = "forward"):
    I, J, K = _site_box(m, 0)
    c = m.t_at(I, J, K)
    g = lambda *ops: m.t_at(*_sh(I, J, K, ops)) - c  # noqa: E731
    with np.errstate(divide="ignore", invalid="ignore"):
        if form == "forward":
            vals = -(g(1, 3) * g(-1, 3)) / (g(2, 3) * g(-2, 3))
        else:
            vals = -(g(2, -3) * g(-2, -3)) / (g(1, -3) * g(-1, -3))
    return I, J, K, vals


def y_field(m: MiquelMap, form: str = "forward") -> VariableField:
    """Y on every site where the centers determine it.

    With the default ``form="forward"`` sites lacking the level above are
    filled through the backward ratio two levels up (see module docstring),
    so a single stored layer already yields its full set of Y-variables.
    """
    I, J, K, vals = y_values(m, form)
    if form == "forward":
        _, _, _, back = y_values(m, "backward")
        # the backward box is the same box; shift it down by two levels
        idx = {(i, j, k): n for n, (i, j, k) in enumerate(zip(I, J, K))}
        for n, (i, j, k) in enumerate(zip(I, J, K)):
            if not np.isfinite(vals[n]):
                src = idx.get((i, j, k + 2))
                if src is not None and np.isfinite(back[src]) and back[src] != 0:
                    vals[n] = 1 / back[src]
    return _to_field("Y", I, J, K, vals)


def _cr_values(m: MiquelMap, par: int, ops):
    I, J, K = _site_box(m, par)
    a, b, c, d = (m.p_at(*_sh(I, J, K, op)) for op in ops)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = -((a - b) * (c - d)) / ((b - c) * (d - a))
    return I, J, K, vals


def x_field(m: MiquelMap, color: str) -> VariableField:
    return _to_field("Xb" if color == "black" else "Xw", *_cr_values(m, 0, X_OPS[color]))


def w_field(m: MiquelMap, color: str) -> VariableField:
    return _to_field("Wb" if color == "black" else "Ww", *_cr_values(m, 1, W_OPS[color]))


def gamma_field(m: MiquelMap) -> VariableField:
    """Edge cross-ratios of every layer whose pattern is stored."""
    values = {}
    n, mm = m.shape
    for k in m.point_levels:
        if k not in m.centers or k + 1 not in m.centers:
            continue
        I, J = np.meshgrid(np.arange(n), np.arange(mm), indexing="ij")
        even = (I + J + k) % 2 == 0
        T = np.where(even, m.centers[k], m.centers[k + 1])
        P = m.points[k]

        def tp(a, b, arr):
            out = np.full((n, mm), np.nan, complex)
            src = arr[max(a, 0): n + min(a, 0), max(b, 0): mm + min(b, 0)]
            out[max(-a, 0): n - max(a, 0), max(-b, 0): mm - max(b, 0)] = src
            return out

        for d, (v2, f, f2) in {"h": ((1, 0), (0, -1), (0, 0)), "v": ((0, 1), (0, 0), (-1, 0))}.items():
            tv, tv2 = T, tp(*v2, T)
            pf, pf2 = tp(*f, P), tp(*f2, P)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = (tv - pf) * (tv2 - pf2) / ((pf - tv2) * (pf2 - tv))
            for a, b in np.argwhere(np.isfinite(g)):
                values[(int(a), int(b), k, d)] = complex(g[a, b])
    return VariableField("Gamma", dict(sorted(values.items())))


def fields(m: MiquelMap) -> dict[str, VariableField]:
    return {"Y": y_field(m), "Xb": x_field(m, "black"), "Xw": x_field(m, "white"),
            "Wb": w_field(m, "black"), "Ww": w_field(m, "white")}


def field_of(m: MiquelMap, kind: str) -> VariableField:
    return {"Y": lambda: y_field(m), "Xb": lambda: x_field(m, "black"), "Xw": lambda: x_field(m, "white"),
            "Wb": lambda: w_field(m, "black"), "Ww": lambda: w_field(m, "white"),
            "Gamma": lambda: gamma_field(m)}[kind]()


# ----------------------------------------------------------------- recurrences


def ysystem_sides(field: VariableField, site) -> tuple[complex, complex]:
    z = tuple(site)
    U = {}
    for d in (1, -1, 2, -2, 3, -3):
        v = field.get(shift(z, [d]))
        if v is None:
            raise MissingData(f"{field.kind} missing at {shift(z, [d])}")
        U[d] = v
    for d in (1, -1):
        if abs(U[d]) < SINGULAR_TOL or abs(1 + 1 / U[d]) < SINGULAR_TOL:
            raise SingularRecurrence(f"1 + 1/U vanishes at {shift(z, [d])}")
    for d in (2, -2):
        if abs(1 + U[d]) < SINGULAR_TOL:
            raise SingularRecurrence(f"1 + U vanishes at {shift(z, [d])}")
    lhs = U[3] * U[-3]
    rhs = (1 + U[2]) * (1 + U[-2]) / ((1 + 1 / U[1]) * (1 + 1 / U[-1]))
    return lhs, rhs


def ysystem_residual(field: VariableField, site) -> float:
    """Normalized |U(s3)U(s-3) - (1+U(s2))(1+U(s-2))/((1+1/U(s1))(1+1/U(s-1)))|."""
    lhs, rhs = ysystem_sides(field, site)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


def ysystem_sites(field: VariableField) -> list:
    """Sites of the opposite parity whose six neighbours all carry values."""
    cand = set()
    for z in field.values:
        for d in (1, -1, 2, -2, 3, -3):
            cand.add(shift(z, [d]))
    out = []
    for z in sorted(cand):
        if all(shift(z, [d]) in field.values for d in (1, -1, 2, -2, 3, -3)):
            out.append(z)
    return out


def ysystem_residuals(field: VariableField) -> tuple[dict, int]:
    """Residual per interior site, and the number of singular sites skipped."""
    out, skipped = {}, 0
    for z in ysystem_sites(field):
        try:
            out[z] = ysystem_residual(field, z)
        except SingularRecurrence:
            skipped += 1
    return out, skipped
