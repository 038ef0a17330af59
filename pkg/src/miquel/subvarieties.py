"""Residuals of the special pattern classes.

Integrable patterns (edge cross-ratio products, real W), harmonic patterns
(orthodiagonal quads: X = Y, resistor relation, focal formulas) and
circle packings (time-reflection symmetries). All residual maps go from a
site to a nonnegative float normalized by the magnitudes involved.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .engine import MiquelMap, extract_p, layer_arrays
from .lattice import shift
from .variables import VariableField


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


# ----------------------------------------------------------------- integrable


def vertex_gamma_products(gamma: VariableField) -> dict:
    """Product of the four edge cross-ratios around each vertex (a, b) of layer k."""
    out = {}
    for (a, b, k, d) in gamma.values:
        if d != "h":
            continue
        edges = [(a, b, k, "h"), (a, b, k, "v"), (a - 1, b, k, "h"), (a, b - 1, k, "v")]
        if all(e in gamma.values for e in edges):
            out[(a, b, k)] = complex(np.prod([gamma.values[e] for e in edges]))
    return out


def integrability_deviations(wb: VariableField, ww: VariableField, gamma: VariableField) -> dict:
    """The three integrability indicators: max |Im W.|, max |W. - Wo|, max |prod gamma - 1|."""
    common = [z for z in wb.values if z in ww.values]
    prods = vertex_gamma_products(gamma)
    return {
        "im_wb": max((abs(wb[z].imag) / max(abs(wb[z]), 1.0) for z in wb.values), default=float("nan")),
        "wb_minus_ww": max((_rel(wb[z], ww[z]) for z in common), default=float("nan")),
        "gamma_product": max((abs(p - 1) for p in prods.values()), default=float("nan")),
        "sites": (len(wb), len(common), len(prods)),
    }


def zigzag_multipliers(m: MiquelMap, k: int) -> tuple[dict, dict, float]:
    """Unit numbers of the two zig-zag families read off the layer-k pattern.

    Family u collects p(i, j) - t(i, j) over faces with i + j fixed, family v
    collects p(i, j) - t(i + 1, j) over faces with j - i fixed. For an
    isoradial pattern both are constant along each zig-zag; the returned
    spread is the largest deviation from that.
    """
    c, _, p = layer_arrays(m, k)
    n = m.shape[0]
    fams: tuple[dict, dict] = ({}, {})
    for i in range(m.shape[0] - 1):
        for j in range(m.shape[1] - 1):
            if not np.isfinite(p[i, j]):
                continue
            if np.isfinite(c[i, j]):
                fams[0].setdefault(i + j, []).append(p[i, j] - c[i, j])
            if np.isfinite(c[i + 1, j]):
                fams[1].setdefault(j - i + n - 2, []).append(p[i, j] - c[i + 1, j])
    spread = 0.0
    out = []
    for fam in fams:
        vals = {}
        for key in sorted(fam):
            arr = np.asarray(fam[key])
            arr = arr / np.abs(arr)
            spread = max(spread, float(np.abs(arr - arr[0]).max()))
            vals[key] = complex(arr[0])
        out.append(vals)
    return out[0], out[1], spread


def zigzag_permutation_residual(m: MiquelMap, k: int) -> tuple[float, int]:
    """How far layer k+1's zig-zag numbers are from a rearrangement of layer k's.

    Each zig-zag of layer k+1 is matched to the closest zig-zag of layer k
    in the same family; the matching must be injective and move trains by
    at most one position. Trains at the ends of layer k's range are left
    out since their partners may lie outside the window. Returns the worst
    mismatch (inf when the matching is not a neighbour transposition
    pattern) and the number of zig-zags compared.
    """
    before = zigzag_multipliers(m, k)
    after = zigzag_multipliers(m, k + 1)
    worst = max(before[2], after[2])
    count = 0
    for fb, fa in ((before[0], after[0]), (before[1], after[1])):
        keys = sorted(fb)
        vals = np.array([fb[x] for x in keys])
        used = set()
        for key, val in sorted(fa.items()):
            if not keys[0] < key < keys[-1]:
                continue
            d = np.abs(vals - val)
            idx = int(np.argmin(d))
            if abs(keys[idx] - key) > 1 or keys[idx] in used:
                return float("inf"), count
            used.add(keys[idx])
            worst = max(worst, float(d[idx]))
            count += 1
    return worst, count


# ----------------------------------------------------------------- harmonic


def harmonic_xy_residuals(xb: VariableField, y: VariableField) -> dict:
    """|X.(a, b, j) - Y(a, b, -j)|; on z3 = 0 this is X. = Y at the same site."""
    out = {}
    for z, v in xb.values.items():
        w = (z[0], z[1], -z[2])
        if w in y.values:
            out[z] = _rel(v, y[w])
    return out


def _odd_level0(values: Mapping, needed) -> list:
    zs = set()
    for z in values:
        for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
            o = (z[0] + d[0], z[1] + d[1], z[2] + d[2])
            if o[2] == 0 and sum(o) % 2:
                zs.add(o)
    return [o for o in sorted(zs) if all(shift(o, ops) in values for ops in needed)]


RESISTOR_OPS = ([3], [1, -2, 3], [1], [-2])


def resistor_residuals(xb: VariableField, ops=RESISTOR_OPS) -> dict:
    """X(s3 z) X(s1 s-2 s3 z) = X(s1 z) X(s-2 z) at odd z with z3 = 0."""
    out = {}
    for z in _odd_level0(xb.values, ops):
        a, b, c, d = (xb[shift(z, o)] for o in ops)
        out[z] = _rel(a * b, c * d)
    return out


def focal_residuals(m: MiquelMap) -> dict:
    """The two focal point formulas at odd z with z3 = 0.

    The first formula gives the black point one level below z, the second
    the one above.
    """
    pb = extract_p(m, "black")
    ops = ([1], [2], [-1], [-2], [3], [-3])
    out = {}
    for z in _odd_level0(pb, ops):
        p1, p2, q1, q2, up, down = (pb[shift(z, o)] for o in ops)
        f1 = (p1 * p2 - q1 * q2) / (p1 + p2 - q1 - q2)
        f2 = (p1 * q2 - q1 * p2) / (p1 + q2 - q1 - p2)
        out[z] = max(_rel(f1, down), _rel(f2, up))
    return out


# ----------------------------------------------------------------- packings


def _pairs(field_a: VariableField, field_b: VariableField, center2: int, ks) -> list:
    """Site pairs (z with z3 = c + k, its mirror with z3 = c - k) for the given k."""
    out = []
    for z in sorted(field_a.values):
        k2 = 2 * z[2] - center2
        if k2 % 2 or k2 // 2 not in ks:
            continue
        w = (z[0], z[1], center2 - z[2])
        if w in field_b.values:
            out.append((z, w))
    return out


def s_symmetry_residuals(fields: Mapping[str, VariableField], ks=(1, 2)) -> dict[str, dict]:
    """Time-reflection residuals of a circle packing.

    ``y_product``: |Y(s3^k z) Y(s-3^k z) - 1| about z3 = -1.
    ``y_reflection``: |Y(s3^k z) - Y(s-3^k z)| about z3 = -1.
    ``x``: |X.(s3^k z) - Xo(s-3^k z)| about z3 = 0, ``w`` likewise for W.
    """
    y = fields["Y"]
    out = {
        "y_product": {z: abs(y[z] * y[w] - 1) for z, w in _pairs(y, y, -2, ks)},
        "y_reflection": {z: _rel(y[z], y[w]) for z, w in _pairs(y, y, -2, ks)},
        "x": {z: _rel(fields["Xb"][z], fields["Xw"][w]) for z, w in _pairs(fields["Xb"], fields["Xw"], 0, ks)},
        "w": {z: _rel(fields["Wb"][z], fields["Ww"][w]) for z, w in _pairs(fields["Wb"], fields["Ww"], 0, ks)},
    }
    return out
