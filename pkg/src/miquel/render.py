"""Static SVG drawings of one layer of a map.

Output is deterministic: elements appear in sorted site order and every
coordinate is printed with a fixed number of digits, so renders can be
diffed as golden files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .engine import MiquelMap, layer
from .variables import VariableField

DIGITS = 6


def _f(x: float) -> str:
    s = f"{x:.{DIGITS}f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _label_text(v: complex) -> str:
    if abs(v.imag) <= 1e-9 * max(abs(v), 1.0):
        return f"{v.real:.3g}"
    return f"{v.real:.3g}{v.imag:+.3g}i"


def _site_position(m: MiquelMap, key) -> complex | None:
    """Where to print a variable: its circle center, else the mean of neighbouring centers."""
    if len(key) == 4:
        a, b, k, d = key
        ends = [(a, b), (a + 1, b) if d == "h" else (a, b + 1)]
        cs = []
        for i, j in ends:
            lvl = k if (i + j + k) % 2 == 0 else k + 1
            c = m.circle((i, j, lvl))
            if c is None:
                return None
            cs.append(c.center)
        return (cs[0] + cs[1]) / 2
    c = m.circle(key)
    if c is not None:
        return c.center
    near = []
    for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
        c = m.circle((key[0] + d[0], key[1] + d[1], key[2] + d[2]))
        if c is not None:
            near.append(c.center)
    return complex(np.mean(near)) if near else None


def render_layer(m: MiquelMap, k: int = 0, show_points: bool = False, show_centers: bool = False,
                 labels: VariableField | None = None, size: float = 800.0) -> str:
    """SVG 1.1 document with one ``<circle>`` element per circle of layer k.

    Black tetrahedron points are filled black and white ones white with a
    black outline, drawn as ``<ellipse>`` so the circle count stays exact;
    centers are small red squares. The y axis points up.
    """
    lay = layer(m, k)
    xs, ys = [], []
    for c in lay.circles.values():
        xs += [c.center.real - c.radius, c.center.real + c.radius]
        ys += [c.center.imag - c.radius, c.center.imag + c.radius]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0)
    pad = 0.02 * span
    stroke = span / size
    dot = 3 * stroke

    def xy(z: complex) -> tuple[str, str]:
        return _f(z.real), _f(-z.imag)

    vb = f"{_f(x0 - pad)} {_f(-y1 - pad)} {_f(x1 - x0 + 2 * pad)} {_f(y1 - y0 + 2 * pad)}"
    h = size * (y1 - y0 + 2 * pad) / (x1 - x0 + 2 * pad)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(size)}" height="{_f(h)}" viewBox="{vb}">',
        f'<g id="circles" fill="none" stroke="#3060a0" stroke-width="{_f(stroke)}">',
    ]
    for (a, b), c in sorted(lay.circles.items()):
        cx, cy = xy(c.center)
        out.append(f'<circle id="c{a}_{b}" cx="{cx}" cy="{cy}" r="{_f(c.radius)}"/>')
    out.append("</g>")
    if show_centers:
        out.append('<g id="centers" fill="#c03030" stroke="none">')
        for _, c in sorted(lay.circles.items()):
            out.append(f'<rect x="{_f(c.center.real - dot / 2)}" y="{_f(-c.center.imag - dot / 2)}" '
                       f'width="{_f(dot)}" height="{_f(dot)}"/>')
        out.append("</g>")
    if show_points:
        out.append(f'<g id="points" stroke="#000000" stroke-width="{_f(stroke)}">')
        for (i, j), p in sorted(lay.points.items()):
            fill = "#000000" if (i + j + k) % 2 == 0 else "#ffffff"
            px, py = xy(p)
            out.append(f'<ellipse cx="{px}" cy="{py}" rx="{_f(dot)}" ry="{_f(dot)}" fill="{fill}"/>')
        out.append("</g>")
    if labels is not None:
        font = 4 * dot
        out.append(f'<g id="labels" font-family="monospace" font-size="{_f(font)}" text-anchor="middle">')
        for key, v in sorted(labels.layer(k).values.items()):
            pos = _site_position(m, key)
            if pos is None:
                continue
            px, py = xy(pos)
            out.append(f'<text x="{px}" y="{py}">{escape(_label_text(complex(v)))}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
