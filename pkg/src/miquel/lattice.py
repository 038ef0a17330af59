"""Combinatorics of the octahedral lattice and its embedding into A4.

Vertices live on the even sublattice of Z^3. Tetrahedra are indexed by Z^3:
an even site T is the black tetrahedron with vertices T, T+e2+e3, T+e1+e3,
T+e1+e2 and an odd site T is the white tetrahedron with vertices T+e1, T+e2,
T+e3, T+e1+e2+e3. Octahedra are indexed by odd sites, with vertices o +- e_i.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ParityError

Triple = tuple[int, int, int]

E = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class Role(enum.Enum):
    VERTEX = "vertex"
    BLACK = "black"
    WHITE = "white"
    OCTAHEDRON = "octahedron"


@dataclass(frozen=True)
class LatticeSite:
    z: Triple
    role: Role

    def __post_init__(self):
        z = tuple(int(c) for c in self.z)
        object.__setattr__(self, "z", z)
        even = sum(z) % 2 == 0
        if even != (self.role in (Role.VERTEX, Role.BLACK)):
            raise ParityError(f"{self.role.value} site {z} has the wrong parity")


def parity(z: Sequence[int]) -> int:
    return sum(z) % 2


def tetra_role(T: Sequence[int]) -> Role:
    return Role.BLACK if parity(T) == 0 else Role.WHITE


def shift(z: Sequence[int], ops: Iterable[int]) -> Triple:
    """Apply shift operators; ``ops`` holds signed directions in {+-1, +-2, +-3}."""
    out = list(z)
    for op in ops:
        if op not in (1, 2, 3, -1, -2, -3):
            raise ValueError(f"invalid shift direction {op}")
        out[abs(op) - 1] += 1 if op > 0 else -1
    return tuple(out)


def _require_odd(o: Sequence[int]) -> None:
    if parity(o) != 1:
        raise ParityError(f"octahedron site {tuple(o)} must have odd coordinate sum")


def octahedron_vertices(o: Sequence[int]) -> list[Triple]:
    """sigma_1 o, sigma_2 o, sigma_3 o, sigma_-1 o, sigma_-2 o, sigma_-3 o.

    Opposite vertices sit at distance three in the list, which is the order
    expected by the dSKP multi-ratio.
    """
    _require_odd(o)
    return [shift(o, [d]) for d in (1, 2, 3, -1, -2, -3)]


def dskp_neighbours(z: Sequence[int]) -> list[Triple]:
    """The six neighbours z +- e_i in dSKP order, for a site of either parity."""
    return [shift(z, [d]) for d in (1, 2, 3, -1, -2, -3)]


def octahedron_tetrahedra(o: Sequence[int]) -> list[LatticeSite]:
    _require_odd(o)
    ops = [(-1, -2, -3), (-1, -2), (-1, -3), (-2, -3), (-1,), (-2,), (-3,), ()]
    out = []
    for op in ops:
        T = shift(o, op)
        out.append(LatticeSite(T, tetra_role(T)))
    return out


def tetra_vertices(T: Sequence[int]) -> list[Triple]:
    T = tuple(T)
    if parity(T) == 0:
        return [T, shift(T, [2, 3]), shift(T, [1, 3]), shift(T, [1, 2])]
    return [shift(T, [1]), shift(T, [2]), shift(T, [3]), shift(T, [1, 2, 3])]


def vertex_tetrahedra(v: Sequence[int]) -> list[LatticeSite]:
    """The eight tetrahedra incident to a vertex: four black, then four white."""
    v = tuple(v)
    if parity(v) != 0:
        raise ParityError(f"vertex {v} must have even coordinate sum")
    black = [v, shift(v, [-2, -3]), shift(v, [-1, -3]), shift(v, [-1, -2])]
    white = [shift(v, [-1]), shift(v, [-2]), shift(v, [-3]), shift(v, [-1, -2, -3])]
    return [LatticeSite(T, Role.BLACK) for T in black] + [LatticeSite(T, Role.WHITE) for T in white]


# ---------------------------------------------------------------- A4 embedding


@dataclass(frozen=True)
class A4Site:
    w: tuple[int, int, int, int, int]

    def __post_init__(self):
        w = tuple(int(c) for c in self.w)
        object.__setattr__(self, "w", w)
        if len(w) != 5 or sum(w) != 0 or w[4] not in (-1, 0, 1):
            raise ValueError(f"{w} is not a point of the restricted A4 lattice")

    @property
    def layer(self) -> int:
        return self.w[4]


def _neg_level(z: Sequence[int]) -> list[int]:
    s = sum(z)
    h = s // 2
    return [-(z[0] - h), -(z[1] - h), -(z[2] - h), -h, 0]


def phi_embed(site: LatticeSite) -> A4Site:
    """Embed a vertex or tetrahedron into the restricted A4 lattice.

    Vertices land on w5 = 0, black tetrahedra on w5 = 1 and white ones on
    w5 = -1; adjacent vertex/tetrahedron pairs differ by one of the vectors
    -(e_i - e5), i = 1..4.
    """
    z = site.z
    if site.role is Role.VERTEX:
        w = _neg_level(z)
    elif site.role is Role.BLACK:
        w = _neg_level(z)
        w[3] -= 1
        w[4] += 1
    elif site.role is Role.WHITE:
        w = _neg_level(shift(z, [1]))
        w[0] += 1
        w[4] -= 1
    else:
        raise ParityError("octahedra are not embedded")
    return A4Site(tuple(w))


def phi_inverse(a: A4Site) -> LatticeSite:
    w1, w2, w3, w4, w5 = a.w
    if w5 == 0:
        return LatticeSite((-w1 - w4, -w2 - w4, -w3 - w4), Role.VERTEX)
    if w5 == 1:
        h = w4 + 1
        return LatticeSite((-w1 - h, -w2 - h, -w3 - h), Role.BLACK)
    u = (-(w1 - 1) - w4, -w2 - w4, -w3 - w4)
    return LatticeSite(shift(u, [-1]), Role.WHITE)


@dataclass(frozen=True)
class A4Octahedron:
    base: tuple[int, ...]
    m: int
    sites: tuple[LatticeSite, ...]
    kind: str  # "pure" or "mixed"


def _pair_order(m: int) -> list[tuple[int, int]]:
    i1, i2, i3, i4 = [i for i in range(5) if i != m]
    return [(i1, i2), (i2, i3), (i1, i3), (i3, i4), (i1, i4), (i2, i4)]


def a4_octahedron(base: Sequence[int], m: int) -> list[A4Site] | None:
    """Vertices sigma_ij(base) in canonical order, or None if one leaves the restricted lattice."""
    out = []
    for i, j in _pair_order(m):
        w = list(base)
        w[i] += 1
        w[j] += 1
        if w[4] not in (-1, 0, 1):
            return None
        out.append(A4Site(tuple(w)))
    return out


def a4_octahedra(sites: Iterable[LatticeSite]) -> list[A4Octahedron]:
    """All A4 octahedra whose six vertices are among ``sites``, in sorted order."""
    images = {phi_embed(s).w: s for s in sites}
    bases = set()
    for w in images:
        for i, j in itertools.combinations(range(5), 2):
            b = list(w)
            b[i] -= 1
            b[j] -= 1
            bases.add(tuple(b))
    out = []
    for base in sorted(bases):
        for m in range(5):
            verts = a4_octahedron(base, m)
            if verts is None or any(v.w not in images for v in verts):
                continue
            out.append(A4Octahedron(base, m + 1, tuple(images[v.w] for v in verts), "pure" if m == 4 else "mixed"))
    return out


@dataclass(frozen=True)
class Window:
    """Inclusive (i0, i1, j0, j1) ranges of z1, z2 for each z3 layer."""

    ranges: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, (i0, i1, j0, j1) in self.ranges.items():
            if i0 > i1 or j0 > j1:
                raise ValueError(f"empty range at layer {k}")

    @classmethod
    def box(cls, n1: int, n2: int, layers: Iterable[int]) -> "Window":
        return cls({k: (0, n1 - 1, 0, n2 - 1) for k in layers})

    def contains(self, z: Sequence[int]) -> bool:
        r = self.ranges.get(z[2])
        return r is not None and r[0] <= z[0] <= r[1] and r[2] <= z[1] <= r[3]

    def sites(self, roles: Iterable[Role]) -> list[LatticeSite]:
        roles = set(roles)
        out = []
        for k in sorted(self.ranges):
            i0, i1, j0, j1 = self.ranges[k]
            for i in range(i0, i1 + 1):
                for j in range(j0, j1 + 1):
                    z = (i, j, k)
                    if parity(z) == 0:
                        for r in (Role.VERTEX, Role.BLACK):
                            if r in roles:
                                out.append(LatticeSite(z, r))
                    else:
                        for r in (Role.WHITE, Role.OCTAHEDRON):
                            if r in roles:
                                out.append(LatticeSite(z, r))
        return out

    def eroded(self) -> "Window":
        out = {}
        for k, (i0, i1, j0, j1) in self.ranges.items():
            if i1 - i0 >= 2 and j1 - j0 >= 2:
                out[k] = (i0 + 1, i1 - 1, j0 + 1, j1 - 1)
        return Window(out)


def a4_octahedra_touching(window: Window) -> list[A4Octahedron]:
    return a4_octahedra(window.sites([Role.VERTEX, Role.BLACK, Role.WHITE]))
