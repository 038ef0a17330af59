import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from miquel.errors import ParityError
from miquel.lattice import A4Site, LatticeSite, Role, Window, a4_octahedra, a4_octahedra_touching, \
    octahedron_tetrahedra, octahedron_vertices, phi_embed, phi_inverse, shift, tetra_vertices, vertex_tetrahedra

ints = st.integers(-6, 6)
triples = st.tuples(ints, ints, ints)


def test_shift_examples():
    assert shift((0, 0, 0), [1, 2]) == (1, 1, 0)
    assert shift((1, 1, 1), [-3]) == (1, 1, 0)
    with pytest.raises(ValueError):
        shift((0, 0, 0), [4])


@given(triples, st.lists(st.sampled_from([1, 2, 3, -1, -2, -3]), max_size=6))
def test_shift_inverse(z, ops):
    assert shift(shift(z, ops), [-o for o in ops]) == z


def test_octahedron_vertices_example():
    vs = octahedron_vertices((1, 1, 1))
    assert set(vs) == {(2, 1, 1), (0, 1, 1), (1, 2, 1), (1, 0, 1), (1, 1, 2), (1, 1, 0)}
    # opposite vertices sit three apart in the list
    for i in range(3):
        a, b = np.array(vs[i]), np.array(vs[i + 3])
        assert np.abs(a - b).sum() == 2 and np.abs(a - b).max() == 2
    assert all(sum(v) % 2 == 0 for v in vs)
    with pytest.raises(ParityError):
        octahedron_vertices((0, 0, 0))


def test_octahedron_tetrahedra_example():
    ts = octahedron_tetrahedra((1, 1, 1))
    assert LatticeSite((0, 0, 0), Role.BLACK) in ts
    assert LatticeSite((1, 1, 1), Role.WHITE) in ts
    assert sum(t.role is Role.BLACK for t in ts) == 4
    assert all(sum(t.z) % 2 == (0 if t.role is Role.BLACK else 1) for t in ts)


def test_lattice_site_parity():
    with pytest.raises(ParityError):
        LatticeSite((1, 0, 0), Role.VERTEX)
    with pytest.raises(ParityError):
        LatticeSite((0, 0, 0), Role.WHITE)


@given(triples)
def test_vertex_tetrahedra_are_incident(v):
    if sum(v) % 2:
        v = shift(v, [1])
    for T in vertex_tetrahedra(v):
        assert v in tetra_vertices(T.z)


def test_phi_origin_and_layers():
    assert phi_embed(LatticeSite((0, 0, 0), Role.VERTEX)).w == (0, 0, 0, 0, 0)
    assert phi_embed(LatticeSite((0, 0, 0), Role.BLACK)).layer == 1
    assert phi_embed(LatticeSite((1, 0, 0), Role.WHITE)).layer == -1
    with pytest.raises(ValueError):
        A4Site((1, 0, 0, 0, 0))


E5 = np.eye(5, dtype=int)
STEPS = {tuple(E5[4] - E5[i]) for i in range(4)}


@given(triples)
def test_phi_adjacency_differences(z):
    """Vertex/tetrahedron incidences map to the four vectors e5 - e_i, each exactly once."""
    for role, T in ((Role.BLACK, z if sum(z) % 2 == 0 else shift(z, [1])),
                    (Role.WHITE, z if sum(z) % 2 else shift(z, [1]))):
        wt = np.array(phi_embed(LatticeSite(T, role)).w)
        diffs = set()
        for v in tetra_vertices(T):
            wv = np.array(phi_embed(LatticeSite(v, Role.VERTEX)).w)
            diffs.add(tuple(wt - wv) if role is Role.BLACK else tuple(wv - wt))
        assert diffs == STEPS


@given(triples)
def test_phi_inverse(z):
    roles = [Role.VERTEX, Role.BLACK] if sum(z) % 2 == 0 else [Role.WHITE]
    for r in roles:
        s = LatticeSite(z, r)
        assert phi_inverse(phi_embed(s)) == s


def test_phi_injective_on_window():
    sites = Window.box(6, 6, range(-1, 3)).sites([Role.VERTEX, Role.BLACK, Role.WHITE])
    images = {phi_embed(s).w for s in sites}
    assert len(images) == len(sites)


def brute_force_a4(sites):
    """Scan every base with coordinate sum -2 in the bounding box of the images."""
    W = {phi_embed(s).w for s in sites}
    arr = np.array(sorted(W))
    lo, hi = arr.min(axis=0) - 1, arr.max(axis=0)
    count = {"pure": 0, "mixed": 0}
    for b in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(4))):
        b5 = -2 - sum(b)
        base = np.array(list(b) + [b5])
        for m in range(5):
            rest = [i for i in range(5) if i != m]
            verts = [tuple(base + E5[i] + E5[j]) for i, j in itertools.combinations(rest, 2)]
            if all(v in W for v in verts):
                count["pure" if m == 4 else "mixed"] += 1
    return count


def test_a4_count_matches_brute_force():
    win = Window.box(6, 6, range(0, 3))
    octs = a4_octahedra_touching(win)
    got = {"pure": sum(o.kind == "pure" for o in octs), "mixed": sum(o.kind == "mixed" for o in octs)}
    assert got == brute_force_a4(win.sites([Role.VERTEX, Role.BLACK, Role.WHITE]))
    assert got["pure"] > 0 and got["mixed"] > 0


def test_a4_octahedron_composition():
    octs = a4_octahedra_touching(Window.box(6, 6, range(0, 3)))
    for o in octs:
        roles = [s.role for s in o.sites]
        if o.kind == "mixed":
            assert roles.count(Role.VERTEX) == 3
            assert len(set(roles) - {Role.VERTEX}) == 1
        else:
            assert len(set(roles)) == 1
    # pure octahedra of vertices are exactly the images of lattice octahedra
    pure_v = {frozenset(s.z for s in o.sites) for o in octs if o.kind == "pure" and o.sites[0].role is Role.VERTEX}
    assert frozenset(octahedron_vertices((2, 2, 1))) in pure_v


def test_a4_tiny_window_is_empty():
    assert a4_octahedra([LatticeSite((0, 0, 0), Role.VERTEX)]) == []


def test_window_erosion():
    w = Window.box(5, 6, [0]).eroded()
    assert w.ranges == {0: (1, 3, 1, 4)}
    assert w.contains((1, 1, 0)) and not w.contains((0, 0, 0))
