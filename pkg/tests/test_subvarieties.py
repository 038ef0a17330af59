import numpy as np
import pytest

from conftest import make
from miquel.engine import evolve
from miquel.generators import GeneratorSpec, generate, regular_grid
from miquel.subvarieties import (
    focal_residuals,
    harmonic_xy_residuals,
    integrability_deviations,
    resistor_residuals,
    s_symmetry_residuals,
    vertex_gamma_products,
    zigzag_multipliers,
    zigzag_permutation_residual,
)
from miquel.variables import VariableField, field_of, fields, gamma_field


def test_vertex_products_of_regular_grid():
    prods = vertex_gamma_products(gamma_field(regular_grid(6, 6)))
    assert len(prods) == 16
    assert all(abs(p - 1) < 1e-12 for p in prods.values())


def test_vertex_product_by_hand():
    g = VariableField("Gamma", {(1, 1, 0, "h"): 2j, (1, 1, 0, "v"): -1, (0, 1, 0, "h"): 0.5, (1, 0, 0, "v"): 1j})
    assert vertex_gamma_products(g) == {(1, 1, 0): complex(2j * -1 * 0.5 * 1j)}


def test_integrability_indicators(isoradial_map, generic_map):
    iso = integrability_deviations(field_of(isoradial_map, "Wb"), field_of(isoradial_map, "Ww"),
                                   gamma_field(isoradial_map))
    gen = integrability_deviations(field_of(generic_map, "Wb"), field_of(generic_map, "Ww"),
                                   gamma_field(generic_map))
    for key in ("im_wb", "wb_minus_ww", "gamma_product"):
        assert iso[key] < 1e-9
        assert gen[key] > 1e-3


def test_zigzag_multipliers_are_constant_on_isoradial(isoradial_map):
    for k in (-2, -1, 0, 1, 2):
        u, v, spread = zigzag_multipliers(isoradial_map, k)
        assert spread < 1e-12 and len(u) > 5 and len(v) > 5


def test_zigzags_spread_on_generic(generic_map):
    assert zigzag_multipliers(generic_map, 0)[2] > 1e-3


@pytest.mark.parametrize("k", [-2, -1, 0, 1])
def test_steps_permute_zigzags(isoradial_map, k):
    worst, count = zigzag_permutation_residual(isoradial_map, k)
    assert count > 5 and worst < 1e-9


def test_permutation_fails_on_generic(generic_map):
    worst, _ = zigzag_permutation_residual(generic_map, 0)
    assert worst > 1e-3


def test_harmonic_relations(ortho_map):
    F = fields(ortho_map)
    for res in (harmonic_xy_residuals(F["Xb"], F["Y"]), resistor_residuals(F["Xb"]), focal_residuals(ortho_map)):
        assert len(res) > 10
        assert max(res.values()) < 1e-8


def test_harmonic_relations_fail_on_generic(generic_map):
    F = fields(generic_map)
    assert max(harmonic_xy_residuals(F["Xb"], F["Y"]).values()) > 1e-3
    assert max(resistor_residuals(F["Xb"]).values()) > 1e-3
    assert max(focal_residuals(generic_map).values()) > 1e-3


def test_packing_symmetries(packing_map):
    res = s_symmetry_residuals(fields(packing_map))
    for key in ("y_reflection", "x", "w"):
        assert len(res[key]) > 10, key
        assert max(res[key].values()) < 1e-8, key


def test_packing_y_product_is_not_one(packing_map):
    # the product form fails on these maps; the reflection form above holds
    res = s_symmetry_residuals(fields(packing_map))
    assert max(res["y_product"].values()) > 1e-3


def test_packing_symmetries_fail_on_generic(generic_map):
    res = s_symmetry_residuals(fields(generic_map))
    for key in ("y_reflection", "x", "w"):
        assert max(res[key].values()) > 1e-3


def test_regular_grid_satisfies_everything():
    g = evolve(evolve(regular_grid(10, 10), 2), 2, "backward")
    F = fields(g)
    res = s_symmetry_residuals(F)
    assert max(res["y_product"].values()) < 1e-12
    assert max(harmonic_xy_residuals(F["Xb"], F["Y"]).values()) < 1e-12
