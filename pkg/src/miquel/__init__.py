"""Miquel dynamics for circle patterns on the octahedral lattice."""

from .circles import Circle, circumcircle, second_intersection
from .engine import MiquelMap, evolve, evolve_step, extract_p, extract_t, from_circle_pattern, layer, layer_map
from .errors import MiquelError
from .fileio import load_map, save_map
from .generators import GeneratorSpec, apply_moebius, gen_isoradial, generate, regular_grid
from .projective import INF, MoebiusTransform, cross_ratio, multi_ratio
from .reconstruction import complete_map_from_pcolor, reconstruct_from_x, reconstruct_from_y
from .variables import VariableField, fields, field_of
from .verify import VerificationReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "Circle", "circumcircle", "second_intersection",
    "MiquelMap", "evolve", "evolve_step", "extract_p", "extract_t", "from_circle_pattern", "layer", "layer_map",
    "MiquelError", "load_map", "save_map",
    "GeneratorSpec", "apply_moebius", "gen_isoradial", "generate", "regular_grid",
    "INF", "MoebiusTransform", "cross_ratio", "multi_ratio",
    "complete_map_from_pcolor", "reconstruct_from_x", "reconstruct_from_y",
    "VariableField", "fields", "field_of",
    "VerificationReport", "run_suite",
]
