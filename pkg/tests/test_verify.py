import json
import math

import numpy as np
import pytest

from conftest import make
from miquel.errors import WindowTooSmall
from miquel.generators import regular_grid
from miquel.verify import SUITES, Check, VerificationReport, map_id, parse_suites, run_suite

CORE = [s for s in SUITES if s != "subvarieties"]


@pytest.fixture(scope="module")
def generic_report():
    return run_suite(make("generic"), CORE)


def test_generic_map_passes_core_suites(generic_report):
    assert generic_report.passed, generic_report.failing()
    names = [c.name for c in generic_report.checks]
    for expected in ("incidence", "dskp_t", "dskp_p.black", "dskp_p.white", "a4", "ysystem_all.Y",
                     "realness.Xw", "w_conjugacy", "moebius_invariance.y_changes", "reconstruction_roundtrip.Xb"):
        assert expected in names


def test_report_is_deterministic(generic_report):
    again = run_suite(make("generic"), CORE)
    assert again.to_json() == generic_report.to_json()


def test_report_layout(generic_report):
    doc = json.loads(generic_report.to_json())
    assert set(doc) == {"version", "map_id", "tol_scale", "checks", "verdict"}
    assert doc["verdict"] == "pass" and doc["map_id"] == map_id(make("generic"))
    c = doc["checks"][0]
    assert {"name", "claim", "mode", "tolerance", "site_count", "max_residual", "verdict"} <= set(c)


def test_small_window_raises():
    with pytest.raises(WindowTooSmall):
        run_suite(regular_grid(4, 4), ["a4"])


def test_small_window_is_not_applicable_in_all_mode():
    rep = run_suite(regular_grid(4, 4), SUITES, skip_inapplicable=True)
    assert any(not c.applicable for c in rep.checks)
    assert rep.passed


def test_corrupted_map_fails():
    m = make("generic")
    pts = {k: np.array(v) for k, v in m.points.items()}
    pts[0][5, 5] += 1e-4
    rep = run_suite(m.replace(points=pts), ["incidence", "dskp_p"])
    assert not rep.passed
    assert "incidence" in rep.failing()


def test_tol_scale_loosens():
    m = make("generic")
    pts = {k: np.array(v) for k, v in m.points.items()}
    pts[0][5, 5] += 1e-7
    bad = m.replace(points=pts)
    assert not run_suite(bad, ["incidence"]).passed
    assert run_suite(bad, ["incidence"], tol_scale=100).passed


@pytest.mark.parametrize("kind, expected", [
    ("isoradial", {"subvarieties.integrable", "subvarieties.zigzag"}),
    ("generic", {"subvarieties.non_integrable"}),
    ("orthodiagonal", {"subvarieties.harmonic_xy", "subvarieties.resistor", "subvarieties.focal"}),
])
def test_subvariety_checks_by_kind(kind, expected):
    rep = run_suite(make(kind), ["subvarieties"])
    assert expected <= {c.name for c in rep.checks}
    assert rep.passed, rep.failing()


def test_packing_subvariety_checks():
    rep = run_suite(make("packing"), ["subvarieties"])
    assert rep.failing() == ["subvarieties.packing_y_product"]


def test_parse_suites():
    assert parse_suites("all") == list(SUITES)
    assert parse_suites("a4, incidence") == ["incidence", "a4"]
    with pytest.raises(ValueError):
        parse_suites("incidence,bogus")


def test_check_modes():
    below = Check("x", "", "max_below", 1e-8, 3, 1e-9, 1e-10, 1e-11, 0)
    above = Check("y", "", "min_above", 1e-3, 3, 1.0, 0.5, 1e-4, 0)
    assert below.passed and not above.passed
    d = Check("z", "", "max_below", 1e-8, 1, math.inf, math.inf, math.inf, 0).to_dict()
    assert d["max_residual"] == "inf" and d["verdict"] == "fail"
    rep = VerificationReport("abc", 1.0, (below, above))
    assert rep.failing() == ["y"] and not rep.passed
    assert rep.check("x") is below
