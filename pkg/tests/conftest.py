import functools
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from miquel.generators import GeneratorSpec, generate

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def make(kind: str, n: int = 12, seed: int = 1, steps: int = 2, back: int = 2, **params):
    return generate(GeneratorSpec(kind=kind, dims=(n, n), seed=seed, steps=steps, back_steps=back,
                                  params=dict(params)))


@pytest.fixture(scope="session")
def generic_map():
    return make("generic")


@pytest.fixture(scope="session")
def isoradial_map():
    return make("isoradial")


@pytest.fixture(scope="session")
def ortho_map():
    return make("orthodiagonal")


@pytest.fixture(scope="session")
def packing_map():
    return make("packing")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    results = sys.modules.get("test_acceptance")
    if results is None or not results.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, (ok, summary) in sorted(results.RESULTS.items()):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({summary})")
