import numpy as np
import pytest
from hypothesis import settings

from cesaro_kothe import weights

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def power():
    return weights.power_series()


@pytest.fixture(scope="session")
def nuclear():
    return weights.nuclear_g1_example()


G1_BUILTINS = {
    "power-series": {},
    "nuclear-g1-example": {},
    "sn-gap": {},
    "dragilev": {},
    "dragilev-sinh": {"f": "sinh"},
}


def g1_family(key):
    name = "dragilev" if key.startswith("dragilev") else key
    return weights.builtin(name, **G1_BUILTINS[key])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
