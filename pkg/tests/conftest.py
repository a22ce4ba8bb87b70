import numpy as np
import pytest
from hypothesis import settings

from latlip.operator import catalog_f_section5, catalog_G, catalog_R, catalog_S

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def S():
    return catalog_S()


@pytest.fixture
def G():
    return catalog_G()


@pytest.fixture
def R0():
    return catalog_R(0.0)


@pytest.fixture
def f5():
    return catalog_f_section5()


CATALOG = {
    "S": catalog_S,
    "G": catalog_G,
    "R0": lambda: catalog_R(0.0),
    "R3": lambda: catalog_R(3.0),
    "R-10": lambda: catalog_R(-10.0),
    "f5": catalog_f_section5,
}


@pytest.fixture(params=sorted(CATALOG))
def any_operator(request):
    return CATALOG[request.param]()


def random_points(T, m, rng):
    box = T.domain_box
    return box[:, 0] + rng.random((m, T.dimension)) * (box[:, 1] - box[:, 0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
