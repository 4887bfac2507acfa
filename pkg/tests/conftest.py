import math

import pytest

from sntbif.diagram import DiagramSpec, build_diagram

SADDLE_SET = {"b1": 15.0, "a11": -5.0, "a12": -3.0, "a21": 2.0, "a22": 1.0}
ELLIPTIC_SET = {"b1": 15.0, "a11": 7.0, "a12": -3.0, "a21": 2.0, "a22": 1.0}

MIN_SADDLE = {
    "eps": 1.0,
    "k1": math.sqrt(10) / 2.0,
    "k2": 8.0 / math.sqrt(10),
    "k3": math.sqrt(10) / 15.0,
}
MIN_ELLIPTIC = {
    "eps": -1.0,
    "k1": -math.sqrt(14) / 2.0,
    "k2": 16.0 / math.sqrt(14),
    "k3": -math.sqrt(14) / 21.0,
}


@pytest.fixture(scope="session")
def saddle_diagram():
    return build_diagram(DiagramSpec(model="MLV", fixed=dict(SADDLE_SET)))


@pytest.fixture(scope="session")
def elliptic_diagram():
    return build_diagram(DiagramSpec(model="MLV", fixed=dict(ELLIPTIC_SET)))


@pytest.fixture(scope="session")
def min_saddle_diagram():
    return build_diagram(
        DiagramSpec(model="ST2_MIN", active=("a", "b"), fixed=dict(MIN_SADDLE))
    )


@pytest.fixture(scope="session")
def min_elliptic_diagram():
    return build_diagram(
        DiagramSpec(model="ST2_MIN", active=("a", "b"), fixed=dict(MIN_ELLIPTIC))
    )
