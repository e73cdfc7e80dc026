import random
from pathlib import Path

import pytest

from theta_upsilon import corpus
from theta_upsilon.graph_core import link_graph, load_graph, theta_graph

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


@pytest.fixture
def theta2():
    return theta_graph(2)


@pytest.fixture
def theta3():
    return theta_graph(3)


@pytest.fixture
def c4():
    return load_graph(str(DATA_DIR / "c4.json"))


@pytest.fixture
def square():
    return link_graph(2)


@pytest.fixture(scope="session")
def unknot():
    return corpus.unknot()


@pytest.fixture(scope="session")
def trefoil():
    return corpus.trefoil()


@pytest.fixture(scope="session")
def figure_eight():
    return corpus.figure_eight()


@pytest.fixture(scope="session")
def t34():
    return corpus.torus_knot_3_4()
