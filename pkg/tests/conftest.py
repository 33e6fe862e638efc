import numpy as np
import pytest

from wsbfs.graph import build_csr

ACCEPTANCE_LINES: list[str] = []


def path_graph(n):
    return build_csr([(i, i + 1) for i in range(n - 1)], n, symmetrize=True)


def star_graph(leaves):
    return build_csr([(0, i) for i in range(1, leaves + 1)], leaves + 1, symmetrize=True)


def diamond_graph():
    return build_csr([(0, 1), (0, 2), (1, 3), (2, 3)], 4)


def two_components():
    # {0,1,2} triangle and {3,4} edge, 5 isolated
    return build_csr([(0, 1), (1, 2), (2, 0), (3, 4)], 6, symmetrize=True)


@pytest.fixture
def path4():
    return path_graph(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
