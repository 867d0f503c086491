import numpy as np
import pytest

from rgbmesh import make_mesh
from rgbmesh.experiments import hexagon6

SQUARE_XY = [(0, 0), (1, 0), (1, 1), (0, 1)]

# Hand-executed refinements of the two-triangle square, stored 1-based.
# B: both elements red-refined.  C: B with element 8 marked.
B_XY = SQUARE_XY + [(0.5, 0), (0.5, 0.5), (0, 0.5), (1, 0.5), (0.5, 1)]
B_ELEMENTS = [(1, 6, 7), (6, 3, 9), (7, 9, 4), (9, 7, 6), (3, 6, 8), (6, 1, 5), (8, 5, 2), (5, 8, 6)]
C_XY = B_XY + [(0.25, 0.25), (0.75, 0.75), (0.5, 0.25), (0.75, 0.25), (0.75, 0.5)]
C_ELEMENTS = [
    (7, 1, 10), (6, 7, 10), (9, 6, 11), (3, 9, 11), (7, 9, 4), (9, 7, 6),
    (8, 3, 11), (11, 6, 14), (8, 11, 14), (10, 5, 12), (6, 10, 12), (1, 5, 10),
    (2, 8, 13), (5, 2, 13), (5, 13, 12), (13, 8, 14), (12, 14, 6), (14, 12, 13),
]


@pytest.fixture
def mesh_a():
    return make_mesh(SQUARE_XY, np.array([(1, 3, 4), (3, 1, 2)]) - 1)


@pytest.fixture
def mesh_b():
    return make_mesh(B_XY, np.array(B_ELEMENTS) - 1, n_initial=4)


@pytest.fixture
def mesh_c():
    return make_mesh(C_XY, np.array(C_ELEMENTS) - 1, n_initial=4)


@pytest.fixture
def triangle():
    return make_mesh([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])


@pytest.fixture
def hexagon():
    return hexagon6()


# Filled by test_acceptance.py, printed after the run.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
