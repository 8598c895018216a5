import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hhjplate.mesh import BoundaryLabel, build_domain, from_triangles

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def labeled(label):
    return lambda m: label


def two_triangle_square(label=BoundaryLabel.CLAMPED):
    """Unit square cut along the (0,0)-(1,1) diagonal."""
    v = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return from_triangles(v, [[0, 1, 2], [0, 2, 3]], labeled(label))


def unit_right_triangle(label=BoundaryLabel.CLAMPED):
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return from_triangles(v, [[0, 1, 2]], labeled(label))


def square_grid(n, label=BoundaryLabel.CLAMPED):
    m = build_domain("unit_square", n)
    if label == BoundaryLabel.CLAMPED:
        return m
    return from_triangles(m.vertices, m.triangles, labeled(label))


@pytest.fixture(scope="session")
def square8():
    return build_domain("unit_square", 8)


@pytest.fixture(scope="session")
def lshape_mixed():
    return build_domain("lshape", 2, "lshape_mixed")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
