import numpy as np
import pytest

from neumann import PhasePoint, PotentialSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pot122():
    return PotentialSpec([1.0, 2.0, 2.0], confluent=True)


@pytest.fixture
def pot211():
    return PotentialSpec([2.0, 1.0, 1.0], confluent=True)


@pytest.fixture
def pole():
    return PhasePoint([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])


@pytest.fixture
def rel_eq():
    """Circular orbit in the doubled eigenplane, K = 1."""
    return PhasePoint([0.0, 1.0, 0.0], [0.0, 0.0, 1.0])


def random_confluent(rng, n, low=0.5, high=4.0):
    """Confluent spectrum with n distinct values, last one doubled."""
    while True:
        a = rng.uniform(low, high, n)
        if np.min(np.diff(np.sort(a))) > 0.1:
            return PotentialSpec(np.append(a, a[-1]), confluent=True)


def tangent_basis(x):
    """Orthonormal basis of T_x(T*S^n) inside R^(2(n+1))."""
    dim = x.dim
    constraints = np.zeros((2, 2 * dim))
    constraints[0, :dim] = x.q
    constraints[1, :dim] = x.p
    constraints[1, dim:] = x.q
    _, _, vt = np.linalg.svd(constraints)
    return vt[2:].T


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
