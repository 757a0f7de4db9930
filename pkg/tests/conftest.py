import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("default")


@pytest.fixture
def golden():
    """3x3 cyclic shift and the diagonal clock matrix."""
    U = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
    w = np.exp(2j * math.pi / 3)
    V = np.diag([w, np.conj(w), 1.0])
    return U, V


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gue(rng, n, norm=None):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (X + X.conj().T) / 2
    if norm is not None:
        H *= norm / np.linalg.norm(H, 2)
    return H


def haar(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
