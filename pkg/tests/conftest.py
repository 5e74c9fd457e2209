import os

import numpy as np
import pytest
from hypothesis import settings

from geomreg import svd

settings.register_profile("default", derandomize=True, deadline=None)
settings.register_profile("stress", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_instance(rng, n=None, m=None, cond=1e3):
    """Random F with singular values log-spaced over ``cond`` and random data y."""
    n = int(rng.integers(2, 51)) if n is None else n
    m = int(rng.integers(2, 51)) if m is None else m
    r = min(n, m)
    U, _ = np.linalg.qr(rng.standard_normal((n, r)))
    V, _ = np.linalg.qr(rng.standard_normal((m, r)))
    s = np.logspace(0, -np.log10(cond), r)
    F = (U * s) @ V.T
    y = rng.standard_normal(n)
    return F, y


@pytest.fixture
def identity2():
    """F = I_2, y = (3, 4)."""
    F = np.eye(2)
    y = np.array([3.0, 4.0])
    return svd(F), y


@pytest.fixture
def diag21():
    """F = diag(2, 1), y = (4, 3)."""
    F = np.diag([2.0, 1.0])
    y = np.array([4.0, 3.0])
    return svd(F), y


ACCEPTANCE_LINES = {}


@pytest.fixture
def record_criterion():
    """Record the outcome of one acceptance criterion, then assert it."""

    def record(number, passed, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
