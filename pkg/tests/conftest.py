import os

import numpy as np
import pytest

from cvqelm.gaussian import omega


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def assert_symplectic(S, tol=1e-12):
    M = S.shape[0] // 2
    W = omega(M)
    assert np.abs(S.T @ W @ S - W).max() < tol


def jets_csv():
    """Path of the jet CSV if one is provided through the environment."""
    for path in (
        os.environ.get("CVQELM_JETS_CSV"),
        os.path.join(os.environ.get("CVQELM_DATA_DIR", ""), "jets.csv") if os.environ.get("CVQELM_DATA_DIR") else None,
    ):
        if path and os.path.exists(path):
            return path
    return None


ACCEPTANCE_LINES = []


def report(criterion, passed, detail):
    status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
