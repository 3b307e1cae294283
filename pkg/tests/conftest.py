import functools

import numpy as np
import pytest

from racah.core import validate_params
from racah.oracle import exact_matrix

REF = (4, 20, 2, 1)


@functools.lru_cache(maxsize=None)
def oracle_values(a, b, alpha, beta):
    return exact_matrix(validate_params(a, b, alpha, beta)).values


def ortho_error(values):
    g = values @ values.T - np.eye(values.shape[0])
    return float(np.abs(g).max())


@pytest.fixture(scope="session")
def ref_params():
    return validate_params(*REF)


@pytest.fixture(scope="session")
def ref_oracle():
    return oracle_values(*REF)


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
