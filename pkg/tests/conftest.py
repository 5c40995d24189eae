import sys

import numpy as np
import pytest

R2 = np.sqrt(2.0)

# reference 8-mode tree matrix (target of criterion 1), prefactor 1/(2 sqrt 2)
REFERENCE_TREE_8 = (
    np.array(
        [
            [1, 1, R2, 0, 2, 0, 0, 0],
            [1, -1, 0, R2, 0, 2, 0, 0],
            [1, 1, -R2, 0, 0, 0, 2, 0],
            [1, -1, 0, -R2, 0, 0, 0, 2],
            [1, 1, R2, 0, -2, 0, 0, 0],
            [1, -1, 0, -R2, 0, -2, 0, 0],
            [1, 1, R2, 0, 0, 0, -2, 0],
            [1, -1, 0, -R2, 0, 0, 0, -2],
        ]
    )
    / (2 * R2)
)

# the same matrix with the two sign slips (row 6 col 4, row 7 col 3) corrected
CORRECTED_TREE_8 = REFERENCE_TREE_8.copy()
CORRECTED_TREE_8[5, 3] *= -1
CORRECTED_TREE_8[6, 2] *= -1


def random_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_field(n, rng, scale=3.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
