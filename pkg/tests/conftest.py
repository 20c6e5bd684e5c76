import numpy as np
import pytest

from sgum.social import SocialGraph
from sgum.spectrum import COMPLETE, random_scenario

PICOWATT = 1e-12

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def compliant_instance(rng, n_users=None, n_channels=None, power_unit=PICOWATT):
    """Random scenario plus symmetric ties meeting the potential-game preconditions."""
    n = int(rng.integers(2, 6)) if n_users is None else n_users
    m = int(rng.integers(2, 5)) if n_channels is None else n_channels
    reach = COMPLETE if rng.random() < 0.5 else float(rng.uniform(150, 600))
    s = random_scenario(n, m, rng, vacancy_prob=float(rng.uniform(0.5, 1.0)),
                        interference_range=reach, power_unit=power_unit)
    ties = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.6:
                w = float(rng.uniform(0.05, 1.0))
                ties[(i, j)] = ties[(j, i)] = w
    return s, SocialGraph(n, ties)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
