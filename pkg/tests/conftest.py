import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fvineq.mesh import build_structured

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid2():
    """The 2x2 unit-square grid used by most hand-computed examples."""
    return build_structured(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance results, filled by test_acceptance.py and echoed after the run.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
