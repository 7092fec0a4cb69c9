import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from volpriv.system import case_study_preset

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def plant():
    return case_study_preset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
