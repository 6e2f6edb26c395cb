import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, allow_infinity=False)
mats = st.tuples(finite, finite, finite, finite).map(lambda t: np.array(t, dtype=float).reshape(2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)
