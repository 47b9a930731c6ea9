import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "lqembed", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lqembed")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def unit_points(rng, n, count):
    x = rng.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# one (number, title, passed, detail) entry per acceptance criterion, filled by test_acceptance
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} [{num:2d}] {title}: {detail}")
