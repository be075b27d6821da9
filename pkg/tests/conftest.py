from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from twocolor_hhg.analysis import trace_pair

from .helpers import params_for

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def ar2():
    return params_for(2e14)


@pytest.fixture(scope="session")
def classical2():
    return params_for(2e14, ip_ev=0.0)


@pytest.fixture(scope="session")
def ar2_pair(ar2):
    return trace_pair(ar2, step=0.05)


@pytest.fixture(scope="session")
def classical2_pair(classical2):
    return trace_pair(classical2, step=0.05)


def pytest_terminal_summary(terminalreporter):
    from .helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
