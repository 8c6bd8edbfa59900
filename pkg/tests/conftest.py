import numpy as np
import pytest

from gaussbath._backend import available_backends

BACKENDS = available_backends()

# lines recorded by tests/test_acceptance.py, printed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(BACKENDS))
def kern(request):
    """Each available kernel module in turn."""
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20091005)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
