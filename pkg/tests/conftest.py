import time

import pytest

from cleantable.affordance import generate_dataset, train


@pytest.fixture(scope="session")
def trained_net_info():
    """Effect network trained once with the default seed, shared by all modules."""
    dataset = generate_dataset()
    t0 = time.perf_counter()
    net = train(dataset, epochs=100, seed=0)
    return {"net": net, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def trained_net(trained_net_info):
    return trained_net_info["net"]


# One line per acceptance criterion, echoed after the run even when pytest
# captures stdout. Populated by tests/test_acceptance.py.
ACCEPTANCE_REPORT: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)
