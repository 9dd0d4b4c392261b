import os

import pytest
from hypothesis import HealthCheck, settings

from haarperm import PermutationMap
from haarperm.oracles import tree_addresses

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def swap(depth, a, b):
    mapping = {x: x for x in tree_addresses(depth)}
    mapping[a], mapping[b] = b, a
    return PermutationMap(depth, mapping)


@pytest.fixture
def swap2():
    """depth 2, "00" <-> "10"."""
    return swap(2, "00", "10")


@pytest.fixture
def swap3():
    """depth 3, "00" <-> "1"."""
    return swap(3, "00", "1")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
