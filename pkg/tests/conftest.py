from __future__ import annotations

import random
import sys

import pytest

ACCEPTANCE_LINES = pytest.StashKey[list]()

from k3dyn.fixtures import periodic_fixture_222, seed_wehler22, seed_wehler222

# orbit coordinates get far longer than the default str() digit limit
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


@pytest.fixture(scope="session")
def sc_surface():
    return seed_wehler222(random.Random(0))


@pytest.fixture(scope="session")
def sab_surface():
    return seed_wehler22(random.Random(0))


@pytest.fixture(scope="session")
def periodic():
    return periodic_fixture_222()


@pytest.fixture(scope="session")
def sc_seeds():
    rng = random.Random(2024)
    return [seed_wehler222(rng) for _ in range(200)]


@pytest.fixture(scope="session")
def sab_seeds():
    rng = random.Random(2025)
    return [seed_wehler22(rng) for _ in range(200)]


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda t: int(t.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
