import functools

import pytest
from hypothesis import settings

from statgeom.checks import run_scenario
from statgeom.scenarios import bundled_scenario

settings.register_profile("repo", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("repo")


@functools.lru_cache(maxsize=None)
def _bundled(ident):
    return bundled_scenario(ident)


@pytest.fixture
def bundled():
    return _bundled


@functools.lru_cache(maxsize=None)
def _bundled_run(ident):
    return run_scenario(_bundled(ident))


@pytest.fixture
def bundled_run():
    """Full run report of a bundled scenario, computed once per session."""
    return _bundled_run


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
