import pytest

from lawmine import fixtures
from lawmine.knowledge_file import load


@pytest.fixture
def updown():
    return load(fixtures.path("updown.kb"))


@pytest.fixture
def accelerated():
    return load(fixtures.path("accelerated_up.kb"))


@pytest.fixture
def cardholder():
    return load(fixtures.path("cardholder.kb"))


_LINES = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one pass/fail line per acceptance criterion; returns ``ok``."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash.setdefault(_LINES, []).append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
