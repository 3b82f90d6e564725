import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(number, title, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        lines.append((number, line))
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
