import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def acceptance_log(request):
    """Collects 'criterion N: PASS/FAIL ...' lines for the terminal summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def log(line):
        lines.append(line)
        if tr is not None and request.config.option.verbose > 0:
            tr.write_line("")
            tr.write_line(line)

    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
