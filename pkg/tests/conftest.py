import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def _report(number, ok, detail, seconds):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}  ({seconds:.1f} s)"
        lines.append((number, line))
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
