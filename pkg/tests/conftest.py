import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("unidim", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("unidim")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """``verdict(tag, ok, detail)`` prints one pass/fail line and fails the test when ``ok`` is false.

    A test that errors before recording still gets a FAIL line.
    """
    lines = request.config.stash.setdefault(_VERDICTS, {})
    tag = request.node.name.split("_")[1].upper()

    def record(ok: bool, detail: str):
        line = f"{tag:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        lines[tag] = line
        print(line)
        assert ok, line

    yield record
    if tag not in lines:
        lines[tag] = f"{tag:<4} FAIL  did not complete"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for tag in sorted(lines, key=lambda t: int(t[1:])):
            terminalreporter.write_line(lines[tag])
