import time

import pytest

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one acceptance line and fail the test when the criterion does not hold."""
    start = time.perf_counter()

    def record(number: int, title: str, ok: bool, detail: str, limit_s: float):
        elapsed = time.perf_counter() - start
        in_time = elapsed < limit_s
        status = "PASS" if ok and in_time else "FAIL"
        line = f"[{status}] criterion {number:>2} {title}: {detail} ({elapsed:.1f}s, limit {limit_s:g}s)"
        request.config.stash[_VERDICTS].append((number, line))
        print(line)
        assert ok, line
        assert in_time, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = sorted(config.stash.get(_VERDICTS, []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in lines:
            terminalreporter.write_line(line)
