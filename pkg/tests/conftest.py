import numpy as np
import pytest

_acceptance = []
_metrics: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        detail = _metrics.get(name, "")
        terminalreporter.write_line(f"{mark}  {name}  ({duration:.1f}s)  {detail}".rstrip())


@pytest.fixture
def metric(request):
    """Record a short measured-value note shown next to the acceptance line."""

    def record(text: str):
        _metrics[request.node.name] = text

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
