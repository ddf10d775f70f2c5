import pytest

from decprune import medical_diagnosis


@pytest.fixture(scope="session")
def md():
    return medical_diagnosis()


_CRITERIA: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the summary."""
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    yield
    failed = getattr(request.node, "_call_failed", False)
    ok = _CRITERIA.get(number, (title, True))[1] and not failed
    _CRITERIA[number] = (title, ok)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item._call_failed = report.failed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
