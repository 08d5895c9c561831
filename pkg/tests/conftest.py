from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_criteria: dict = {}
_notes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    num, title = getattr(report, "_criterion", (None, None))
    if num is None:
        return
    entry = _criteria.setdefault(num, {"title": title, "passed": 0, "failed": 0})
    entry["passed" if report.outcome == "passed" else "failed"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result()._criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        e = _criteria[num]
        status = "PASS" if e["failed"] == 0 else "FAIL"
        terminalreporter.write_line(
            f"criterion {num}: {status}  {e['title']}  ({e['passed']} passed, {e['failed']} failed)")
        for line in _notes.get(num, []):
            terminalreporter.write_line(f"    {line}")


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion's summary line."""
    mark = request.node.get_closest_marker("criterion")
    num = mark.args[0] if mark else None
    return lambda text: _notes.setdefault(num, []).append(text)
