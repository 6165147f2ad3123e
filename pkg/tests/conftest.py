import pytest

CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n = mark.args[0]
    failed = report.failed or (report.when == "call" and not report.passed)
    if failed:
        CRITERIA[n] = "FAIL"
    elif report.when == "call":
        CRITERIA.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {CRITERIA[n]}")
