import re

_criteria: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[m.group(1)] = (m.group(2).replace("_", " "), report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_criteria, key=int):
        title, outcome = _criteria[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {int(num):2d}: {verdict}  {title}")
