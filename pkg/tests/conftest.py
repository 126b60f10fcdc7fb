import pytest

ACCEPTANCE = {}
REPORTED = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"
    elif report.failed:
        ACCEPTANCE[name] = "FAIL"


@pytest.fixture
def report_value():
    """Record a reported (not asserted) quantity for the terminal summary."""
    def record(label, value):
        REPORTED.append((label, value))
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        tr.write_line(f"{ACCEPTANCE[name]}  {name}")
    for label, value in REPORTED:
        tr.write_line(f"REPORTED  {label}: {value}")
