"""Shared pytest hooks: the acceptance summary block.

Every test in test_acceptance.py is one shipping criterion. After the
run, one "ACCEPTANCE <criterion>: PASS|FAIL" line is printed per
criterion so the gate can be read at a glance.
"""

_ACCEPTANCE: dict[str, str] = {}


def _criterion_name(nodeid: str) -> str:
    name = nodeid.split("::")[-1].split("[")[0]
    return name.removeprefix("test_")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = _criterion_name(report.nodeid)
    if report.when == "call":
        _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[name] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _ACCEPTANCE.items():
        terminalreporter.write_line(f"ACCEPTANCE {name}: {verdict}")
