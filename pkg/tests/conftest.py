import pytest

from depnet.graph import build_graph

_acceptance: list[tuple[str, str]] = []


@pytest.fixture
def g1():
    """A -> B, C -> B, B -> D with ids A=0, B=1, C=2, D=3."""
    return build_graph([("A", "B"), ("C", "B"), ("B", "D")])


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.skipped):
        return
    if "acceptance" not in report.keywords:
        return
    outcome = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
    _acceptance.append((outcome, report.nodeid.split("::")[-1]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, name in _acceptance:
        terminalreporter.write_line(f"[{outcome}] {name}")
