import pytest

from finrange.domain import QUASILINEAR, PreferenceInterval
from finrange.measure import ParamMeasure

_CRITERIA: dict[str, list[str]] = {}


@pytest.fixture
def iv():
    return PreferenceInterval(QUASILINEAR, 0.01, 1.0)


@pytest.fixture
def unit():
    return PreferenceInterval(QUASILINEAR, 0.0, 1.0)


@pytest.fixture
def uniform(iv):
    return ParamMeasure.uniform(iv)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.split("::")[-1]
    if "test_acceptance" in report.nodeid and name.startswith("test_criterion_"):
        _CRITERIA.setdefault(name.split("_")[2], []).append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=int):
        results = _CRITERIA[key]
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        line = f"{status}  criterion {key}  ({len(results) - len(failed)}/{len(results)} checks passed)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
