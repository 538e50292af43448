import pytest

from edsim.config import daily_test_config, impact_test_config, strain_test_config
from edsim.harness import build_scenario
from edsim.engine import run_simulation

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True, "seen": False})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["seen"] = True
        if report.outcome != "passed":
            entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["passed"] and entry["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")


def _simulate(config):
    return run_simulation(build_scenario(config), config)


@pytest.fixture(scope="session")
def impact_run():
    return _simulate(impact_test_config())


@pytest.fixture(scope="session")
def strain_run():
    return _simulate(strain_test_config())


@pytest.fixture(scope="session")
def daily_run():
    return _simulate(daily_test_config())


@pytest.fixture(scope="session")
def daily_run_half_step():
    return _simulate(daily_test_config(step=0.0005))
