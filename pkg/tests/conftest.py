import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from errbound.config import set_profile

settings.register_profile(
    "errbound",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("errbound")


@pytest.fixture(autouse=True)
def _default_tolerances():
    set_profile("default")
    yield
    set_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.outcome != "passed"):
        number, title = marker.args
        seen = item.config.stash[_CRITERIA].setdefault(number, [title, True])
        seen[1] = seen[1] and report.outcome == "passed"
    return report


def pytest_terminal_summary(terminalreporter, config):
    criteria = config.stash[_CRITERIA]
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(criteria):
        title, ok = criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
