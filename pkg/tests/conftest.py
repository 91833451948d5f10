import numpy as np
import pytest


_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): exit criterion of the build")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    cid = getattr(report, "_criterion", None)
    if cid:
        _ACCEPTANCE[cid[0]] = (cid[1], "PASS" if report.passed else "FAIL")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark:
        rep._criterion = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE, key=lambda c: int(c.lstrip("AC"))):
        title, status = _ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{status}] {cid}: {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
