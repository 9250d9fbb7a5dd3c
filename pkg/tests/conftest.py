from __future__ import annotations

import numpy as np
import pytest

from heisenlab.heisenberg import GeometryConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def geometry():
    """Default desk-scale discretisation (n = 2)."""
    return GeometryConfig.uniform()


@pytest.fixture(scope="session")
def small_geometry():
    """Coarse grid for tests that run many convolutions."""
    return GeometryConfig.uniform(rho_max=12.0, step=0.3, center_samples=5, lambda_set=(-2, -1, 1, 2), k_max=4)


# ---------------------------------------------------------------------------
# acceptance report: one line per numbered criterion after the run

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = mark.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    status = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
    _ACCEPTANCE[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        line = f"criterion {number:2d} {status} {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
