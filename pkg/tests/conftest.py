import time
import numpy as np
import pytest
from hypothesis import HealthCheck, settings


settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


RUNTIME_BUDGET_S = 300.0
_start = {}


def pytest_sessionstart(session):
    _start["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _start.get("t", time.perf_counter())
    verdict = "PASS" if elapsed <= RUNTIME_BUDGET_S else "FAIL"
    terminalreporter.write_line(f"[runtime] {verdict} full session {elapsed:.1f}s (budget {RUNTIME_BUDGET_S:.0f}s)")
