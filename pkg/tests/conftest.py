import functools
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from kleinmaskit.examples import builtin  # noqa: E402
from kleinmaskit.verify import run_all  # noqa: E402

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("repo")


@functools.lru_cache(maxsize=None)
def spec_of(name, n=None):
    return builtin(name, n)


@functools.lru_cache(maxsize=None)
def report_of(name):
    return run_all(spec_of(name))


@pytest.fixture(scope="session")
def reports():
    return report_of


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.name
    if not name.startswith("test_criterion_") or "test_acceptance" not in item.nodeid:
        return
    n = int(name.split("_")[2])
    title = (item.function.__doc__ or "").strip().splitlines()[0]
    prev = _CRITERIA.get(n, (True, title))
    ok = prev[0] and not rep.failed
    _CRITERIA[n] = (ok, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, title = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
