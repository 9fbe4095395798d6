import random

import pytest
from hypothesis import settings

from vpe.field import DEFAULT_MODULUS, PrimeModulus
from vpe.params import derive_params
from vpe.poly import Polynomial

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_acceptance_results = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _acceptance_results.get(marker, "PASS")
        _acceptance_results[marker] = "PASS" if (report.passed and prev == "PASS") else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        report.acceptance = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_acceptance_results.items()):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")


@pytest.fixture
def f97():
    return PrimeModulus(97)


@pytest.fixture
def big():
    return PrimeModulus(DEFAULT_MODULUS)


@pytest.fixture
def params_2_4(f97):
    return derive_params(f97, 4, 2, 4)


@pytest.fixture
def poly_1234(f97):
    return Polynomial.from_ints([1, 2, 3, 4], f97)


@pytest.fixture
def rng():
    return random.Random(20240517)
