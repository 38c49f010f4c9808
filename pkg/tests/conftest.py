import random
from fractions import Fraction

import pytest

from sprout_forge import brace, convolution as cv, sprout as sp


def small_trees(max_arity=3, max_nu=2):
    """Every standard tree with arity <= max_arity and at most max_nu neutral vertices."""
    out = []
    for n in range(1, max_arity + 1):
        for nu in range(0, min(max_nu, n - 1) + 1):
            out.extend(brace.standard_trees(n, nu))
    return out


def random_conv(rng, n, d, size=3):
    terms = cv.basis(n, d)
    if not terms:
        return {}
    picked = rng.sample(terms, min(size, len(terms)))
    return cv.clean({t: Fraction(rng.choice((-1, 1, 2))) for t in picked})


@pytest.fixture(scope="session")
def alpha_prime():
    return sp.seed_paper()


@pytest.fixture(scope="session")
def order3(alpha_prime):
    result, report = sp.extend(alpha_prime, 2)
    return result, report


@pytest.fixture
def rng():
    return random.Random(20240611)


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    note = getattr(item, "acceptance_note", "")
    _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL", note)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, note = _ACCEPTANCE[number]
        line = f"criterion {number}: {status}  {title}"
        terminalreporter.write_line(line + (f"  ({note})" if note else ""))
