from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from cifs import MapDescriptor, builtin

# exact rationals with |r| < 1 and moderate translations
ratios = st.fractions(min_value=Fraction(-49, 50), max_value=Fraction(49, 50), max_denominator=50)
shifts = st.fractions(min_value=-10, max_value=10, max_denominator=50)


def maps(d):
    return st.builds(lambda r, b: MapDescriptor(r, tuple(b)), ratios, st.lists(shifts, min_size=d, max_size=d))


@pytest.fixture(scope="session")
def ex1():
    return builtin("EX1")


@pytest.fixture(scope="session")
def dyadic():
    return builtin("DYADIC")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
