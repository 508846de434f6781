from fractions import Fraction

import pytest
from hypothesis import settings

from cadyn.ca import BINARY, builtin_rule
from cadyn.measures import bernoulli_p, markov_chain

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def product():
    return builtin_rule("product")


@pytest.fixture
def xor():
    return builtin_rule("xor")


@pytest.fixture
def flip():
    return builtin_rule("flip")


@pytest.fixture
def mu3():
    return bernoulli_p(Fraction(3, 10))


@pytest.fixture
def chain():
    return markov_chain(BINARY, [[Fraction(2, 3), Fraction(1, 3)], [Fraction(1, 2), Fraction(1, 2)]])


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
