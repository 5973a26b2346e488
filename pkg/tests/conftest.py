import math

import pytest
from hypothesis import strategies as st

from exprdiff.parser import parse_expr
from exprdiff.transforms import squaring_chain

SHARED_SUM = "sin(x1+x2)*cos(x1+x2)"


@pytest.fixture
def shared_sum():
    return parse_expr(SHARED_SUM)


@pytest.fixture
def chain3():
    return squaring_chain(3)


# Expression text over a small vocabulary; every generated string is valid
# input for the parser.
_leaf = st.sampled_from(["x", "y", "z", "1", "2", "0.5", "3"])


def _extend(children):
    binary = st.tuples(children, st.sampled_from(["+", "-", "*", "/"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})")
    func = st.tuples(st.sampled_from(["sin", "cos", "exp", "ln", "sqrt"]), children).map(
        lambda t: f"{t[0]}({t[1]})")
    neg = children.map(lambda c: f"-{c}")
    power = st.tuples(children, st.integers(-2, 4)).map(lambda t: f"({t[0]})^{t[1]}")
    return binary | func | neg | power


expr_text = st.recursive(_leaf, _extend, max_leaves=12)


def brute_unfolded_size(text_tree):
    """Size of a nested-tuple expression counting every occurrence."""
    if not isinstance(text_tree, tuple):
        return 1
    return 1 + sum(brute_unfolded_size(c) for c in text_tree[1:])


def rel_close(a, b, tol):
    return abs(a - b) / max(1.0, abs(a)) <= tol


@pytest.fixture
def isclose():
    return lambda a, b, tol=1e-9: math.isclose(a, b, rel_tol=tol, abs_tol=tol)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
