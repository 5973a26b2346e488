import math
import random

import pytest

from exprdiff.core import Binary, ExprStore, OpKind, Unary
from exprdiff.evaluator import (
    DomainError,
    UnboundVariable,
    check_gradient,
    evaluate,
    finite_difference,
    relative_error,
    sample_valuation,
)
from exprdiff.parser import parse_expr
from exprdiff.transforms import to_forest


def test_shared_sum_value(shared_sum):
    s = 0.3 + 0.4
    assert evaluate(*shared_sum, {"x1": 0.3, "x2": 0.4}) == pytest.approx(math.sin(s) * math.cos(s), rel=1e-15)


def test_valuation_by_index(shared_sum):
    assert evaluate(*shared_sum, {0: 0.3, 1: 0.4}) == evaluate(*shared_sum, {"x1": 0.3, "x2": 0.4})


def test_forest_evaluates_through_bindings(shared_sum):
    assert evaluate(to_forest(*shared_sum), None, {"x1": 1.0, "x2": 2.0}) == evaluate(*shared_sum, {"x1": 1.0, "x2": 2.0})


@pytest.mark.parametrize("text,point", [
    ("ln(x)", {"x": 0.0}),
    ("ln(x)", {"x": -1.0}),
    ("sqrt(x)", {"x": -0.5}),
    ("1 / x", {"x": 0.0}),
    ("x^-2", {"x": 0.0}),
    ("exp(x)", {"x": 1e6}),
])
def test_domain_errors(text, point):
    with pytest.raises(DomainError):
        evaluate(*parse_expr(text), point)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(*parse_expr("x + y"), {"x": 1.0})


def test_pow_integer_exponents():
    s = ExprStore()
    x = s.var("x")
    for k, expect in ((0, 1.0), (1, 3.0), (3, 27.0), (-1, 1 / 3)):
        assert evaluate(s, s.make(Unary(OpKind.POW, x, k)), {"x": 3.0}) == expect


def test_finite_difference_of_square():
    assert finite_difference(*parse_expr("x * x"), "x", {"x": 3.0}) == pytest.approx(6.0, rel=1e-8)


def test_relative_error_floor():
    assert relative_error(1e-9, 2e-9) == pytest.approx(1e-9)
    assert relative_error(100.0, 101.0) == pytest.approx(0.01)


def test_sampler_avoids_singularities():
    store, root = parse_expr("ln(x) / (y - 1)")
    point = sample_valuation(store, root, random.Random(1))
    assert point["x"] >= 1e-3 and abs(point["y"] - 1) >= 1e-3


def test_sampler_gives_up():
    store, root = parse_expr("sqrt(0 - x*x - 1)")
    assert sample_valuation(store, root, random.Random(0), tries=10) is None


def test_check_gradient_ok(shared_sum):
    report = check_gradient(*shared_sum, ["x1", "x2"], {"x1": 0.3, "x2": 0.4})
    assert report.ok
    assert all(v.engines_bitwise_equal for v in report.variables)
    assert report.variables[0].forward == pytest.approx(math.cos(1.4), rel=1e-14)


def test_check_gradient_reports_domain_error():
    report = check_gradient(*parse_expr("ln(x)"), ["x"], {"x": -1.0})
    assert not report.ok
    assert "DomainError" in report.variables[0].error


def test_binary_div_by_zero_message():
    s = ExprStore()
    n = s.make(Binary(OpKind.DIV, s.const(1), s.var("x")))
    with pytest.raises(DomainError, match="Div"):
        evaluate(s, n, {"x": 0.0})


def test_sampler_magnitude_bound():
    store, root = parse_expr("exp(10 * x)")
    rng = random.Random(0)
    for _ in range(20):
        point = sample_valuation(store, root, rng, max_abs=100.0)
        assert point is None or math.exp(10 * point["x"]) <= 100.0
