import re

from exprdiff.parser import parse_expr
from exprdiff.printing import dag_text, export_dot, forest_text, format_const, to_dot, to_text
from exprdiff.symbolic import DiffPolicy, symbolic_derivative
from exprdiff.transforms import to_forest

from .conftest import SHARED_SUM


def test_format_const():
    assert format_const(2.0) == "2"
    assert format_const(0.5) == "0.5"


def test_shared_sum_dot_has_six_nodes_and_six_edges(shared_sum):
    dot = to_dot(*shared_sum)
    assert len(re.findall(r"^\s*n\d+ \[label=", dot, re.M)) == 6
    assert len(re.findall(r"^\s*n\d+ -> n\d+", dot, re.M)) == 6


def test_forest_dot_has_a_cluster_per_binding_and_main(shared_sum):
    dot = to_dot(to_forest(*shared_sum))
    assert dot.count("subgraph cluster_") == 2


def test_export_writes_file(tmp_path, shared_sum):
    path = tmp_path / "f.dot"
    export_dot(*shared_sum, path)
    assert path.read_text().startswith("digraph")


def test_forest_text(shared_sum):
    assert forest_text(to_forest(*shared_sum)) == "let t1 = x1 + x2; sin(t1) * cos(t1)"


def test_dag_text_inlines_trees():
    store, root = parse_expr("x * y + 1")
    assert dag_text(store, root) == to_text(store, root) == "x * y + 1"


def test_cse_derivative_text(shared_sum):
    res = symbolic_derivative(*shared_sum, "x1", DiffPolicy("cse", True))
    text = forest_text(res.output)
    assert text.startswith("let t1 = x1 + x2; let dt1 = ")
    assert "dt1" in text.rsplit(";", 1)[1]


def test_negative_constants_parenthesized():
    store, root = parse_expr("x * (0 - 3)")
    from exprdiff.core import ExprStore, Binary, OpKind
    s = ExprStore()
    x = s.var("x")
    n = s.make(Binary(OpKind.MUL, x, s.const(-3)))
    assert to_text(s, n) == "x * (-3)"
