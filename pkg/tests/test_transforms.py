import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exprdiff.core import BudgetExceeded, ExprForest, node_count, tree_size
from exprdiff.equivalence import compare_structural
from exprdiff.evaluator import evaluate
from exprdiff.parser import parse_expr
from exprdiff.randexpr import random_dag
from exprdiff.transforms import (
    cons_tree,
    forest_size,
    is_tree,
    shared_nodes,
    squaring_chain,
    swell_report,
    to_forest,
    unfold,
)

from .conftest import expr_text


def _brute_tree_size(store, root):
    # independent oracle: plain recursion over every path
    kids = {"Binary": lambda p: (p.left, p.right), "Unary": lambda p: (p.child,)}
    p = store[root]
    get = kids.get(type(p).__name__)
    return 1 + (sum(_brute_tree_size(store, c) for c in get(p)) if get else 0)


def test_shared_sum_unfold(shared_sum):
    tree, root = unfold(*shared_sum)
    assert node_count(tree, root) == 9
    assert is_tree(tree, root)


def test_chain3_unfold_fifteen(chain3):
    tree, root = unfold(*chain3)
    assert node_count(tree, root) == 15


def test_shared_sum_forest(shared_sum):
    forest = to_forest(*shared_sum)
    assert [b.name for b in forest.bindings] == ["t1"]
    assert forest_size(forest) == 7 == node_count(forest)


def test_chain3_forest(chain3):
    forest = to_forest(*chain3)
    assert [b.name for b in forest.bindings] == ["t1", "t2"]
    assert node_count(forest) == 4 + 2


def test_unfold_budget():
    store, root = squaring_chain(12)
    with pytest.raises(BudgetExceeded) as info:
        unfold(store, root, budget=1000)
    assert info.value.size == 2 ** 13 - 1


@pytest.mark.parametrize("k", range(1, 21))
def test_size_law(k):
    store, root = squaring_chain(k)
    rep = swell_report(store, root)
    assert rep.dag_nodes == k + 1
    assert rep.tree_nodes == 2 ** (k + 1) - 1
    assert rep.forest_nodes == rep.dag_nodes + rep.bindings
    if k <= 12:
        tree, troot = unfold(store, root)
        assert node_count(tree, troot) == 2 ** (k + 1) - 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_tree_size_matches_brute_force(seed):
    store, root = random_dag(random.Random(seed), 40)
    assert tree_size(store, root) == _brute_tree_size(store, root)


@given(expr_text)
@settings(max_examples=100, deadline=None)
def test_cons_unfold_round_trip(text):
    dag, root = parse_expr(text)
    tree, troot = unfold(dag, root)
    back, broot = cons_tree(tree, troot)
    assert compare_structural((dag, root), (back, broot)).equal
    assert node_count(back, broot) == node_count(dag, root)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_transforms_preserve_value(seed):
    rng = random.Random(seed)
    dag, root = random_dag(rng, 30)
    point = {name: rng.uniform(0.5, 1.5) for name in dag.var_names}
    try:
        expected = evaluate(dag, root, point)
    except ArithmeticError:
        return
    tree, troot = unfold(dag, root)
    forest = to_forest(dag, root)
    assert evaluate(tree, troot, point) == expected
    assert evaluate(forest, None, point) == expected


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_forest_inline_round_trip(seed):
    dag, root = random_dag(random.Random(seed), 40)
    forest = to_forest(dag, root)
    assert isinstance(forest, ExprForest)
    assert compare_structural((dag, root), forest.inline()).equal
    assert node_count(forest) == node_count(dag, root) + len(forest.bindings)
    assert len(forest.bindings) == len(shared_nodes(dag, root))


def test_forest_of_a_tree_has_no_bindings():
    store, root = parse_expr("sin(x) + cos(y)")
    assert to_forest(store, root).bindings == []


def test_swell_report_examples(shared_sum, chain3):
    r2 = swell_report(*chain3)
    assert (r2.dag_nodes, r2.tree_nodes, r2.forest_nodes, r2.swell_ratio) == (4, 15, 6, 3.75)
    r1 = swell_report(*shared_sum)
    assert (r1.dag_nodes, r1.tree_nodes, r1.forest_nodes, r1.swell_ratio) == (6, 9, 7, 1.5)
    c = swell_report(*parse_expr("2"))
    assert (c.dag_nodes, c.tree_nodes, c.forest_nodes, c.swell_ratio) == (1, 1, 1, 1.0)


def test_swell_report_analytic_beyond_budget():
    rep = swell_report(*squaring_chain(20), budget=1000)
    assert rep.tree_analytic and rep.tree_nodes == 2 ** 21 - 1
