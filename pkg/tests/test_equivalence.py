import random

from hypothesis import given, settings
from hypothesis import strategies as st

from exprdiff.core import OpLog, Role
from exprdiff.equivalence import (
    check_pair,
    compare_op_logs,
    compare_structural,
    negative_control,
    randomized_equivalence_suite,
)
from exprdiff.parser import parse_expr
from exprdiff.randexpr import multi_parent_fraction, random_dag
from exprdiff.symbolic import DiffPolicy
from exprdiff.transforms import unfold


def test_log_diff_reports_labels():
    a, b = OpLog(), OpLog()
    a.record("Mul", Role.CHAIN_MULTIPLY)
    v = compare_op_logs(a, b)
    assert not v.equal_multiset
    assert v.diffs == {"Mul/chain-multiply": 1}


def test_structural_detects_lost_sharing(shared_sum):
    tree, root = unfold(*shared_sum)
    v = compare_structural(shared_sum, (tree, root))
    assert not v.equal and v.reason == "sharing differs"


def test_structural_detects_payload_change():
    assert not compare_structural(parse_expr("x + y"), parse_expr("x - y")).equal
    assert not compare_structural(parse_expr("x + y"), parse_expr("y + x")).equal
    assert compare_structural(parse_expr("x + y"), parse_expr("x + y")).equal


def test_negative_control():
    nc = negative_control()
    assert nc["symbolic_memo_off_ops"] > nc["forward_ops"]
    assert nc["symbolic_memo_on_ops"] == nc["forward_ops"]
    assert nc["detected"]


def test_shared_sum_pair(shared_sum):
    for simplify in (False, True):
        logs, struct = check_pair(*shared_sum, "x1", simplify)
        assert logs and struct


@given(st.integers(0, 2**32 - 1), st.booleans(), st.sampled_from(["share", "cse"]))
@settings(max_examples=100, deadline=None)
def test_forward_equals_memoized_symbolic(seed, simplify, policy):
    store, root = random_dag(random.Random(seed), 60)
    for name in store.free_vars(root):
        logs, struct = check_pair(store, root, name, simplify, DiffPolicy(policy, True))
        assert logs.equal_multiset, logs.diffs
        assert struct.equal, struct.reason


def test_generator_produces_sharing():
    rng = random.Random(7)
    fracs = []
    for _ in range(30):
        store, root = random_dag(rng, 200)
        if len(store.reachable(root)) >= 4:
            fracs.append(multi_parent_fraction(store, root))
    assert min(fracs) >= 0.2


def test_small_suite():
    summary = randomized_equivalence_suite(seed=3, n_cases=20, max_nodes=60)
    assert summary.to_dict()["n_failures"] == 0
    assert summary.comparisons > 0
