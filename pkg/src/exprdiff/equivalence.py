"""Mechanical comparison of forward mode against symbolic differentiation.

"Same operations" is checked as equality of the two constructor-call
multisets plus isomorphism of the resulting derivative graphs. The order in
which the calls happen is not compared: the forward sweep runs in id order
while the symbolic recursion unwinds depth-first.
"""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

from .core import Binary, Const, ExprForest, ExprStore, OpKind, OpLog, SymbolRef, Unary, Var, float_bits
from .forward import forward_derivative
from .randexpr import random_dag
from .symbolic import DiffPolicy, symbolic_derivative

Handle = tuple[Union[ExprStore, ExprForest], Optional[int]]


@dataclass
class LogVerdict:
    equal_multiset: bool
    diffs: dict  # label -> count(a) - count(b), nonzero only
    total_a: int
    total_b: int

    def __bool__(self):
        return self.equal_multiset


def compare_op_logs(a: OpLog, b: OpLog) -> LogVerdict:
    diffs = {}
    for key in sorted(set(a.entries) | set(b.entries)):
        d = a.entries[key] - b.entries[key]
        if d:
            diffs["/".join(key)] = d
    return LogVerdict(not diffs, diffs, a.total, b.total)


@dataclass
class StructVerdict:
    equal: bool
    path: Optional[list] = None
    reason: str = ""

    def __bool__(self):
        return self.equal


def _dag(handle: Handle) -> tuple[ExprStore, int]:
    expr, root = handle
    if isinstance(expr, ExprForest):
        return expr.inline()
    return expr, root


def _same_payload(p, q) -> bool:
    if type(p) is not type(q):
        return False
    if isinstance(p, Var):
        return p.name == q.name
    if isinstance(p, Const):
        return float_bits(p.value) == float_bits(q.value)
    if isinstance(p, Unary):
        return p.op is q.op and p.exponent == q.exponent
    if isinstance(p, Binary):
        return p.op is q.op
    return isinstance(p, SymbolRef) and p.binding == q.binding


def compare_structural(a: Handle, b: Handle) -> StructVerdict:
    """Isomorphism of the graphs reachable from the two roots.

    Nodes are matched by simultaneous traversal; the matching must be a
    bijection, so a subtree shared on one side but duplicated on the other
    counts as a difference.
    """
    sa, ra = _dag(a)
    sb, rb = _dag(b)
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    stack = [(ra, rb, [])]
    while stack:
        x, y, path = stack.pop()
        if x in fwd or y in back:
            if fwd.get(x) != y or back.get(y) != x:
                return StructVerdict(False, path, "sharing differs")
            continue
        p, q = sa[x], sb[y]
        if not _same_payload(p, q):
            return StructVerdict(False, path, f"{type(p).__name__} vs {type(q).__name__}"
                                 if type(p) is not type(q) else "payload differs")
        fwd[x], back[y] = y, x
        if isinstance(p, Binary):
            stack.append((p.right, q.right, path + [1]))
            stack.append((p.left, q.left, path + [0]))
        elif isinstance(p, Unary):
            stack.append((p.child, q.child, path + [0]))
    return StructVerdict(True)


@dataclass
class CaseFailure:
    case: int
    seed: int
    variable: str
    simplify: bool
    policy: str
    logs: Optional[dict] = None
    structure: Optional[dict] = None


@dataclass
class SuiteSummary:
    seed: int
    cases: int
    comparisons: int
    failures: list = field(default_factory=list)
    negative_control: Optional[dict] = None
    mean_nodes: float = 0.0
    mean_multi_parent_fraction: float = 0.0
    seconds: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_failures"] = len(self.failures)
        return d


def check_pair(store: ExprStore, root: int, wrt, simplify: bool,
               policy: DiffPolicy = DiffPolicy("share", True)) -> tuple[LogVerdict, StructVerdict]:
    d, table = forward_derivative(store, root, wrt, simplify)
    res = symbolic_derivative(store, root, wrt, policy, simplify)
    return (compare_op_logs(table.log, res.log),
            compare_structural((table.store, d), (res.output, res.root)))


def negative_control() -> dict:
    """f = u + u with u = sin(x): symbolic without memoization repeats du."""
    store = ExprStore()
    x = store.var("x")
    u = store.make(Unary(OpKind.SIN, x))
    f = store.make(Binary(OpKind.ADD, u, u))
    _, table = forward_derivative(store, f, "x")
    off = symbolic_derivative(store, f, "x", DiffPolicy("share", memoize=False))
    on = symbolic_derivative(store, f, "x", DiffPolicy("share", memoize=True))
    v_off = compare_op_logs(off.log, table.log)
    v_on = compare_op_logs(on.log, table.log)
    return {
        "forward_ops": table.log.total,
        "symbolic_memo_off_ops": off.log.total,
        "symbolic_memo_on_ops": on.log.total,
        "memo_off_equal": v_off.equal_multiset,
        "memo_off_diffs": v_off.diffs,
        "memo_on_equal": v_on.equal_multiset,
        "detected": (not v_off.equal_multiset) and v_on.equal_multiset,
    }


def randomized_equivalence_suite(seed: int = 42, n_cases: int = 500, max_nodes: int = 200,
                                 policies: tuple = ("share", "cse"),
                                 with_negative_control: bool = True) -> SuiteSummary:
    """Forward mode vs memoized symbolic differentiation on random DAGs.

    Every case draws its own seed from the master seed so a failure can be
    replayed alone with ``random_dag(random.Random(case_seed), max_nodes)``.
    """
    if n_cases < 1:
        raise ValueError("n_cases must be >= 1")
    start = time.perf_counter()
    master = random.Random(seed)
    summary = SuiteSummary(seed, n_cases, 0)
    sizes, fracs = [], []
    for case in range(n_cases):
        case_seed = master.getrandbits(32)
        store, root = random_dag(random.Random(case_seed), max_nodes)
        ids = store.reachable(root)
        counts = store.parent_counts(ids)
        sizes.append(len(ids))
        fracs.append(sum(1 for n in ids if counts[n] >= 2) / len(ids))
        for name in store.free_vars(root) or store.var_names[:1]:
            for simplify in (False, True):
                for pol in policies:
                    logs, struct = check_pair(store, root, name, simplify, DiffPolicy(pol, True))
                    summary.comparisons += 1
                    if not (logs and struct):
                        summary.failures.append(asdict(CaseFailure(
                            case, case_seed, name, simplify, pol,
                            None if logs else asdict(logs), None if struct else asdict(struct))))
    if with_negative_control:
        summary.negative_control = negative_control()
    summary.mean_nodes = sum(sizes) / len(sizes)
    summary.mean_multi_parent_fraction = sum(fracs) / len(fracs)
    summary.seconds = time.perf_counter() - start
    return summary


def op_count_table(log: OpLog) -> dict:
    return dict(sorted(Counter(log.counters).items()))
