"""Recursive symbolic differentiation with configurable subtree storage.

Unary nodes use the chain rule, binary nodes the two-term total derivative;
the local factors come from :mod:`exprdiff.rules` and every node goes
through the instrumented constructor. What differs between policies is how
occurrences of original subexpressions end up in the result:

``copy``
    every referenced subtree is duplicated; the result is a tree.
``share``
    references point at the existing node; the result is a DAG.
``cse``
    as ``share``, but shared work is named: derivatives of forest bindings
    become bindings ``dt1, dt2, ...`` and the result is a forest.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

from .core import (
    Binding,
    BudgetExceeded,
    Const,
    ExprForest,
    ExprStore,
    OpLog,
    SymbolRef,
    Var,
    children,
    copy_into,
    node_count,
    tree_size,
)
from .forward import combine, seed
from .rules import local_partials
from .transforms import DEFAULT_BUDGET, cons_tree, to_forest, unfold


class Subtree(str, enum.Enum):
    COPY = "copy"
    SHARE = "share"
    CSE = "cse"


@dataclass(frozen=True)
class DiffPolicy:
    subtree: Subtree = Subtree.SHARE
    memoize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "subtree", Subtree(self.subtree))

    def __str__(self):
        return f"{self.subtree.value}{'+memo' if self.memoize else ''}"


class SymbolicResult(NamedTuple):
    root: int
    output: Union[ExprStore, ExprForest]
    log: OpLog


Input = Union[ExprStore, ExprForest]


def _differentiate(src: ExprStore, out: ExprStore, root: int, wrt: Optional[int], memoize: bool,
                   log: OpLog, ref: Callable[[int], int], reuse: Callable[[int], int],
                   on_ref: Optional[Callable[[int, int], int]] = None,
                   binding_root: Optional[Callable[[int], int]] = None,
                   budget: Optional[int] = None) -> int:
    memo: dict[int, int] = {}
    vals: list[int] = []
    stack: list[tuple[int, bool]] = [(root, False)]

    def finish(n: int, d: int) -> None:
        if memoize:
            memo[n] = d
        vals.append(d)
        if budget is not None and len(out) > budget:
            raise BudgetExceeded(len(out), budget)

    while stack:
        n, expanded = stack.pop()
        p = src[n]
        if isinstance(p, SymbolRef):
            if expanded:
                finish(n, on_ref(p.binding, vals.pop()))
            elif memoize and n in memo:
                vals.append(reuse(memo[n]))
            else:
                stack.append((n, True))
                stack.append((binding_root(p.binding), False))
            continue
        kids = children(p)
        if expanded:
            dkids = vals[-len(kids):]
            del vals[-len(kids):]
            parts = [part for _, part in local_partials(n, out, log, ref=ref, source=src)]
            finish(n, combine(out, parts, dkids, log))
        elif memoize and n in memo:
            vals.append(reuse(memo[n]))
        elif not kids:
            finish(n, seed(out, p, wrt, log))
        else:
            stack.append((n, True))
            for c in reversed(kids):
                stack.append((c, False))
    (result,) = vals
    return result


def _as_dag(expr: Input, root: Optional[int]) -> tuple[ExprStore, int]:
    if isinstance(expr, ExprForest):
        return expr.inline()
    if not expr.consed:
        return cons_tree(expr, root)
    return expr, root


def _check_unmemoized(store: ExprStore, root: int, budget: int) -> None:
    # without memoization every path is differentiated separately
    size = tree_size(store, root)
    if size > budget:
        raise BudgetExceeded(size, budget)


def symbolic_derivative(expr: Input, root: Optional[int], wrt: Union[int, str, None],
                        policy: DiffPolicy = DiffPolicy(), simplify: bool = False,
                        budget: int = DEFAULT_BUDGET) -> SymbolicResult:
    """Differentiate ``expr`` at ``root`` (ignored for forests) w.r.t. ``wrt``.

    Raises :class:`BudgetExceeded` when the copying policy, or any policy
    without memoization, would have to build or visit more than ``budget``
    nodes.
    """
    policy = policy if isinstance(policy, DiffPolicy) else DiffPolicy(policy)
    log = OpLog()
    ident = lambda i: i  # noqa: E731

    if policy.subtree is Subtree.SHARE:
        dag, root = _as_dag(expr, root)
        if not policy.memoize:
            _check_unmemoized(dag, root, budget)
        out = dag.clone(simplify=simplify)
        d = _differentiate(dag, out, root, dag.resolve_var(wrt), policy.memoize, log, ident, ident)
        out.roots = [d]
        return SymbolicResult(d, out, log)

    if policy.subtree is Subtree.CSE:
        if isinstance(expr, ExprForest):
            forest = expr
        else:
            dag, root = _as_dag(expr, root)
            forest = to_forest(dag, root)
        if not policy.memoize:
            _check_unmemoized(*forest.inline(), budget)
        out = forest.store.clone(simplify=simplify)
        bindings = [Binding(b.id, b.name, b.root) for b in forest.bindings]
        dbind: dict[int, int] = {}

        def on_ref(b: int, droot: int) -> int:
            # leaves stay inline (as in to_forest) so the smart constructor
            # still sees constant derivatives through the reference
            if isinstance(out[droot], (Var, Const, SymbolRef)):
                return droot
            known = dbind.get(b)
            if known is None or bindings[known].root != droot:
                name = "d" + forest.bindings[b].name
                if known is not None:
                    name += f"_{sum(x.name.startswith(name) for x in bindings) + 1}"
                known = len(bindings)
                bindings.append(Binding(known, name, droot))
                dbind[b] = known
            return out._append(SymbolRef(known))

        d = _differentiate(forest.store, out, forest.main, out.resolve_var(wrt), policy.memoize, log,
                           ident, ident, on_ref, lambda b: forest.bindings[b].root)
        out.roots = [d]
        return SymbolicResult(d, ExprForest(out, bindings, d), log)

    # copying policy: the input is processed as a tree and every emitted
    # reference to an original subtree is a fresh copy
    if isinstance(expr, ExprForest):
        expr, root = expr.inline()
    if expr.consed:
        tree, root = unfold(expr, root, budget)
    else:
        tree = expr
    if not policy.memoize:
        _check_unmemoized(tree, root, budget)
    out = tree.empty_like(consed=False, simplify=simplify)

    def copy_src(i: int) -> int:
        return copy_into(tree, i, out)

    def copy_out(i: int) -> int:
        return copy_into(out, i, out)

    d = _differentiate(tree, out, root, tree.resolve_var(wrt), policy.memoize, log,
                       copy_src, copy_out, budget=budget)
    out.roots = [d]
    return SymbolicResult(d, out, log)


def derivative_size(policy: DiffPolicy, tree: ExprStore, root: int, wrt: Union[int, str, None],
                    simplify: bool = False, budget: int = DEFAULT_BUDGET) -> int:
    """Node count of the derivative: repeats counted under copying, distinct
    nodes under sharing, forest nodes under CSE."""
    res = symbolic_derivative(tree, root, wrt, policy, simplify, budget)
    if isinstance(res.output, ExprForest):
        return node_count(res.output)
    return node_count(res.output, res.root)
