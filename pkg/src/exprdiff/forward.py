"""Forward-mode differentiation over an expression DAG.

A single ascending sweep stores at every node v the expression for dv/dx
built as the sum, over the node's incoming edges, of the local partial times
the derivative already stored at the child.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

from .core import Binary, Const, ExprStore, OpKind, OpLog, Role, StructuralError, Unary, Var, children
from .rules import local_partials


@dataclass
class DerivativeTable:
    wrt: Optional[int]
    store: ExprStore
    entries: dict[int, int] = field(default_factory=dict)
    log: OpLog = field(default_factory=OpLog)


class ForwardResult(NamedTuple):
    root: int
    table: DerivativeTable


def seed(store: ExprStore, payload, wrt: Optional[int], log: OpLog) -> int:
    one = isinstance(payload, Var) and payload.index == wrt
    return store.make(Const(1.0 if one else 0.0), log, Role.SEED)


def combine(store: ExprStore, partials: Sequence[int], dchildren: Sequence[int], log: OpLog) -> int:
    """Sum of partial * child-derivative, left edge first, folded left."""
    total = None
    for part, dchild in zip(partials, dchildren):
        term = store.make(Binary(OpKind.MUL, part, dchild), log, Role.CHAIN_MULTIPLY)
        total = term if total is None else store.make(Binary(OpKind.ADD, total, term), log, Role.FAN_IN_ADD)
    return total


def forward_derivative(dag: ExprStore, root: int, wrt: Union[int, str, None],
                       simplify: bool = False) -> ForwardResult:
    if not dag.consed:
        raise StructuralError("forward mode expects a hash-consed DAG")
    out = dag.clone(simplify=simplify)
    index = dag.resolve_var(wrt)
    table = DerivativeTable(index, out)
    log, dot = table.log, table.entries
    for n in dag.reachable(root):
        p = dag[n]
        if isinstance(p, (Unary, Binary)):
            parts = [part for _, part in local_partials(n, out, log)]
            dot[n] = combine(out, parts, [dot[c] for c in children(p)], log)
        else:
            dot[n] = seed(out, p, index, log)
    out.roots = [dot[root]]
    return ForwardResult(dot[root], table)


def forward_gradient(dag: ExprStore, root: int, variables: Sequence[Union[int, str]],
                     simplify: bool = False) -> list[tuple[Union[int, str], int, DerivativeTable]]:
    """One independent sweep per variable, each with its own store and log."""
    if not variables:
        raise ValueError("need at least one variable")
    return [(v, *forward_derivative(dag, root, v, simplify)) for v in variables]

