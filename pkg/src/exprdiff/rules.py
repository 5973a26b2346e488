"""Local partial derivatives of every primitive with respect to its operands.

Both engines obtain the factor for each incoming edge from this table, so a
node's partials are built by exactly the same constructor calls whichever
engine asks.
"""

from __future__ import annotations

from typing import Callable, Optional

from .core import Binary, Const, ExprStore, OpKind, OpLog, Role, Unary

# ref(node_id) -> id usable in the output store (identity, or a fresh copy
# under the copying policy).
Ref = Callable[[int], int]
Rule = Callable[["_Builder", int, object, Ref], list]


class _Builder:
    def __init__(self, store: ExprStore, log: Optional[OpLog]):
        self.store = store
        self.log = log

    def const(self, value: float) -> int:
        return self.store.make(Const(float(value)), self.log, Role.LOCAL_PARTIAL)

    def un(self, op: OpKind, child: int, exponent: Optional[int] = None) -> int:
        return self.store.make(Unary(op, child, exponent), self.log, Role.LOCAL_PARTIAL)

    def bin(self, op: OpKind, left: int, right: int) -> int:
        return self.store.make(Binary(op, left, right), self.log, Role.LOCAL_PARTIAL)


def _add(b, n, p, ref):
    return [b.const(1), b.const(1)]


def _sub(b, n, p, ref):
    return [b.const(1), b.const(-1)]


def _mul(b, n, p, ref):
    return [ref(p.right), ref(p.left)]


def _div(b, n, p, ref):
    # d(u/v)/du = 1/v ; d(u/v)/dv = -(u / (v*v))
    left = b.bin(OpKind.DIV, b.const(1), ref(p.right))
    vv = b.bin(OpKind.MUL, ref(p.right), ref(p.right))
    right = b.un(OpKind.NEG, b.bin(OpKind.DIV, ref(p.left), vv))
    return [left, right]


def _neg(b, n, p, ref):
    return [b.const(-1)]


def _sin(b, n, p, ref):
    return [b.un(OpKind.COS, ref(p.child))]


def _cos(b, n, p, ref):
    return [b.un(OpKind.NEG, b.un(OpKind.SIN, ref(p.child)))]


def _exp(b, n, p, ref):
    return [ref(n)]


def _ln(b, n, p, ref):
    return [b.bin(OpKind.DIV, b.const(1), ref(p.child))]


def _sqrt(b, n, p, ref):
    return [b.bin(OpKind.DIV, b.const(0.5), ref(n))]


def _pow(b, n, p, ref):
    k = p.exponent
    if k == 0:
        return [b.const(0)]
    if k == 1:
        return [b.const(1)]
    return [b.bin(OpKind.MUL, b.const(k), b.un(OpKind.POW, ref(p.child), k - 1))]


DERIV_RULES: dict[OpKind, Rule] = {
    OpKind.ADD: _add,
    OpKind.SUB: _sub,
    OpKind.MUL: _mul,
    OpKind.DIV: _div,
    OpKind.NEG: _neg,
    OpKind.SIN: _sin,
    OpKind.COS: _cos,
    OpKind.EXP: _exp,
    OpKind.LN: _ln,
    OpKind.SQRT: _sqrt,
    OpKind.POW: _pow,
}

EDGE_NAMES = {1: ("child",), 2: ("left", "right")}


def local_partials(
    node: int,
    store: ExprStore,
    log: Optional[OpLog] = None,
    rules: dict[OpKind, Rule] = DERIV_RULES,
    ref: Optional[Ref] = None,
    source: Optional[ExprStore] = None,
) -> list[tuple[str, int]]:
    """One ``(edge, partial-node)`` pair per child edge of ``node``.

    ``source`` is the store the node lives in when it differs from the
    output ``store`` (copying policy); ``ref`` maps source ids to output ids.
    """
    src = store if source is None else source
    p = src[node]
    if not isinstance(p, (Unary, Binary)):
        raise TypeError(f"local partials are defined for operations only, got {type(p).__name__}")
    parts = rules[p.op](_Builder(store, log), node, p, ref or (lambda i: i))
    if len(parts) != p.op.arity:
        raise AssertionError(f"rule for {p.op.label} returned {len(parts)} partials")
    return list(zip(EDGE_NAMES[p.op.arity], parts))
