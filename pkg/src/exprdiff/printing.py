"""Text and graph renderings of stores and forests."""

from __future__ import annotations

import math
from typing import Callable, Optional, Union

from .core import Binary, Const, ExprForest, ExprStore, OpKind, SymbolRef, Unary, Var, children
from .transforms import shared_nodes, to_forest

_SYMBOL = {OpKind.ADD: "+", OpKind.SUB: "-", OpKind.MUL: "*", OpKind.DIV: "/"}
_PREC = {OpKind.ADD: 1, OpKind.SUB: 1, OpKind.MUL: 2, OpKind.DIV: 2}
_FUNC = {OpKind.SIN: "sin", OpKind.COS: "cos", OpKind.EXP: "exp", OpKind.LN: "ln", OpKind.SQRT: "sqrt"}
_ATOM = 4


def format_const(value: float) -> str:
    if math.isfinite(value) and value == int(value) and abs(value) < 1e16:
        return str(int(value)) if not (value == 0 and math.copysign(1, value) < 0) else "-0"
    return repr(value)


def to_text(store: ExprStore, root: int, names: Optional[Callable[[int], str]] = None) -> str:
    """Infix text that reparses to the same structure (for parser output).

    Shared nodes are written out at every occurrence; ``names`` can replace
    a SymbolRef's binding id with a name.
    """
    memo: dict[int, tuple[str, int]] = {}
    for n in store.reachable(root):
        memo[n] = _render(store, n, memo, names)
    return memo[root][0]


def _render(store, n, memo, names) -> tuple[str, int]:
    p = store[n]
    if isinstance(p, Var):
        return p.name, _ATOM
    if isinstance(p, Const):
        text = format_const(p.value)
        return (text, _ATOM) if not text.startswith("-") else (f"({text})", _ATOM)
    if isinstance(p, SymbolRef):
        return (names(p.binding) if names else f"@{p.binding}"), _ATOM
    if isinstance(p, Unary):
        inner, prec = memo[p.child]
        if p.op is OpKind.NEG:
            return "-" + (inner if prec >= 3 else f"({inner})"), 3
        if p.op is OpKind.POW:
            return (inner if prec == _ATOM else f"({inner})") + f"^{p.exponent}", 3
        return f"{_FUNC[p.op]}({inner})", _ATOM
    left, lp = memo[p.left]
    right, rp = memo[p.right]
    prec = _PREC[p.op]
    if lp < prec:
        left = f"({left})"
    if rp <= prec:
        right = f"({right})"
    return f"{left} {_SYMBOL[p.op]} {right}", prec


def forest_text(forest: ExprForest) -> str:
    """``let t1 = ...; let dt1 = ...; main`` form."""
    store = forest.store
    name_of = lambda b: forest.bindings[b].name  # noqa: E731
    lets = [f"let {b.name} = {to_text(store, b.root, name_of)}" for b in forest.used_bindings()]
    return "; ".join(lets + [to_text(store, forest.main, name_of)])


def dag_text(store: ExprStore, root: int) -> str:
    """Inline text when nothing is shared, otherwise let-bindings."""
    if not store.consed or not shared_nodes(store, root):
        return to_text(store, root)
    return forest_text(to_forest(store, root))


def _label(p) -> str:
    if isinstance(p, Var):
        return p.name
    if isinstance(p, Const):
        return format_const(p.value)
    if isinstance(p, Unary):
        return f"^{p.exponent}" if p.op is OpKind.POW else (_FUNC.get(p.op) or "neg")
    if isinstance(p, Binary):
        return _SYMBOL[p.op]
    return "ref"


def to_dot(expr: Union[ExprStore, ExprForest], root: Optional[int] = None, name: str = "expr") -> str:
    """Graphviz text: one ``nID [label=...]`` line per node, one
    ``nA -> nB`` line per child reference, ordered by id. Forest bindings
    (and main) become clusters."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    if isinstance(expr, ExprForest):
        store, ids = expr.store, expr.reachable()
        owner: dict[int, str] = {}
        groups = [(b.name, b.root) for b in expr.used_bindings()] + [("main", expr.main)]
        for label, top in groups:
            for n in store.reachable(top):
                owner.setdefault(n, label)
        for label, _ in groups:
            lines.append(f"  subgraph cluster_{label} {{")
            lines.append(f'    label="{label}";')
            for n in ids:
                if owner.get(n) == label:
                    lines.append(f"    {_node_line(store, n, expr)}")
            lines.append("  }")
    else:
        store = expr
        if root is None:
            root = store.roots[-1]
        ids = store.reachable(root)
        for n in ids:
            lines.append(f"  {_node_line(store, n, None)}")
    for n in ids:
        for c in children(store[n]):
            lines.append(f"  n{c} -> n{n};")
        p = store[n]
        if isinstance(p, SymbolRef):
            lines.append(f"  n{expr.binding_root(p.binding)} -> n{n} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _node_line(store: ExprStore, n: int, forest: Optional[ExprForest]) -> str:
    p = store[n]
    label = forest.bindings[p.binding].name if isinstance(p, SymbolRef) else _label(p)
    return f'n{n} [label="{label}"];'


def export_dot(expr: Union[ExprStore, ExprForest], root: Optional[int], path) -> None:
    with open(path, "w") as fh:
        fh.write(to_dot(expr, root))
