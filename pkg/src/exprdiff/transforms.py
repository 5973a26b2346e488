"""Conversions between the DAG, tree and forest representations, and the
size metrics that separate representation swell from differentiation."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .core import (
    Binary,
    Binding,
    BudgetExceeded,
    Const,
    ExprForest,
    ExprStore,
    OpKind,
    SymbolRef,
    Var,
    _remap,
    copy_into,
    node_count,
    tree_size,
)

DEFAULT_BUDGET = 10**6


def unfold(dag: ExprStore, root: int, budget: int = DEFAULT_BUDGET) -> tuple[ExprStore, int]:
    """Tree-only copy of the expression; every shared node is duplicated.

    The exact size is computed first, so an oversized tree is rejected before
    any node is built.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    size = tree_size(dag, root)
    if size > budget:
        raise BudgetExceeded(size, budget)
    tree = dag.empty_like(consed=False, simplify=False)
    new_root = copy_into(dag, root, tree)
    tree.roots = [new_root]
    return tree, new_root


def cons_tree(tree: ExprStore, root: int) -> tuple[ExprStore, int]:
    """Merge structurally identical subtrees into one hash-consed DAG."""
    dag = tree.empty_like(consed=True, simplify=False)
    new_root = copy_into(tree, root, dag)
    dag.roots = [new_root]
    return dag, new_root


def shared_nodes(dag: ExprStore, root: int) -> list[int]:
    """Operation nodes referenced by two or more parent edges, ascending."""
    ids = dag.reachable(root)
    counts = dag.parent_counts(ids)
    return [n for n in ids if counts[n] >= 2 and not isinstance(dag[n], (Var, Const)) and n != root]


def to_forest(dag: ExprStore, root: int, prefix: str = "t") -> ExprForest:
    """One binding per shared operation node, named t1, t2, ... in id order.

    Leaves (variables and constants) stay inline even when shared.
    """
    if not dag.consed:
        raise ValueError("to_forest expects a hash-consed store")
    bound = shared_nodes(dag, root)
    store = dag.empty_like(consed=True, simplify=False)
    store.allow_refs = True
    mapping: dict[int, int] = {}  # dag id -> forest id usable from a parent
    bindings: list[Binding] = []
    for n in dag.reachable(root):
        new = store._append(_remap(dag[n], mapping))
        if n in bound:
            b = Binding(len(bindings), f"{prefix}{len(bindings) + 1}", new)
            bindings.append(b)
            new = store._append(SymbolRef(b.id))
        mapping[n] = new
    forest = ExprForest(store, bindings, mapping[root])
    store.roots = [forest.main]
    return forest


def forest_size(forest: ExprForest) -> int:
    return node_count(forest)


@dataclass
class SwellReport:
    dag_nodes: int
    tree_nodes: int
    tree_analytic: bool
    forest_nodes: int
    bindings: int
    swell_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def swell_report(dag: ExprStore, root: int, budget: int = DEFAULT_BUDGET) -> SwellReport:
    """Sizes of the same expression as DAG, unfolded tree and forest.

    The tree size is counted on a constructed tree when it fits the budget;
    otherwise it comes from the exact path-multiplicity count and the record
    is flagged ``tree_analytic``.
    """
    dag_nodes = node_count(dag, root)
    try:
        tree, troot = unfold(dag, root, budget)
        tree_nodes, analytic = node_count(tree, troot), False
    except BudgetExceeded as exc:
        tree_nodes, analytic = exc.size, True
    forest = to_forest(dag, root)
    return SwellReport(
        dag_nodes=dag_nodes,
        tree_nodes=tree_nodes,
        tree_analytic=analytic,
        forest_nodes=forest_size(forest),
        bindings=len(forest.bindings),
        swell_ratio=tree_nodes / dag_nodes,
    )


def squaring_chain(k: int, store: Optional[ExprStore] = None, name: str = "x") -> tuple[ExprStore, int]:
    """x*x, then k-1 further self-multiplications: x^(2^k) as a (k+1)-node DAG."""
    store = store or ExprStore()
    n = store.var(name)
    for _ in range(k):
        n = store.make(Binary(OpKind.MUL, n, n))
    store.roots.append(n)
    return store, n


def is_tree(store: ExprStore, root: int) -> bool:
    counts = store.parent_counts(store.reachable(root))
    return all(c <= 1 for c in counts.values())

