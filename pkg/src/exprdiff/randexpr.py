"""Seeded random expression generators for property tests and benchmarks."""

from __future__ import annotations

import random
from typing import Optional

from .core import BINARY_OPS, Binary, ExprStore, OpKind, UNARY_OPS, Unary, children

EXPONENTS = (-2, -1, 0, 1, 2, 3)


def _payload(rng: random.Random, op: OpKind, args: list[int]):
    if op.arity == 2:
        return Binary(op, args[0], args[1])
    if op is OpKind.POW:
        return Unary(op, args[0], rng.choice(EXPONENTS))
    return Unary(op, args[0])


def random_op(rng: random.Random, unary_weight: float = 0.5) -> OpKind:
    return rng.choice(UNARY_OPS) if rng.random() < unary_weight else rng.choice(BINARY_OPS)


def random_dag(rng: random.Random, max_nodes: int, n_vars: Optional[int] = None,
               min_shared: float = 0.2, attempts: int = 50) -> tuple[ExprStore, int]:
    """Hash-consed DAG over every OpKind with deliberate fan-out.

    Operands are drawn with a bias towards recently built nodes, and the
    result is rejected unless at least ``min_shared`` of its reachable nodes
    have two or more parent references (small DAGs are exempt when sharing is
    impossible).
    """
    best = None
    for _ in range(attempts):
        store = ExprStore()
        nv = n_vars or rng.randint(1, 4)
        pool = [store.var(f"x{i + 1}") for i in range(nv)]
        if rng.random() < 0.5:
            pool.append(store.const(rng.choice((0.5, 2.0, 3.0))))
        target = rng.randint(1, max(1, max_nodes - 3))
        while len(store) < target:
            op = random_op(rng, 0.45)
            args = [pool[-1 - min(int(rng.expovariate(0.25)), len(pool) - 1)] if rng.random() < 0.7
                    else rng.choice(pool) for _ in range(op.arity)]
            n = store.make(_payload(rng, op, args))
            if n == len(store) - 1:
                pool.append(n)
            if len(store) >= target:
                break
        root = _join_dangling(store, rng)
        store.roots = [root]
        frac = multi_parent_fraction(store, root)
        if frac >= min_shared or len(store.reachable(root)) < 4:
            return store, root
        if best is None or frac > best[0]:
            best = (frac, store, root)
    return best[1], best[2]


def _join_dangling(store: ExprStore, rng: random.Random) -> int:
    """Root that uses the most recent parentless nodes, so little of the
    generated graph is unreachable."""
    has_parent = set()
    for p in store.nodes:
        has_parent.update(children(p))
    tops = [n for n in range(len(store)) if n not in has_parent]
    root = tops[-1]
    for n in reversed(tops[:-1][-3:]):
        root = store.make(Binary(rng.choice((OpKind.ADD, OpKind.MUL)), n, root))
    return root


def random_tree_expr(rng: random.Random, max_depth: int, n_vars: int = 3,
                     store: Optional[ExprStore] = None) -> tuple[ExprStore, int]:
    """Random expression of depth at most ``max_depth`` built bottom-up into a
    hash-consed store (repeated subterms get shared)."""
    store = store if store is not None else ExprStore()
    names = [f"x{i + 1}" for i in range(n_vars)]
    for name in names:
        store.register_var(name)

    def gen(depth: int) -> int:
        if depth <= 1 or rng.random() < 0.25:
            if rng.random() < 0.8:
                return store.var(rng.choice(names))
            return store.const(rng.choice((0.5, 1.5, 2.0, 3.0)))
        op = random_op(rng)
        args = [gen(depth - 1) for _ in range(op.arity)]
        return store.make(_payload(rng, op, args))

    root = gen(max_depth)
    store.roots.append(root)
    return store, root


def random_tree(rng: random.Random, n: int, n_vars: int = 4) -> tuple[ExprStore, int]:
    """Tree-only expression with exactly ``n`` nodes and a random shape."""
    store = ExprStore(consed=False)
    names = [f"x{i + 1}" for i in range(n_vars)]
    for name in names:
        store.register_var(name)
    # build iteratively: (size, slot) work list, post-order assembly
    results: list[int] = []
    stack: list[tuple[int, Optional[object]]] = [(n, None)]
    while stack:
        size, op = stack.pop()
        if op is None:
            if size == 1:
                leaf = rng.random() < 0.85
                results.append(store.var(rng.choice(names)) if leaf
                               else store.const(rng.choice((0.5, 2.0, 3.0))))
                continue
            if size == 2:
                op = rng.choice(UNARY_OPS)
            else:
                op = random_op(rng, 0.3)
            stack.append((size, op))
            if op.arity == 1:
                stack.append((size - 1, None))
            else:
                left = rng.randint(1, size - 2)
                stack.append((size - 1 - left, None))
                stack.append((left, None))
            continue
        if op.arity == 1:
            results.append(store.make(_payload(rng, op, [results.pop()])))
        else:
            right = results.pop()
            left = results.pop()
            results.append(store.make(_payload(rng, op, [left, right])))
    root = results[0]
    store.roots = [root]
    return store, root


def speelpenning(n: int, store: Optional[ExprStore] = None) -> tuple[ExprStore, int]:
    """x1 * x2 * ... * xn as a left-nested product."""
    store = store if store is not None else ExprStore()
    root = store.var("x1")
    for i in range(2, n + 1):
        root = store.make(Binary(OpKind.MUL, root, store.var(f"x{i}")))
    store.roots.append(root)
    return store, root


def multi_parent_fraction(store: ExprStore, root: int) -> float:
    ids = store.reachable(root)
    counts = store.parent_counts(ids)
    return sum(1 for n in ids if counts[n] >= 2) / len(ids)

