"""Benchmark drivers: Speelpenning's product, the squaring chain, and
derivative-size scaling on random trees."""

from __future__ import annotations

import math
import random
import statistics

from .core import BudgetExceeded, node_count
from .equivalence import compare_op_logs, compare_structural
from .evaluator import evaluate
from .forward import forward_derivative
from .randexpr import random_tree, speelpenning
from .symbolic import DiffPolicy, derivative_size, symbolic_derivative
from .transforms import DEFAULT_BUDGET, squaring_chain, swell_report


def bench_speelpenning(n: int = 10, seed: int = 0, low: float = 0.5, high: float = 2.0) -> dict:
    if n < 2:
        raise ValueError("n must be >= 2")
    store, root = speelpenning(n)
    rng = random.Random(seed)
    point = {f"x{i}": rng.uniform(low, high) for i in range(1, n + 1)}
    components = []
    for j in range(1, n + 1):
        name = f"x{j}"
        d, table = forward_derivative(store, root, name)
        res = symbolic_derivative(store, root, name, DiffPolicy("cse", True))
        fwd = evaluate(table.store, d, point)
        sym = evaluate(res.output, res.root, point)
        exact = math.prod(v for k, v in point.items() if k != name)
        verdict = compare_op_logs(table.log, res.log)
        components.append({
            "variable": name,
            "forward": fwd,
            "symbolic": sym,
            "closed_form": exact,
            "relative_error": max(abs(fwd - exact), abs(sym - exact)) / abs(exact),
            "forward_ops": table.log.total,
            "symbolic_ops": res.log.total,
            "ops_equal": verdict.equal_multiset,
            "structurally_equal": compare_structural((table.store, d), (res.output, res.root)).equal,
            "forward_nodes": node_count(table.store, d),
            "symbolic_forest_nodes": node_count(res.output),
        })
    return {
        "n": n,
        "seed": seed,
        "point": point,
        "input_nodes": node_count(store, root),
        "components": components,
        "forward_total_ops": sum(c["forward_ops"] for c in components),
        "symbolic_total_ops": sum(c["symbolic_ops"] for c in components),
        "max_relative_error": max(c["relative_error"] for c in components),
        "all_ops_equal": all(c["ops_equal"] for c in components),
        "all_structurally_equal": all(c["structurally_equal"] for c in components),
    }


def bench_swell(k_max: int = 20, budget: int = DEFAULT_BUDGET, copy_budget: int = 10**5) -> dict:
    """Per k: DAG, tree and forest sizes of x^(2^k), and derivative sizes per
    policy (None where the copying derivative exceeds ``copy_budget``)."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    rows = []
    for k in range(1, k_max + 1):
        store, root = squaring_chain(k)
        rep = swell_report(store, root, budget)
        row = {"k": k, **rep.to_dict(), "tree_formula": 2 ** (k + 1) - 1}
        sizes = {}
        for policy in ("share", "cse", "copy"):
            try:
                limit = copy_budget if policy == "copy" else budget
                sizes[policy] = derivative_size(DiffPolicy(policy, True), store, root, "x", budget=limit)
            except BudgetExceeded:
                sizes[policy] = None
        row["derivative_nodes"] = sizes
        d, table = forward_derivative(store, root, "x")
        row["forward_derivative_nodes"] = node_count(table.store, d)
        rows.append(row)
    return {"k_max": k_max, "budget": budget, "copy_budget": copy_budget, "rows": rows}


def loglog_slope(ns, sizes) -> float:
    return statistics.linear_regression([math.log(n) for n in ns], [math.log(s) for s in sizes]).slope


def bench_size_scaling(seed: int = 0, sizes=(16, 64, 256, 1024, 4096), samples: int = 5,
                       wrt: str = "x1", budget: int = 10**7) -> dict:
    """Derivative sizes under sharing (memoized) and copying on random trees."""
    rng = random.Random(seed)
    records = []
    for n in sizes:
        for _ in range(samples):
            tree, root = random_tree(rng, n)
            records.append({
                "n": n,
                "share": derivative_size(DiffPolicy("share", True), tree, root, wrt),
                "copy": derivative_size(DiffPolicy("copy", True), tree, root, wrt, budget=budget),
            })
    ns = [r["n"] for r in records]
    return {
        "seed": seed,
        "samples_per_size": samples,
        "records": records,
        "share_slope": loglog_slope(ns, [r["share"] for r in records]),
        "copy_slope": loglog_slope(ns, [r["copy"] for r in records]),
        "max_share_ratio": max(r["share"] / r["n"] for r in records),
    }
