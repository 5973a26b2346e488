"""Numeric evaluation of stores, trees and forests, plus finite differences."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .core import Binary, Const, ExprForest, ExprStore, OpKind, SymbolRef, Unary, Var

Valuation = Mapping[Union[str, int], float]
Expr = Union[ExprStore, ExprForest]


class UnboundVariable(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound variable {self.name!r}"


class DomainError(ArithmeticError):
    def __init__(self, op: str, value: float):
        super().__init__(f"{op} undefined at {value!r}")
        self.op = op
        self.value = value


def _lookup(valuation: Valuation, p: Var) -> float:
    if p.name in valuation:
        return float(valuation[p.name])
    if p.index in valuation:
        return float(valuation[p.index])
    raise UnboundVariable(p.name)


def apply_unary(op: OpKind, x: float, exponent: Optional[int] = None) -> float:
    try:
        if op is OpKind.NEG:
            return -x
        if op is OpKind.SIN:
            return math.sin(x)
        if op is OpKind.COS:
            return math.cos(x)
        if op is OpKind.EXP:
            return math.exp(x)
        if op is OpKind.LN:
            if x <= 0.0:
                raise DomainError("Ln", x)
            return math.log(x)
        if op is OpKind.SQRT:
            if x < 0.0:
                raise DomainError("Sqrt", x)
            return math.sqrt(x)
        if op is OpKind.POW:
            if x == 0.0 and exponent < 0:
                raise DomainError(f"Pow({exponent})", x)
            return x**exponent
    except OverflowError:
        raise DomainError(op.label, x) from None
    raise ValueError(f"not a unary op: {op}")


def apply_binary(op: OpKind, a: float, b: float) -> float:
    if op is OpKind.ADD:
        return a + b
    if op is OpKind.SUB:
        return a - b
    if op is OpKind.MUL:
        return a * b
    if op is OpKind.DIV:
        if b == 0.0:
            raise DomainError("Div", b)
        return a / b
    raise ValueError(f"not a binary op: {op}")


def evaluate_all(expr: Expr, root: Optional[int], valuation: Valuation) -> dict[int, float]:
    """Value of every node reachable from root, in one ascending scan."""
    if isinstance(expr, ExprForest):
        store, root, ids = expr.store, expr.main, expr.reachable()
        refs = expr.binding_root
    else:
        store, ids, refs = expr, expr.reachable(root), None
    vals: dict[int, float] = {}
    for n in ids:
        p = store[n]
        if isinstance(p, Binary):
            vals[n] = apply_binary(p.op, vals[p.left], vals[p.right])
        elif isinstance(p, Unary):
            vals[n] = apply_unary(p.op, vals[p.child], p.exponent)
        elif isinstance(p, Const):
            vals[n] = p.value
        elif isinstance(p, Var):
            vals[n] = _lookup(valuation, p)
        elif isinstance(p, SymbolRef):
            if refs is None:
                raise TypeError("SymbolRef outside a forest")
            vals[n] = vals[refs(p.binding)]
    return vals


def evaluate(expr: Expr, root: Optional[int], valuation: Valuation) -> float:
    if isinstance(expr, ExprForest):
        root = expr.main
    return evaluate_all(expr, root, valuation)[root]


def _var_key(expr: Expr, wrt: Union[str, int]) -> str:
    store = expr.store if isinstance(expr, ExprForest) else expr
    if isinstance(wrt, int):
        return store.var_names[wrt]
    return wrt


def finite_difference(expr: Expr, root: Optional[int], wrt: Union[str, int],
                      valuation: Valuation, h: float = 1e-6) -> float:
    """Central difference (f(x + h e) - f(x - h e)) / 2h along ``wrt``."""
    name = _var_key(expr, wrt)
    plus = {**_by_name(expr, valuation)}
    minus = dict(plus)
    x = plus.get(name, 0.0)
    plus[name] = x + h
    minus[name] = x - h
    return (evaluate(expr, root, plus) - evaluate(expr, root, minus)) / (2 * h)


def _by_name(expr: Expr, valuation: Valuation) -> dict[str, float]:
    store = expr.store if isinstance(expr, ExprForest) else expr
    out = {}
    for k, v in valuation.items():
        out[store.var_names[k] if isinstance(k, int) else k] = float(v)
    return out


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(value))


def is_well_conditioned(store: ExprStore, root: int, valuation: Valuation,
                        margin: float = 1e-3, h: float = 1e-6,
                        max_abs: Optional[float] = None) -> bool:
    """Domain check used by the random-point sampler: every Div denominator
    and negative-power base has magnitude at least ``margin``, every Ln and
    Sqrt argument is at least ``margin``, and evaluation succeeds at the
    point and at its ``h``-perturbations. With ``max_abs`` set, every
    intermediate value must also stay within that magnitude, which keeps
    out points where the function varies too fast for a finite step."""
    try:
        vals = evaluate_all(store, root, valuation)
        for n, v in vals.items():
            p = store[n]
            if not math.isfinite(v) or (max_abs is not None and abs(v) > max_abs):
                return False
            if isinstance(p, Binary) and p.op is OpKind.DIV and abs(vals[p.right]) < margin:
                return False
            if isinstance(p, Unary):
                arg = vals[p.child]
                if p.op in (OpKind.LN, OpKind.SQRT) and arg < margin:
                    return False
                if p.op is OpKind.POW and p.exponent < 0 and abs(arg) < margin:
                    return False
        for name in store.free_vars(root):
            for step in (h, -h):
                shifted = dict(_by_name(store, valuation))
                shifted[name] += step
                if not math.isfinite(evaluate(store, root, shifted)):
                    return False
    except (DomainError, OverflowError):
        return False
    return True


def sample_valuation(store: ExprStore, root: int, rng: random.Random, low: float = -2.0,
                     high: float = 2.0, margin: float = 1e-3, tries: int = 200,
                     max_abs: Optional[float] = None) -> Optional[dict[str, float]]:
    """Uniform random point in [low, high]^d, resampled until well conditioned.

    Returns None when no acceptable point is found within ``tries``.
    """
    names = store.free_vars(root)
    for _ in range(tries):
        point = {name: rng.uniform(low, high) for name in names}
        if is_well_conditioned(store, root, point, margin, max_abs=max_abs):
            return point
    return None


@dataclass
class VariableCheck:
    variable: str
    finite_difference: Optional[float] = None
    forward: Optional[float] = None
    symbolic: dict = field(default_factory=dict)
    max_relative_error: float = 0.0
    engines_bitwise_equal: bool = True
    ok: bool = False
    error: Optional[str] = None


@dataclass
class GradientReport:
    variables: list
    tol: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "tol": self.tol,
            "variables": [vars(v) for v in self.variables],
        }


def check_gradient(store: ExprStore, root: int, variables: Sequence[str], valuation: Valuation,
                   tol: float = 1e-5, h: float = 1e-6, budget: int = 10**6) -> GradientReport:
    """Compare forward mode, every symbolic policy, and finite differences.

    Failures, including domain errors, are reported rather than raised.
    """
    from .forward import forward_derivative
    from .symbolic import DiffPolicy, symbolic_derivative
    from .core import BudgetExceeded

    rows = []
    for name in variables:
        row = VariableCheck(name)
        try:
            row.finite_difference = finite_difference(store, root, name, valuation, h)
            d, table = forward_derivative(store, root, name)
            row.forward = evaluate(table.store, d, valuation)
            values = [row.forward]
            for policy in ("share", "cse", "copy"):
                try:
                    res = symbolic_derivative(store, root, name, DiffPolicy(policy, True), budget=budget)
                except BudgetExceeded as exc:
                    row.symbolic[policy] = f"budget exceeded ({exc.size} nodes)"
                    continue
                v = evaluate(res.output, res.root, valuation)
                row.symbolic[policy] = v
                values.append(v)
            row.engines_bitwise_equal = row.forward == row.symbolic.get("share")
            row.max_relative_error = max(relative_error(v, row.finite_difference) for v in values)
            row.ok = row.max_relative_error <= tol and row.engines_bitwise_equal
        except (DomainError, UnboundVariable) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
            row.ok = False
        rows.append(row)
    return GradientReport(rows, tol, all(r.ok for r in rows))
