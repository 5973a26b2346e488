"""Execution tracing for mini-language programs.

Running a program at concrete inputs records only arithmetic: conditions are
evaluated to pick a branch and logged in ``branch_decisions``, and a loop
simply keeps extending the DAG through the node ids bound to its variables.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .core import Binary, Const, ExprStore, OpKind, Unary, copy_into
from .evaluator import UnboundVariable, apply_binary, apply_unary, evaluate
from .parser import (
    Assign,
    Ast,
    BinOp,
    Call,
    FUNCTIONS,
    If,
    Name,
    Neg,
    Num,
    Power,
    Program,
    Return,
    UseBeforeAssign,
    While,
    _BINOPS,
)

DEFAULT_STEP_LIMIT = 10**5

_CMP = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
        "==": operator.eq, "!=": operator.ne}


class StepLimitExceeded(RuntimeError):
    pass


@dataclass
class Trace:
    dag: ExprStore
    root: int
    inputs: dict
    branch_decisions: list = field(default_factory=list)


class _Machine:
    def __init__(self, program: Program, inputs: Mapping[str, float], step_limit: int):
        self.store = ExprStore()
        self.values: dict[int, float] = {}
        self.env: dict[str, int] = {}
        self.steps = 0
        self.step_limit = step_limit
        self.decisions: list[tuple[int, bool]] = []
        for name in program.params:
            if name not in inputs:
                raise UnboundVariable(name)
            n = self.store.var(name)
            self.values[n] = float(inputs[name])
            self.env[name] = n

    def node(self, payload) -> int:
        n = self.store.make(payload)
        if n not in self.values:
            if isinstance(payload, Const):
                v = payload.value
            elif isinstance(payload, Unary):
                v = apply_unary(payload.op, self.values[payload.child], payload.exponent)
            else:
                v = apply_binary(payload.op, self.values[payload.left], self.values[payload.right])
            self.values[n] = v
        return n

    def expr(self, node: Ast) -> int:
        if isinstance(node, Num):
            return self.node(Const(node.value))
        if isinstance(node, Name):
            if node.id not in self.env:
                raise UseBeforeAssign(f"{node.id!r} used before assignment", node.line, node.column)
            return self.env[node.id]
        if isinstance(node, Neg):
            return self.node(Unary(OpKind.NEG, self.expr(node.operand)))
        if isinstance(node, BinOp):
            left = self.expr(node.left)
            return self.node(Binary(_BINOPS[node.op], left, self.expr(node.right)))
        if isinstance(node, Call):
            return self.node(Unary(FUNCTIONS[node.func], self.expr(node.arg)))
        if isinstance(node, Power):
            return self.node(Unary(OpKind.POW, self.expr(node.base), node.exponent))
        raise TypeError(node)

    def test(self, stmt) -> bool:
        cond = stmt.cond
        taken = _CMP[cond.op](self.values[self.expr(cond.left)], self.values[self.expr(cond.right)])
        self.decisions.append((stmt.sid, taken))
        return taken

    def tick(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise StepLimitExceeded(f"more than {self.step_limit} statements executed")

    def run(self, stmts) -> Optional[int]:
        for s in stmts:
            self.tick()
            if isinstance(s, Assign):
                self.env[s.name] = self.expr(s.value)
            elif isinstance(s, Return):
                return self.expr(s.value)
            elif isinstance(s, If):
                self.run(s.then if self.test(s) else s.orelse)
            elif isinstance(s, While):
                while self.test(s):
                    self.run(s.body)
                    self.tick()
        return None


def trace_program(program: Program, inputs: Mapping[str, float],
                  step_limit: int = DEFAULT_STEP_LIMIT) -> Trace:
    """Interpret ``program`` at ``inputs`` and return the branch-free DAG of
    the arithmetic that produced the returned value (unreachable work such
    as loop counters is dropped)."""
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    m = _Machine(program, inputs, step_limit)
    root = m.run(program.statements)
    dag = m.store.empty_like()
    root = copy_into(m.store, root, dag)
    dag.roots = [root]
    return Trace(dag, root, {p: float(inputs[p]) for p in program.params}, m.decisions)


def trace_derivative(program: Program, inputs: Mapping[str, float], wrt: Union[str, int],
                     mode: str = "forward", policy: str = "share", simplify: bool = False,
                     step_limit: int = DEFAULT_STEP_LIMIT) -> tuple[float, float]:
    """Value and derivative of the program at ``inputs``, valid on the
    branch the trace took."""
    from .forward import forward_derivative
    from .symbolic import DiffPolicy, symbolic_derivative

    tr = trace_program(program, inputs, step_limit)
    value = evaluate(tr.dag, tr.root, tr.inputs)
    if mode == "forward":
        d, table = forward_derivative(tr.dag, tr.root, wrt, simplify)
        return value, evaluate(table.store, d, tr.inputs)
    if mode == "symbolic":
        res = symbolic_derivative(tr.dag, tr.root, wrt, DiffPolicy(policy, True), simplify)
        return value, evaluate(res.output, res.root, tr.inputs)
    raise ValueError(f"unknown mode {mode!r}")

