"""Expression IR: hash-consed append-only node store, forests, and the
instrumented constructor shared by both differentiation engines.

Node ids are dense indices in creation order, so every child id is smaller
than its parent's id and a single forward scan visits children first.
"""

from __future__ import annotations

import enum
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Union


class StructuralError(ValueError):
    """A node references a child id that does not exist in the store."""


class BudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"expression of {size} nodes exceeds budget {budget}")
        self.size = size
        self.budget = budget


class OpKind(enum.Enum):
    ADD = "Add"
    SUB = "Sub"
    MUL = "Mul"
    DIV = "Div"
    NEG = "Neg"
    SIN = "Sin"
    COS = "Cos"
    EXP = "Exp"
    LN = "Ln"
    SQRT = "Sqrt"
    POW = "Pow"  # integer exponent carried on the Unary payload

    @property
    def arity(self) -> int:
        return 2 if self in _BINARY else 1

    @property
    def label(self) -> str:
        return self.value


_BINARY = frozenset({OpKind.ADD, OpKind.SUB, OpKind.MUL, OpKind.DIV})
UNARY_OPS = tuple(op for op in OpKind if op not in _BINARY)
BINARY_OPS = tuple(op for op in OpKind if op in _BINARY)


@dataclass(frozen=True)
class Var:
    index: int
    name: str


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Unary:
    op: OpKind
    child: int
    exponent: Optional[int] = None

    def __post_init__(self):
        if self.op.arity != 1:
            raise ValueError(f"{self.op.label} is not unary")
        if (self.op is OpKind.POW) != (self.exponent is not None):
            raise ValueError("exponent is required for Pow and only for Pow")


@dataclass(frozen=True)
class Binary:
    op: OpKind
    left: int
    right: int

    def __post_init__(self):
        if self.op.arity != 2:
            raise ValueError(f"{self.op.label} is not binary")


@dataclass(frozen=True)
class SymbolRef:
    binding: int


Payload = Union[Var, Const, Unary, Binary, SymbolRef]


def float_bits(value: float) -> int:
    return struct.unpack("<q", struct.pack("<d", value))[0]


def cons_key(payload: Payload) -> tuple:
    if isinstance(payload, Binary):
        return ("b", payload.op, payload.left, payload.right)
    if isinstance(payload, Unary):
        return ("u", payload.op, payload.exponent, payload.child)
    if isinstance(payload, Const):
        return ("c", float_bits(payload.value))
    if isinstance(payload, Var):
        return ("v", payload.index)
    return ("r", payload.binding)


def children(payload: Payload) -> tuple[int, ...]:
    if isinstance(payload, Binary):
        return (payload.left, payload.right)
    if isinstance(payload, Unary):
        return (payload.child,)
    return ()


def op_label(payload: Payload) -> str:
    if isinstance(payload, Unary) and payload.op is OpKind.POW:
        return f"Pow({payload.exponent})"
    if isinstance(payload, (Unary, Binary)):
        return payload.op.label
    return type(payload).__name__


class Role(str, enum.Enum):
    LOCAL_PARTIAL = "local-partial"
    CHAIN_MULTIPLY = "chain-multiply"
    FAN_IN_ADD = "fan-in-add"
    SEED = "seed"


@dataclass
class OpLog:
    """Multiset of constructor calls made while building derivatives.

    One entry per call to the instrumented constructor, whether the call
    appended a node, hit the cons table, or was rewritten by simplification.
    """

    entries: Counter = field(default_factory=Counter)

    def record(self, label: str, role: Role) -> None:
        self.entries[(label, role.value)] += 1

    @property
    def counters(self) -> Counter:
        c: Counter = Counter()
        for (label, _), n in self.entries.items():
            c[label] += n
        return c

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def merge(self, other: "OpLog") -> "OpLog":
        return OpLog(self.entries + other.entries)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "counters": dict(sorted(self.counters.items())),
            "entries": {f"{label}/{role}": n for (label, role), n in sorted(self.entries.items())},
        }


class ExprStore:
    """Append-only node store.

    In hash-consed mode structurally identical payloads share one id; in
    tree-only mode every construction appends. ``simplify`` turns on the
    smart-constructor rewrites in :meth:`make`.
    """

    def __init__(self, consed: bool = True, simplify: bool = False, allow_refs: bool = False):
        self.consed = consed
        self.simplify = simplify
        self.allow_refs = allow_refs
        self.nodes: list[Payload] = []
        self.roots: list[int] = []
        self.var_names: list[str] = []
        self._var_index: dict[str, int] = {}
        self._cons: dict[tuple, int] = {}
        self.cons_hits = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, node_id: int) -> Payload:
        return self.nodes[node_id]

    @property
    def mode(self) -> str:
        return "hash-consed" if self.consed else "tree-only"

    def clone(self, simplify: Optional[bool] = None) -> "ExprStore":
        other = ExprStore(self.consed, self.simplify if simplify is None else simplify, self.allow_refs)
        other.nodes = list(self.nodes)
        other.roots = list(self.roots)
        other.var_names = list(self.var_names)
        other._var_index = dict(self._var_index)
        other._cons = dict(self._cons)
        return other

    def empty_like(self, consed: Optional[bool] = None, simplify: Optional[bool] = None) -> "ExprStore":
        """New store sharing this store's variable numbering but no nodes."""
        other = ExprStore(self.consed if consed is None else consed,
                          self.simplify if simplify is None else simplify,
                          self.allow_refs)
        other.var_names = list(self.var_names)
        other._var_index = dict(self._var_index)
        return other

    def var_index(self, name: str) -> Optional[int]:
        return self._var_index.get(name)

    def register_var(self, name: str) -> int:
        if name not in self._var_index:
            self._var_index[name] = len(self.var_names)
            self.var_names.append(name)
        return self._var_index[name]

    def resolve_var(self, wrt: Union[int, str, None]) -> Optional[int]:
        if wrt is None or isinstance(wrt, int):
            return wrt
        return self._var_index.get(wrt)

    # -- construction -------------------------------------------------

    def _append(self, payload: Payload) -> int:
        for c in children(payload):
            if not 0 <= c < len(self.nodes):
                raise StructuralError(f"child id {c} out of range (store has {len(self.nodes)} nodes)")
        if isinstance(payload, SymbolRef) and not self.allow_refs:
            raise StructuralError("SymbolRef only allowed in forest stores")
        if self.consed:
            key = cons_key(payload)
            hit = self._cons.get(key)
            if hit is not None:
                self.cons_hits += 1
                return hit
            self._cons[key] = len(self.nodes)
        self.nodes.append(payload)
        return len(self.nodes) - 1

    def make(self, payload: Payload, log: Optional[OpLog] = None, role: Role = Role.LOCAL_PARTIAL) -> int:
        """The instrumented smart constructor (``make_node``)."""
        if log is not None:
            log.record(op_label(payload), role)
        if self.simplify:
            rewritten = self._simplified(payload)
            if rewritten is not None:
                return rewritten
        return self._append(payload)

    def _const_value(self, node_id: int) -> Optional[float]:
        if not 0 <= node_id < len(self.nodes):
            raise StructuralError(f"child id {node_id} out of range")
        p = self.nodes[node_id]
        return p.value if isinstance(p, Const) else None

    def _simplified(self, payload: Payload) -> Optional[int]:
        if isinstance(payload, Unary):
            if payload.op is OpKind.NEG:
                c = self._const_value(payload.child)
                if c is not None:
                    return self._append(Const(-c))
            return None
        if not isinstance(payload, Binary):
            return None
        op, a, b = payload.op, payload.left, payload.right
        ca, cb = self._const_value(a), self._const_value(b)
        if ca is not None and cb is not None:
            if op is OpKind.ADD:
                return self._append(Const(ca + cb))
            if op is OpKind.SUB:
                return self._append(Const(ca - cb))
            if op is OpKind.MUL:
                return self._append(Const(ca * cb))
            if op is OpKind.DIV and cb != 0.0:
                return self._append(Const(ca / cb))
        if op is OpKind.ADD:
            if cb == 0.0:
                return a
            if ca == 0.0:
                return b
        elif op is OpKind.MUL:
            if cb == 1.0:
                return a
            if ca == 1.0:
                return b
            if ca == 0.0 or cb == 0.0:
                return self._append(Const(0.0))
        return None

    # convenience wrappers; none of these log
    def var(self, name: str) -> int:
        return self._append(Var(self.register_var(name), name))

    def var_by_index(self, index: int) -> int:
        return self._append(Var(index, self.var_names[index]))

    def const(self, value: float) -> int:
        return self._append(Const(float(value)))

    def unary(self, op: OpKind, child: int, exponent: Optional[int] = None) -> int:
        return self.make(Unary(op, child, exponent))

    def binary(self, op: OpKind, left: int, right: int) -> int:
        return self.make(Binary(op, left, right))

    # -- queries ------------------------------------------------------

    def reachable(self, root: int, through_refs: Optional[Callable[[int], int]] = None) -> list[int]:
        """Ids reachable from ``root``, ascending (hence topological)."""
        seen = {root}
        stack = [root]
        while stack:
            n = stack.pop()
            p = self.nodes[n]
            nxt: Iterable[int] = children(p)
            if isinstance(p, SymbolRef) and through_refs is not None:
                nxt = (through_refs(p.binding),)
            for c in nxt:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return sorted(seen)

    def parent_counts(self, ids: Iterable[int]) -> Counter:
        """Number of parent references (edges) into each node among ``ids``."""
        counts: Counter = Counter()
        for n in ids:
            for c in children(self.nodes[n]):
                counts[c] += 1
        return counts

    def free_vars(self, root: int) -> list[str]:
        names = {self.nodes[n].name for n in self.reachable(root) if isinstance(self.nodes[n], Var)}
        return [v for v in self.var_names if v in names]


@dataclass
class Binding:
    id: int
    name: str
    root: int


@dataclass
class ExprForest:
    """Named bindings plus a main root, all living in one store that allows
    :class:`SymbolRef` nodes. Bindings only reference earlier bindings."""

    store: ExprStore
    bindings: list[Binding]
    main: int

    def binding_root(self, binding_id: int) -> int:
        return self.bindings[binding_id].root

    def binding_named(self, name: str) -> Binding:
        for b in self.bindings:
            if b.name == name:
                return b
        raise KeyError(name)

    def reachable(self) -> list[int]:
        return self.store.reachable(self.main, self.binding_root)

    def used_bindings(self) -> list[Binding]:
        used = {self.store[n].binding for n in self.reachable() if isinstance(self.store[n], SymbolRef)}
        return [b for b in self.bindings if b.id in used]

    def inline(self) -> tuple[ExprStore, int]:
        """Replace every reference by its binding's root, keeping sharing.

        The result is a fresh hash-consed store holding only what ``main``
        reaches.
        """
        src = self.store
        out = src.empty_like(consed=True, simplify=False)
        out.allow_refs = False
        mapping: dict[int, int] = {}
        for n in self.reachable():
            p = src[n]
            if isinstance(p, SymbolRef):
                continue
            mapping[n] = out._append(_remap(p, mapping, lambda c: _deref(src, self, c)))
        for n in self.reachable():
            if isinstance(src[n], SymbolRef):
                mapping[n] = mapping[_deref(src, self, n)]
        root = mapping[_deref(src, self, self.main)]
        out.roots = [root]
        return out, root


def _deref(store: ExprStore, forest: ExprForest, n: int) -> int:
    while isinstance(store[n], SymbolRef):
        n = forest.binding_root(store[n].binding)
    return n


def _remap(p: Payload, mapping: dict[int, int], resolve: Callable[[int], int] = lambda c: c) -> Payload:
    if isinstance(p, Binary):
        return Binary(p.op, mapping[resolve(p.left)], mapping[resolve(p.right)])
    if isinstance(p, Unary):
        return Unary(p.op, mapping[resolve(p.child)], p.exponent)
    return p


def copy_into(src: ExprStore, root: int, out: ExprStore) -> int:
    """Copy the expression under ``root`` into ``out`` through ``out``'s
    own construction rules (no logging, no simplification), returning the
    new root. For a tree-only ``out`` this duplicates every shared node."""
    if out.consed:
        mapping: dict[int, int] = {}
        for n in src.reachable(root):
            mapping[n] = out._append(_remap(_portable(src, out, src[n]), mapping))
        return mapping[root]
    # tree output: explicit post-order so sharing in ``src`` is unfolded
    results: list[int] = []
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        n, expanded = stack.pop()
        p = src[n]
        kids = children(p)
        if not expanded and kids:
            stack.append((n, True))
            for c in reversed(kids):
                stack.append((c, False))
            continue
        p = _portable(src, out, p)
        if kids:
            args = results[-len(kids):]
            del results[-len(kids):]
            if isinstance(p, Binary):
                p = Binary(p.op, args[0], args[1])
            else:
                p = Unary(p.op, args[0], p.exponent)
        results.append(out._append(p))
    return results[0]


def _portable(src: ExprStore, out: ExprStore, p: Payload) -> Payload:
    if isinstance(p, Var) and src is not out:
        return Var(out.register_var(p.name), p.name)
    return p


def extract(store: ExprStore, root: int) -> tuple[ExprStore, int]:
    """Fresh hash-consed store holding only the nodes reachable from root."""
    out = store.empty_like(consed=True)
    new_root = copy_into(store, root, out)
    out.roots = [new_root]
    return out, new_root


def node_count(expr: Union[ExprStore, ExprForest], root: Optional[int] = None) -> int:
    """Size metric: distinct reachable nodes for DAGs and forests (each
    SymbolRef is one node), tree size counting repeats for tree-only stores."""
    if isinstance(expr, ExprForest):
        return len(expr.reachable())
    if root is None:
        if not expr.roots:
            return len(expr.nodes)
        root = expr.roots[-1]
    if expr.consed:
        return len(expr.reachable(root))
    return tree_size(expr, root)


def tree_size(store: ExprStore, root: int) -> int:
    """Number of nodes the expression has once fully unfolded (exact int)."""
    sizes: dict[int, int] = {}
    for n in store.reachable(root):
        sizes[n] = 1 + sum(sizes[c] for c in children(store[n]))
    return sizes[root]


def iter_nodes(store: ExprStore) -> Iterator[tuple[int, Payload]]:
    return enumerate(store.nodes)
