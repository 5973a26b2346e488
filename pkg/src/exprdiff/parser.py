"""Recursive-descent front ends.

Expressions::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' integer)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

Programs are statements separated by newlines or ``;``::

    name = expr
    if cond { ... } else { ... }
    while cond { ... }
    return expr

optionally wrapped as ``def f(x1, x2) { ... }`` to declare parameters.
Without the wrapper, identifiers that are read but never assigned become
parameters in order of first appearance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .core import Binary, Const, ExprStore, OpKind, Unary

FUNCTIONS = {"sin": OpKind.SIN, "cos": OpKind.COS, "exp": OpKind.EXP, "ln": OpKind.LN, "sqrt": OpKind.SQRT}
KEYWORDS = {"if", "else", "while", "return", "def"}
COMPARISONS = ("<=", ">=", "==", "!=", "<", ">")


class ParseError(SyntaxError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UseBeforeAssign(ParseError):
    pass


# -- AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    id: str
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "Ast"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Ast"


@dataclass(frozen=True)
class Power:
    base: "Ast"
    exponent: int


Ast = Union[Num, Name, Neg, BinOp, Call, Power]


@dataclass(frozen=True)
class Compare:
    op: str
    left: Ast
    right: Ast


@dataclass
class Assign:
    name: str
    value: Ast
    sid: int = 0


@dataclass
class If:
    cond: Compare
    then: list
    orelse: list
    sid: int = 0


@dataclass
class While:
    cond: Compare
    body: list
    sid: int = 0


@dataclass
class Return:
    value: Ast
    sid: int = 0


Stmt = Union[Assign, If, While, Return]


@dataclass
class Program:
    params: list[str]
    statements: list = field(default_factory=list)


# -- tokens ------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>\#[^\n]*)|(?P<nl>\n)"
    r"|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op><=|>=|==|!=|[-+*/^()<>{}=;,])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            tokens.append(Token("nl", "\n", line, pos - line_start + 1))
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, skip_newlines: bool):
        self.tokens = tokenize(text)
        if skip_newlines:
            self.tokens = [t for t in self.tokens if t.kind != "nl"]
        self.i = 0
        self.sid = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            self.error(f"expected {text!r}")
        return tok

    def skip_separators(self):
        while self.tok.kind == "nl" or self.tok.text == ";":
            self.i += 1

    # expressions
    def expr(self) -> Ast:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tokens[self.i].text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.factor()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tokens[self.i].text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Ast:
        if self.accept("-"):
            return Neg(self.factor())
        node = self.atom()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                self.error("expected integer exponent")
            self.i += 1
            node = Power(node, sign * int(tok.text))
        return node

    def atom(self) -> Ast:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text in KEYWORDS:
                self.error("expected expression")
            self.i += 1
            if tok.text in FUNCTIONS and self.tok.text == "(":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            return Name(tok.text, tok.line, tok.column)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.error("expected expression")

    # statements
    def next_sid(self) -> int:
        self.sid += 1
        return self.sid

    def block(self) -> list:
        self.expect("{")
        body = self.statements(until="}")
        self.expect("}")
        return body

    def cond(self) -> Compare:
        left = self.expr()
        if self.tok.text not in COMPARISONS:
            self.error("expected comparison operator")
        op = self.tok.text
        self.i += 1
        return Compare(op, left, self.expr())

    def statement(self) -> Stmt:
        tok = self.tok
        if self.accept("if"):
            sid = self.next_sid()
            cond = self.cond()
            then = self.block()
            orelse = []
            save = self.i
            self.skip_separators()
            if self.accept("else"):
                orelse = self.block()
            else:
                self.i = save
            return If(cond, then, orelse, sid)
        if self.accept("while"):
            sid = self.next_sid()
            cond = self.cond()
            return While(cond, self.block(), sid)
        if self.accept("return"):
            return Return(self.expr(), self.next_sid())
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.i += 1
            self.expect("=")
            return Assign(tok.text, self.expr(), self.next_sid())
        self.error("expected statement")

    def statements(self, until: str) -> list:
        out = []
        self.skip_separators()
        while self.tok.text != until and self.tok.kind != "eof":
            out.append(self.statement())
            if self.tok.text != until and self.tok.kind != "eof":
                if not (self.tok.kind == "nl" or self.tok.text == ";"):
                    self.error("expected newline or ';'")
            self.skip_separators()
        return out


# -- expression entry point ---------------------------------------------

def parse_ast(text: str) -> Ast:
    p = _Parser(text, skip_newlines=True)
    node = p.expr()
    if p.tok.kind != "eof":
        p.error("unexpected token")
    return node


_BINOPS = {"+": OpKind.ADD, "-": OpKind.SUB, "*": OpKind.MUL, "/": OpKind.DIV}


def build(node: Ast, store: ExprStore, env: Optional[dict] = None) -> int:
    """Construct ``node`` in ``store``. Names found in ``env`` map to
    existing node ids, every other name becomes a variable."""
    if isinstance(node, Num):
        return store.make(Const(node.value))
    if isinstance(node, Name):
        if env is not None and node.id in env:
            return env[node.id]
        return store.var(node.id)
    if isinstance(node, Neg):
        return store.make(Unary(OpKind.NEG, build(node.operand, store, env)))
    if isinstance(node, BinOp):
        left = build(node.left, store, env)
        return store.make(Binary(_BINOPS[node.op], left, build(node.right, store, env)))
    if isinstance(node, Call):
        return store.make(Unary(FUNCTIONS[node.func], build(node.arg, store, env)))
    if isinstance(node, Power):
        return store.make(Unary(OpKind.POW, build(node.base, store, env), node.exponent))
    raise TypeError(f"not an expression node: {node!r}")


def parse_expr(text: str, variables: Optional[Sequence[str]] = None,
               store: Optional[ExprStore] = None) -> tuple[ExprStore, int]:
    """Parse into a hash-consed DAG; repeated subexpressions share nodes.

    Variables are numbered by first appearance unless ``variables`` fixes
    the order up front.
    """
    ast = parse_ast(text)
    store = store if store is not None else ExprStore()
    for name in variables or ():
        store.register_var(name)
    root = build(ast, store)
    store.roots.append(root)
    return store, root


# -- program entry point -------------------------------------------------

def _names(node: Ast) -> Iterable[Name]:
    if isinstance(node, Name):
        yield node
    elif isinstance(node, Neg):
        yield from _names(node.operand)
    elif isinstance(node, BinOp):
        yield from _names(node.left)
        yield from _names(node.right)
    elif isinstance(node, (Call,)):
        yield from _names(node.arg)
    elif isinstance(node, Power):
        yield from _names(node.base)


def _stmt_reads(stmt) -> Iterable[Name]:
    if isinstance(stmt, (Assign, Return)):
        yield from _names(stmt.value)
    else:
        yield from _names(stmt.cond.left)
        yield from _names(stmt.cond.right)
        for s in (stmt.then + stmt.orelse) if isinstance(stmt, If) else stmt.body:
            yield from _stmt_reads(s)


def _assigned(stmts) -> set[str]:
    out = set()
    for s in stmts:
        if isinstance(s, Assign):
            out.add(s.name)
        elif isinstance(s, If):
            out |= _assigned(s.then) | _assigned(s.orelse)
        elif isinstance(s, While):
            out |= _assigned(s.body)
    return out


def _check_defined(stmts, defined: set[str]) -> set[str]:
    """Definite-assignment pass; returns names assigned on every path."""
    defined = set(defined)
    for s in stmts:
        if isinstance(s, (Assign, Return)):
            reads = list(_names(s.value))
        else:
            reads = list(_names(s.cond.left)) + list(_names(s.cond.right))
        for n in reads:
            if n.id not in defined:
                raise UseBeforeAssign(f"{n.id!r} may be used before assignment", n.line, n.column)
        if isinstance(s, Assign):
            defined.add(s.name)
        elif isinstance(s, If):
            defined = _check_defined(s.then, defined) & _check_defined(s.orelse, defined)
        elif isinstance(s, While):
            _check_defined(s.body, defined)
    return defined


def _check_returns(stmts, top: bool, p: _Parser):
    for i, s in enumerate(stmts):
        if isinstance(s, Return) and not (top and i == len(stmts) - 1):
            p.error("return must be the last top-level statement", p.tokens[0])
        if isinstance(s, If):
            _check_returns(s.then, False, p)
            _check_returns(s.orelse, False, p)
        elif isinstance(s, While):
            _check_returns(s.body, False, p)


def parse_program(text: str) -> Program:
    p = _Parser(text, skip_newlines=False)
    p.skip_separators()
    params: Optional[list[str]] = None
    if p.accept("def"):
        if p.tok.kind == "ident":
            p.i += 1
        p.expect("(")
        params = []
        while p.tok.text != ")":
            if p.tok.kind != "ident" or p.tok.text in KEYWORDS:
                p.error("expected parameter name")
            params.append(p.tok.text)
            p.i += 1
            if not p.accept(","):
                break
        p.expect(")")
        p.expect("{")
        body = p.statements(until="}")
        p.expect("}")
        p.skip_separators()
    else:
        body = p.statements(until="")
    if p.tok.kind != "eof":
        p.error("unexpected token")
    if not body or not isinstance(body[-1], Return):
        last = p.tokens[-1]
        raise ParseError("program must end with a return statement", last.line, last.column)
    _check_returns(body, True, p)
    if params is None:
        assigned = _assigned(body)
        params = []
        for s in body:
            for n in _stmt_reads(s):
                if n.id not in assigned and n.id not in params:
                    params.append(n.id)
    assigned = _assigned(body)
    for name in params:
        if name in assigned:
            raise ParseError(f"parameter {name!r} cannot be reassigned", 1, 1)
    _check_defined(body, set(params))
    return Program(params, body)
