"""Scalar-field expressions over coordinates x1..xm.

Grammar (``^`` binds tightest and is right associative; unary minus
binds looser than ``^``)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?
    exponent:= '-'? INT | '(' '-'? INT ')'
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

from . import jets
from .errors import (
    EvalDomainError,
    ExprSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)
from .jets import Jet3

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based coordinate label


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with the dimension it was parsed for."""

    root: Node
    dimension: int

    def __str__(self) -> str:
        return to_string(self.root)

    def variables(self) -> frozenset[int]:
        return _variables(self.root)

    def depends_on(self, label: int) -> bool:
        return label in self.variables()


def _variables(n: Node) -> frozenset[int]:
    if isinstance(n, Var):
        return frozenset({n.index})
    if isinstance(n, Num):
        return frozenset()
    if isinstance(n, BinOp):
        return _variables(n.left) | _variables(n.right)
    if isinstance(n, Pow):
        return _variables(n.base)
    return _variables(n.arg)


def to_string(n: Node) -> str:
    """Fully parenthesized canonical text; parsing it gives back ``n``."""
    if isinstance(n, Num):
        return repr(float(n.value))
    if isinstance(n, Var):
        return f"x{n.index}"
    if isinstance(n, Neg):
        return f"(-{to_string(n.arg)})"
    if isinstance(n, BinOp):
        return f"({to_string(n.left)} {n.op} {to_string(n.right)})"
    if isinstance(n, Pow):
        return f"({to_string(n.base)}^({n.exponent}))"
    return f"{n.func}({to_string(n.arg)})"


# tokenizer -------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    raw = text.encode("utf-8")
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}",
                                  len(text[:pos].encode("utf-8")))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), len(text[:start].encode("utf-8"))))
        pos = m.end()
    toks.append(_Tok("end", "", len(raw)))
    return toks


class _Parser:
    def __init__(self, text: str, dimension: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.dim = dimension

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        t = self.take()
        if t.text != text:
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", t.offset)

    def parse(self) -> Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(f"unexpected token {t.text!r}", t.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        paren = self.peek().text == "("
        if paren:
            self.take()
        sign = 1
        if self.peek().text == "-":
            self.take()
            sign = -1
        t = self.take()
        if t.kind != "num" or not t.text.isdigit():
            raise ExprSyntaxError("exponent must be an integer literal", t.offset)
        if paren:
            self.expect(")")
        return sign * int(t.text)

    def atom(self) -> Node:
        t = self.take()
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "name":
            m = re.fullmatch(r"x(\d+)", t.text)
            if m:
                k = int(m.group(1))
                if k < 1 or k > self.dim:
                    raise VariableIndexError(t.text, self.dim, t.offset)
                return Var(k)
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            raise UnknownIdentifierError(t.text, t.offset)
        if t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {found}", t.offset)


def parse_expr(text: str, dimension: int) -> Expr:
    """Parse ``text`` into an :class:`Expr` over x1..x<dimension>."""
    if dimension < 3:
        raise ValueError("dimension must be at least 3")
    return Expr(_Parser(text, dimension).parse(), dimension)


# evaluation ------------------------------------------------------------

_JET_FUNCS = {"sin": jets.sin, "cos": jets.cos, "exp": jets.exp,
              "log": jets.log, "sqrt": jets.sqrt}


def _compile(n: Node) -> Callable[[list], object]:
    """Turn a node into a closure over the list of variable jets."""
    if isinstance(n, Num):
        v = float(n.value)
        return lambda xs: v
    if isinstance(n, Var):
        k = n.index - 1
        return lambda xs: xs[k]
    if isinstance(n, Neg):
        f = _compile(n.arg)
        return lambda xs: -f(xs)
    if isinstance(n, BinOp):
        fl, fr = _compile(n.left), _compile(n.right)
        if n.op == "+":
            return lambda xs: fl(xs) + fr(xs)
        if n.op == "-":
            return lambda xs: fl(xs) - fr(xs)
        if n.op == "*":
            return lambda xs: fl(xs) * fr(xs)

        def div(xs, fl=fl, fr=fr):
            den = fr(xs)
            if (den.value if isinstance(den, Jet3) else den) == 0.0:
                raise EvalDomainError("division by zero", to_string(n))
            return fl(xs) / den

        return div
    if isinstance(n, Pow):
        fb, e = _compile(n.base), n.exponent

        def power(xs):
            b = fb(xs)
            if e < 0 and (b.value if isinstance(b, Jet3) else b) == 0.0:
                raise EvalDomainError("negative power of zero", to_string(n))
            if isinstance(b, Jet3):
                return b**e
            return float(b) ** e

        return power
    fa, name = _compile(n.arg), n.func
    jf, mf = _JET_FUNCS[name], getattr(math, name)

    def call(xs):
        a = fa(xs)
        v = a.value if isinstance(a, Jet3) else a
        if name in ("log", "sqrt") and v <= 0.0:
            raise EvalDomainError(f"{name} of nonpositive value {v!r}", to_string(n))
        return jf(a) if isinstance(a, Jet3) else mf(a)

    return call


@lru_cache(maxsize=4096)
def _compiled(e: Expr):
    return _compile(e.root)


def eval_jet(e: Expr, p) -> Jet3:
    """Evaluate ``e`` at point ``p`` as an order-3 jet."""
    m = len(p)
    if m != e.dimension:
        raise ValueError(f"point has {m} coordinates, expression expects {e.dimension}")
    point = tuple(float(x) for x in p)
    xs = [Jet3.variable(m, k, point) for k in range(m)]
    out = _compiled(e)(xs)
    if not isinstance(out, Jet3):
        out = Jet3.constant(m, float(out), point)
    return out


def eval_value(e: Expr, p) -> float:
    """Plain float evaluation of ``e`` at ``p``."""
    return float(_compiled(e)([float(x) for x in p]))
