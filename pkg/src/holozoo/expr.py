"""Scalar expressions over chart coordinates with exact forward-mode derivatives.

Grammar (whitespace insensitive)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ")"
    atom     := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

IDENT is a declared coordinate, a named constant (``pi``, ``e``) or one of
sin, cos, tan, exp, log, sqrt, abs, sinh, cosh, tanh.  Exponents are
restricted to integer literals so powers stay single-valued on negative
bases.  Trees are immutable; printing a parsed tree and re-parsing yields a
structurally identical tree.

Evaluation is vectorised over points and propagates first and second
derivatives through jet (dual-number) arithmetic, so gradients and Hessians
are exact to machine rounding.  Hessians come out exactly symmetric because
every rule builds them from commutative sums of products.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Pow", "Call",
    "Jet2", "ExprError", "ExprParseError", "ExprDomainError",
    "parse_expr", "to_source", "eval_values", "eval_jet2", "evaluate_jets",
]


class ExprError(ValueError):
    """Base class for expression failures."""


class ExprParseError(ExprError):
    def __init__(self, message: str, source: str, position: int):
        super().__init__(f"{message} at position {position}: {source!r}")
        self.source = source
        self.position = position


class ExprDomainError(ExprError):
    """Evaluation hit an invalid real-domain point (division by zero, ...)."""

    def __init__(self, message: str, node: "Expr", point=None):
        where = "" if point is None else f" at point {np.asarray(point).tolist()}"
        super().__init__(f"{message} in subexpression '{to_source(node)}'{where}")
        self.node = node
        self.point = point


class Expr:
    """Immutable expression tree node."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


_CONSTANTS = {"pi": math.pi, "e": math.e}
_FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs",
              "sinh", "cosh", "tanh")

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
                       r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
                       r"|(?P<op>[-+*/^()]))")


def _tokenize(source: str):
    text = source.replace("−", "-")  # unicode minus
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ExprParseError(f"unexpected character {stripped[0]!r}", source, at)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("id") is not None:
            tokens.append(("id", m.group("id"), m.start("id")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.source = source
        self.coords = {name: i for i, name in enumerate(coords)}
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text, at = self.next()
        if kind != "op" or text != op:
            raise ExprParseError(f"expected {op!r}", self.source, at)

    def fail(self, message: str):
        raise ExprParseError(message, self.source, self.peek()[2])

    def parse(self) -> Expr:
        tree = self.expr()
        kind, text, at = self.peek()
        if kind != "end":
            raise ExprParseError(f"unexpected trailing input {text!r}", self.source, at)
        return tree

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.next()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        sign = 1
        parens = False
        if self.peek()[:2] == ("op", "("):
            self.next()
            parens = True
        if self.peek()[:2] == ("op", "-"):
            self.next()
            sign = -1
        kind, text, at = self.next()
        if kind != "num" or not re.fullmatch(r"\d+", text):
            raise ExprParseError("exponent must be an integer literal", self.source, at)
        if parens:
            self.expect_op(")")
        return sign * int(text)

    def atom(self) -> Expr:
        kind, text, at = self.next()
        if kind == "num":
            return Num(float(text))
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "id":
            if self.peek()[:2] == ("op", "("):
                if text not in _FUNCTIONS:
                    raise ExprParseError(f"unknown function {text!r}", self.source, at)
                self.next()
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in self.coords:
                return Var(self.coords[text], text)
            if text in _CONSTANTS:
                return Num(_CONSTANTS[text])
            raise ExprParseError(f"unknown identifier {text!r}", self.source, at)
        raise ExprParseError("expected a number, name or parenthesis", self.source, at)


def parse_expr(source: str, coords: Sequence[str]) -> Expr:
    """Parse ``source`` over the declared coordinate names."""
    return _Parser(source, coords).parse()


# precedence levels used by the printer; chosen so printed text re-parses
# to a structurally identical tree
def _prec(e: Expr) -> float:
    if isinstance(e, (Num, Var, Call)):
        return 4.0
    if isinstance(e, Pow):
        return 3.0
    if isinstance(e, Neg):
        return 2.5
    return 2.0 if e.op in "*/" else 1.0  # type: ignore[union-attr]


def to_source(e: Expr) -> str:
    """Render an expression; parser output round-trips structurally."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        return "-" + (inner if _prec(e.arg) >= 3 else f"({inner})")
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) < 4:
            base = f"({base})"
        exp = str(e.exponent) if e.exponent >= 0 else f"({e.exponent})"
        return f"{base}^{exp}"
    if isinstance(e, BinOp):
        lhs = to_source(e.left)
        rhs = to_source(e.right)
        if e.op in "+-":
            if _prec(e.right) <= 1:
                rhs = f"({rhs})"
        else:
            if _prec(e.left) < 2:
                lhs = f"({lhs})"
            if _prec(e.right) <= 2:
                rhs = f"({rhs})"
        return f"{lhs} {e.op} {rhs}"
    raise TypeError(f"not an Expr: {e!r}")


@dataclass
class Jet2:
    """Value with exact gradient and (exactly symmetric) Hessian."""

    value: float
    grad: np.ndarray
    hess: np.ndarray


def _outer_sym(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a, b: (B, n) -> symmetric (B, n, n); exact symmetry by commutativity
    return a[:, :, None] * b[:, None, :] + b[:, :, None] * a[:, None, :]


def _call_tables(fn: str, v: np.ndarray, order: int, node: Expr, pts):
    if fn == "sin":
        s = np.sin(v)
        return s, np.cos(v), -s
    if fn == "cos":
        c = np.cos(v)
        return c, -np.sin(v), -c
    if fn == "tan":
        t = np.tan(v)
        d = 1.0 + t * t
        return t, d, 2.0 * t * d
    if fn == "exp":
        x = np.exp(v)
        return x, x, x
    if fn == "log":
        if np.any(v <= 0.0):
            raise ExprDomainError("log of a non-positive value", node,
                                  pts[np.argmax(v <= 0.0)])
        return np.log(v), 1.0 / v, -1.0 / (v * v)
    if fn == "sqrt":
        if np.any(v < 0.0):
            raise ExprDomainError("sqrt of a negative value", node,
                                  pts[np.argmax(v < 0.0)])
        if order >= 1 and np.any(v == 0.0):
            raise ExprDomainError("sqrt derivative at zero", node,
                                  pts[np.argmax(v == 0.0)])
        s = np.sqrt(v)
        if order == 0:
            return s, None, None
        return s, 0.5 / s, -0.25 / (s * v)
    if fn == "abs":
        return np.abs(v), np.sign(v), np.zeros_like(v)
    if fn == "sinh":
        return np.sinh(v), np.cosh(v), np.sinh(v)
    if fn == "cosh":
        return np.cosh(v), np.sinh(v), np.cosh(v)
    if fn == "tanh":
        t = np.tanh(v)
        d = 1.0 - t * t
        return t, d, -2.0 * t * d
    raise ExprError(f"unknown function {fn!r}")


def evaluate_jets(exprs: Sequence[Expr], pts: np.ndarray, order: int):
    """Evaluate expressions at points ``pts`` of shape (B, n).

    Returns a list of ``(value, grad, hess)`` per expression where
    ``value`` is (B,), ``grad`` (B, n) for order >= 1 and ``hess``
    (B, n, n) for order == 2; unrequested entries are None.  Shared
    subtree objects are evaluated once per call.
    """
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2:
        raise ValueError("pts must have shape (B, n)")
    B, n = pts.shape
    cache: dict[int, tuple] = {}

    def ev(node: Expr):
        hit = cache.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Num):
            v = np.full(B, node.value)
            g = np.zeros((B, n)) if order >= 1 else None
            h = np.zeros((B, n, n)) if order >= 2 else None
            res = (v, g, h)
        elif isinstance(node, Var):
            if node.index >= n:
                raise ExprError(f"variable {node.name!r} outside point dimension {n}")
            v = pts[:, node.index].copy()
            g = None
            if order >= 1:
                g = np.zeros((B, n))
                g[:, node.index] = 1.0
            h = np.zeros((B, n, n)) if order >= 2 else None
            res = (v, g, h)
        elif isinstance(node, Neg):
            av, ag, ah = ev(node.arg)
            res = (-av, None if ag is None else -ag, None if ah is None else -ah)
        elif isinstance(node, BinOp):
            av, ag, ah = ev(node.left)
            bv, bg, bh = ev(node.right)
            op = node.op
            if op == "+":
                res = (av + bv,
                       None if ag is None else ag + bg,
                       None if ah is None else ah + bh)
            elif op == "-":
                res = (av - bv,
                       None if ag is None else ag - bg,
                       None if ah is None else ah - bh)
            elif op == "*":
                v = av * bv
                g = h = None
                if order >= 1:
                    g = ag * bv[:, None] + av[:, None] * bg
                if order >= 2:
                    h = (ah * bv[:, None, None] + av[:, None, None] * bh
                         + _outer_sym(ag, bg))
                res = (v, g, h)
            else:  # division
                if np.any(bv == 0.0):
                    raise ExprDomainError("division by zero", node,
                                          pts[np.argmax(bv == 0.0)])
                v = av / bv
                g = h = None
                if order >= 1:
                    g = (ag - v[:, None] * bg) / bv[:, None]
                if order >= 2:
                    h = (ah - v[:, None, None] * bh
                         - _outer_sym(g, bg)) / bv[:, None, None]
                res = (v, g, h)
        elif isinstance(node, Pow):
            av, ag, ah = ev(node.base)
            m = node.exponent
            if m < 0 and np.any(av == 0.0):
                raise ExprDomainError("zero base with negative exponent", node,
                                      pts[np.argmax(av == 0.0)])
            if m == 0:
                res = (np.ones(B),
                       np.zeros((B, n)) if order >= 1 else None,
                       np.zeros((B, n, n)) if order >= 2 else None)
            elif m == 1:
                res = (av, ag, ah)
            else:
                v = np.power(av, m)
                g = h = None
                if order >= 1:
                    d1 = m * np.power(av, m - 1)
                    g = d1[:, None] * ag
                    if order >= 2:
                        d2 = m * (m - 1) * np.power(av, m - 2)
                        h = (d1[:, None, None] * ah
                             + 0.5 * d2[:, None, None] * _outer_sym(ag, ag))
                res = (v, g, h)
        elif isinstance(node, Call):
            av, ag, ah = ev(node.arg)
            v, d1, d2 = _call_tables(node.fn, av, order, node, pts)
            g = h = None
            if order >= 1:
                g = d1[:, None] * ag
            if order >= 2:
                h = (d1[:, None, None] * ah
                     + 0.5 * d2[:, None, None] * _outer_sym(ag, ag))
            res = (v, g, h)
        else:
            raise TypeError(f"not an Expr: {node!r}")
        cache[id(node)] = res
        return res

    out = []
    for e in exprs:
        v, g, h = ev(e)
        for arr in (v, g, h):
            if arr is not None and not np.all(np.isfinite(arr)):
                bad = np.argwhere(~np.isfinite(np.atleast_2d(arr.reshape(B, -1))).all(axis=1))
                idx = int(bad[0, 0]) if bad.size else 0
                raise ExprDomainError("non-finite result", e, pts[idx])
        out.append((v, g, h))
    return out


def eval_values(e: Expr, pts: np.ndarray) -> np.ndarray:
    """Evaluate ``e`` at one point (n,) or a batch (B, n)."""
    pts = np.asarray(pts, dtype=float)
    single = pts.ndim == 1
    batch = pts[None, :] if single else pts
    v = evaluate_jets([e], batch, order=0)[0][0]
    return float(v[0]) if single else v


def eval_jet2(e: Expr, p: np.ndarray) -> Jet2:
    """Value, gradient and Hessian of ``e`` at a single point."""
    p = np.asarray(p, dtype=float)
    v, g, h = evaluate_jets([e], p[None, :], order=2)[0]
    return Jet2(float(v[0]), g[0], h[0])
