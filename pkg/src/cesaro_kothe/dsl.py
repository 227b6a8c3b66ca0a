"""A small expression language for log-weights ``log a_n(i)``.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := number | 'i' | 'n' | fn '(' expr ')' | '(' expr ')'
    fn     := 'exp' | 'log' | 'sqrt'

A minus sign that opens a term negates the whole term, so ``-i/n`` is
``Neg(i/n)`` and ``-i^2`` is ``-(i^2)``. Elsewhere (after ``*``, ``/`` or
``^``) it binds to the operand that follows, as in ``2^-i``. Both readings
accept exactly the strings of the grammar above.

The expression denotes the *logarithm* of the weight, so the
family ``a_n(i) = exp(-n e^{i/n})`` is written ``-n*exp(i/n)``.
Evaluation happens in extended precision on whole index arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "DSLError",
    "ParseError",
    "UnknownIdentifierError",
    "EvaluationError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse_weight_expr",
    "to_source",
    "evaluate",
]

FUNCTIONS = ("exp", "log", "sqrt")
VARIABLES = ("i", "n")
ATOM_START = frozenset({"number", "i", "n", "exp", "log", "sqrt", "(", "-"})


class DSLError(ValueError):
    """Base class for weight-expression errors."""


class ParseError(DSLError):
    """Syntax error at a byte offset, with the set of tokens that would have fit."""

    def __init__(self, offset: int, expected, found: str, text: str = ""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        self.text = text
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {offset}: expected one of {{{exp}}}, found {found}")

    def caret(self) -> str:
        """The source line with a caret under the offending byte."""
        prefix = self.text.encode("utf-8")[: self.offset].decode("utf-8", errors="replace")
        return f"{self.text}\n{' ' * len(prefix)}^"


class UnknownIdentifierError(DSLError):
    def __init__(self, offset: int, name: str):
        self.offset = offset
        self.name = name
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class EvaluationError(DSLError):
    """Non-finite value produced while evaluating an expression."""

    def __init__(self, n, i, value):
        self.n = n
        self.i = i
        self.value = value
        super().__init__(f"log-weight expression is not finite at n={n}, i={i} (got {value})")


Span = tuple  # (start, end) byte offsets


@dataclass(frozen=True)
class Num:
    text: str
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    span: Span = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"
    span: Span = field(default=(0, 0), compare=False)


Node = Union[Num, Var, Neg, BinOp, Call]


# --- tokenizer -------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d*)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'number', 'ident', an operator character, or 'end'
    text: str
    start: int  # byte offsets
    end: int


def _tokenize(text: str) -> list[_Tok]:
    tokens = []
    pos = 0
    byte = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(byte, ATOM_START | {"+", "*", "/", "^", ")"}, repr(text[pos]), text)
        lexeme = m.group()
        width = len(lexeme.encode("utf-8"))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Tok(lexeme if kind == "op" else kind, lexeme, byte, byte + width))
        pos = m.end()
        byte += width
    tokens.append(_Tok("end", "", byte, byte))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def fail(self, expected):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(t.start, expected, found, self.text)

    def advance(self) -> _Tok:
        t = self.tok
        self.k += 1
        return t

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            node = BinOp(op, node, rhs, (node.span[0], rhs.span[1]))
        return node

    def term(self) -> Node:
        if self.tok.kind == "-":
            start = self.advance().start
            operand = self.term()
            return Neg(operand, (start, operand.span[1]))
        node = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.advance().kind
            rhs = self.factor()
            node = BinOp(op, node, rhs, (node.span[0], rhs.span[1]))
        return node

    def factor(self) -> Node:
        base = self.unary()
        if self.tok.kind == "^":
            self.advance()
            exponent = self.factor()
            return BinOp("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def unary(self) -> Node:
        if self.tok.kind == "-":
            start = self.advance().start
            operand = self.unary()
            return Neg(operand, (start, operand.span[1]))
        return self.atom()

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Num(t.text, (t.start, t.end))
        if t.kind == "ident":
            if t.text in VARIABLES:
                self.advance()
                return Var(t.text, (t.start, t.end))
            if t.text in FUNCTIONS:
                self.advance()
                if self.tok.kind != "(":
                    self.fail({"("})
                self.advance()
                arg = self.expr()
                if self.tok.kind != ")":
                    self.fail({")", "+", "-", "*", "/", "^"})
                close = self.advance()
                return Call(t.text, arg, (t.start, close.end))
            raise UnknownIdentifierError(t.start, t.text)
        if t.kind == "(":
            open_ = self.advance()
            inner = self.expr()
            if self.tok.kind != ")":
                self.fail({")", "+", "-", "*", "/", "^"})
            close = self.advance()
            # parentheses leave no node of their own; widen the span
            return _respan(inner, (open_.start, close.end))
        self.fail(ATOM_START)


def _respan(node: Node, span: Span) -> Node:
    return type(node)(*[getattr(node, f) for f in node.__dataclass_fields__ if f != "span"], span=span)


def parse_weight_expr(text: str) -> Node:
    """Parse a log-weight expression into an AST.

    Raises ParseError (with byte offset and expected-token set) or
    UnknownIdentifierError.
    """
    return _Parser(text).parse()


# --- printing --------------------------------------------------------------

def _leaf(node: Node) -> bool:
    return isinstance(node, (Num, Var, Call))


def _paren(text: str) -> str:
    return f"({text})"


def _src(node: Node, ctx: str) -> str:
    # ctx "term": a term may start here; "unary": only a unary operand fits
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_src(node.arg, 'term')})"
    if isinstance(node, Neg):
        op = node.operand
        if ctx == "term":
            inner = _src(op, "term")
            return f"-{_paren(inner)}" if isinstance(op, BinOp) and op.op in "+-" else f"-{inner}"
        if _leaf(op) or isinstance(op, Neg):
            return f"-{_src(op, 'unary')}"
        return f"-{_paren(_src(op, 'term'))}"
    left, right = node.left, node.right
    if node.op in "+-":
        r = _src(right, "term")
        if isinstance(right, BinOp) and right.op in "+-":
            r = _paren(r)
        return f"{_src(left, 'term')}{node.op}{r}"
    # a leading minus in front of a product or power would swallow it
    if isinstance(left, Neg) or (isinstance(left, BinOp) and (left.op in "+-" or node.op == "^")):
        l_txt = _paren(_src(left, "term"))
    else:
        l_txt = _src(left, "term")
    if isinstance(right, Neg):
        r_txt = _src(right, "unary")
    elif isinstance(right, BinOp) and not (node.op == "^" and right.op == "^"):
        r_txt = _paren(_src(right, "term"))
    else:
        r_txt = _src(right, "term")
    return f"{l_txt}{node.op}{r_txt}"


def to_source(node: Node) -> str:
    """Pretty-print with the minimal parentheses that re-parse to the same tree."""
    return _src(node, "term")


# --- evaluation ------------------------------------------------------------

def _eval(node: Node, n, i):
    if isinstance(node, Num):
        return np.longdouble(node.text)
    if isinstance(node, Var):
        return i if node.name == "i" else n
    if isinstance(node, Neg):
        return -_eval(node.operand, n, i)
    if isinstance(node, Call):
        arg = _eval(node.arg, n, i)
        return getattr(np, node.fn)(arg)
    a = _eval(node.left, n, i)
    b = _eval(node.right, n, i)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


def evaluate(node: Node, n: int, i) -> np.ndarray:
    """Evaluate at one ``n`` and an array of ``i`` in extended precision.

    Raises EvaluationError naming the first (n, i) with a non-finite result.
    """
    i_arr = np.asarray(i, dtype=np.longdouble)
    n_val = np.longdouble(n)
    with np.errstate(all="ignore"):
        out = np.broadcast_to(_eval(node, n_val, i_arr), i_arr.shape).astype(np.longdouble)
    bad = ~np.isfinite(out)
    if bad.any():
        k = int(np.flatnonzero(bad.ravel())[0])
        raise EvaluationError(n, int(i_arr.ravel()[k]), out.ravel()[k])
    return out
