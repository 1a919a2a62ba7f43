"""Closed-form coefficient expressions in the index variable ``i``.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' integer)?
    base   := integer | 'i' | '(' expr ')'

Evaluation is exact (``fractions.Fraction``).  Implicit multiplication such
as ``2i`` is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DSLEvaluationError, DSLSyntaxError

__all__ = [
    "Num", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Expr",
    "parse", "evaluate", "to_source",
]


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow]

_SYMBOLS = "+-*/^()"


def _tokenize(source: str):
    tokens = []
    pos, n = 0, len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
        elif ch.isdigit():
            start = pos
            while pos < n and source[pos].isdigit():
                pos += 1
            tokens.append(("int", int(source[start:pos]), start))
        elif ch.isalpha() or ch == "_":
            start = pos
            while pos < n and (source[pos].isalnum() or source[pos] == "_"):
                pos += 1
            word = source[start:pos]
            if word != "i":
                raise DSLSyntaxError(f"unknown identifier {word!r}", source, start)
            tokens.append(("var", word, start))
        elif ch in _SYMBOLS:
            tokens.append(("op", ch, pos))
            pos += 1
        else:
            raise DSLSyntaxError(f"unexpected character {ch!r}", source, pos)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return DSLSyntaxError(message, self.source, tok[2])

    def accept(self, op):
        kind, value, _ = self.peek()
        if kind == "op" and value == op:
            self.pos += 1
            return True
        return False

    def expr(self):
        node = self.term()
        while True:
            if self.accept("+"):
                node = Add(node, self.term())
            elif self.accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            if self.accept("*"):
                node = Mul(node, self.factor())
            elif self.accept("/"):
                node = Div(node, self.factor())
            else:
                return node

    def factor(self):
        if self.accept("-"):
            return Neg(self.factor())
        node = self.base()
        if self.accept("^"):
            kind, value, _ = tok = self.next()
            if kind != "int":
                raise self.error("exponent must be a non-negative integer literal", tok)
            node = Pow(node, value)
        return node

    def base(self):
        kind, value, _ = tok = self.next()
        if kind == "int":
            return Num(value)
        if kind == "var":
            return Var()
        if kind == "op" and value == "(":
            node = self.expr()
            if not self.accept(")"):
                raise self.error("expected ')'")
            return node
        if kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected token {value!r}", tok)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree.

    Raises
    ------
    DSLSyntaxError
        On malformed input or any identifier other than ``i``; the error
        records the offending position.
    """
    if not isinstance(source, str) or not source.strip():
        raise DSLSyntaxError("empty expression", source if isinstance(source, str) else "", 0)
    parser = _Parser(source)
    node = parser.expr()
    kind, value, _ = parser.peek()
    if kind != "end":
        if kind in ("int", "var") or (kind == "op" and value == "("):
            raise parser.error("implicit multiplication is not supported")
        raise parser.error(f"unexpected token {value!r}")
    return node


def evaluate(expr: Expr, i: int) -> Fraction:
    """Exact value of ``expr`` at index ``i``."""
    if isinstance(expr, Num):
        return Fraction(expr.value)
    if isinstance(expr, Var):
        return Fraction(i)
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, i)
    if isinstance(expr, Add):
        return evaluate(expr.left, i) + evaluate(expr.right, i)
    if isinstance(expr, Sub):
        return evaluate(expr.left, i) - evaluate(expr.right, i)
    if isinstance(expr, Mul):
        return evaluate(expr.left, i) * evaluate(expr.right, i)
    if isinstance(expr, Div):
        denominator = evaluate(expr.right, i)
        if denominator == 0:
            raise DSLEvaluationError(f"division by zero in {to_source(expr)!r}", i)
        return evaluate(expr.left, i) / denominator
    if isinstance(expr, Pow):
        return evaluate(expr.base, i) ** expr.exponent
    raise TypeError(f"not an expression node: {expr!r}")


# binding strength used by the printer
_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 5, Var: 5}
_OPS = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def to_source(expr: Expr) -> str:
    """Print ``expr`` with the fewest parentheses that reparse to the same tree."""
    kind = type(expr)
    if kind is Num:
        return str(expr.value)
    if kind is Var:
        return "i"
    if kind is Neg:
        inner = to_source(expr.operand)
        # the operand of unary minus is a factor
        if _PREC[type(expr.operand)] < _PREC[Neg]:
            inner = f"({inner})"
        return f"-{inner}"
    if kind is Pow:
        inner = to_source(expr.base)
        if type(expr.base) not in (Num, Var):
            inner = f"({inner})"
        return f"{inner}^{expr.exponent}"
    prec = _PREC[kind]
    left = to_source(expr.left)
    right = to_source(expr.right)
    if _PREC[type(expr.left)] < prec:
        left = f"({left})"
    # left-associative: an equal-precedence right operand needs parentheses
    if _PREC[type(expr.right)] <= prec:
        right = f"({right})"
    return f"{left} {_OPS[kind]} {right}"
