"""A small arithmetic expression language for user-defined problem data.

Grammar, loosest binding first::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | NAME | NAME '(' sum (',' sum)* ')' | '(' sum ')'

so ``-2^2`` is ``-(2^2)`` and ``2^-1`` is ``2^(-1)``. Expressions evaluate on
floats or numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from l1fade.caputo import gamma as _gamma


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UndeclaredVariableError(ExprError):
    def __init__(self, name: str, allowed: Iterable[str]):
        allowed = ", ".join(sorted(allowed)) or "none"
        super().__init__(f"undeclared variable {name!r} (allowed: {allowed})")
        self.name = name


class UnknownFunctionError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"unknown function {name!r}")
        self.name = name


class ExprDomainError(ExprError):
    def __init__(self, message: str, expr: Expr):
        super().__init__(f"{message} in '{to_text(expr)}'")
        self.expr = expr


# {{{ syntax tree


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: Expr


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Expr, ...]


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTION_ARITY = {
    "exp": 1,
    "log": 1,
    "sin": 1,
    "cos": 1,
    "sqrt": 1,
    "abs": 1,
    "gamma": 1,
    "pow": 2,
}

# }}}

# {{{ tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# }}}

# {{{ parser


class _Parser:
    def __init__(self, text: str, allowed: frozenset[str]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.tok.pos)

    def parse(self) -> Expr:
        expr = self.sum()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return expr

    def sum(self) -> Expr:
        left = self.product()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.product())
        return left

    def product(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if self.accept("("):
                return self.call(tok)
            if tok.text not in self.allowed:
                raise UndeclaredVariableError(tok.text, self.allowed)
            return Var(tok.text)
        if self.accept("("):
            expr = self.sum()
            self.expect(")")
            return expr
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.pos)

    def call(self, name: _Token) -> Expr:
        if name.text not in FUNCTION_ARITY:
            raise UnknownFunctionError(name.text)
        args = [self.sum()]
        while self.accept(","):
            args.append(self.sum())
        self.expect(")")
        arity = FUNCTION_ARITY[name.text]
        if len(args) != arity:
            raise ExprSyntaxError(
                f"{name.text}() takes {arity} argument(s), got {len(args)}", name.pos
            )
        return Call(name.text, tuple(args))


def parse(text: str, allowed_vars: Iterable[str] = ("x", "t", "u")) -> Expr:
    """Parse *text*, accepting only the variable names in *allowed_vars*."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, frozenset(allowed_vars)).parse()


def variables(expr: Expr) -> frozenset[str]:
    if isinstance(expr, Var):
        return frozenset([expr.name])
    if isinstance(expr, Num):
        return frozenset()
    if isinstance(expr, Neg):
        return variables(expr.operand)
    if isinstance(expr, BinOp):
        return variables(expr.left) | variables(expr.right)
    return frozenset().union(*(variables(a) for a in expr.args))


def to_text(expr: Expr) -> str:
    """Canonical, fully parenthesised text that parses back to *expr*."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{to_text(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({to_text(expr.left)}{expr.op}{to_text(expr.right)})"
    return f"{expr.name}({','.join(to_text(a) for a in expr.args)})"


# }}}

# {{{ evaluation


def _is_scalar(v) -> bool:
    return np.ndim(v) == 0


def _gamma_values(v):
    if _is_scalar(v):
        return _gamma(float(v))
    return np.vectorize(_gamma, otypes=[np.float64])(v)


def _call(expr: Call, args: list):
    name = expr.name
    (v, *rest) = args
    if name in ("log", "gamma") and np.any(np.asarray(v) <= 0):
        raise ExprDomainError(f"{name} of a nonpositive value", expr)
    if name == "sqrt" and np.any(np.asarray(v) < 0):
        raise ExprDomainError("sqrt of a negative value", expr)
    if name == "pow":
        return _power(expr, v, rest[0])
    if name == "gamma":
        return _gamma_values(v)
    if _is_scalar(v):
        return {
            "exp": math.exp,
            "log": math.log,
            "sin": math.sin,
            "cos": math.cos,
            "sqrt": math.sqrt,
            "abs": abs,
        }[name](float(v))
    return {
        "exp": np.exp,
        "log": np.log,
        "sin": np.sin,
        "cos": np.cos,
        "sqrt": np.sqrt,
        "abs": np.abs,
    }[name](v)


def _power(expr: Expr, base, exponent):
    b = np.asarray(base, dtype=np.float64)
    e = np.asarray(exponent, dtype=np.float64)
    if np.any((b < 0) & (e != np.round(e))):
        raise ExprDomainError("negative base raised to a non-integer power", expr)
    if np.any((b == 0) & (e < 0)):
        raise ExprDomainError("zero raised to a negative power", expr)
    if _is_scalar(base) and _is_scalar(exponent):
        return float(base) ** float(exponent)
    return np.power(b, e)


def evaluate(expr: Expr, bindings: Mapping[str, object]):
    """Evaluate *expr* with variables taken from *bindings*.

    Values may be floats or numpy arrays (which broadcast).
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return bindings[expr.name]
        except KeyError:
            raise ExprError(f"variable {expr.name!r} is not bound") from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, bindings)
    if isinstance(expr, Call):
        return _call(expr, [evaluate(a, bindings) for a in expr.args])

    left = evaluate(expr.left, bindings)
    right = evaluate(expr.right, bindings)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "/":
        if np.any(np.asarray(right) == 0):
            raise ExprDomainError("division by zero", expr)
        return left / right
    return _power(expr, left, right)


# }}}
