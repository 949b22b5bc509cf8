"""Parser and evaluator for user-supplied density formulas in one variable x.

Grammar (lowest to highest precedence):

    compare := sum [("<" | "<=" | ">" | ">=") sum]
    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ["^" unary]          (right associative; "**" is accepted)
    atom    := number | "x" | "pi" | "e" | name "(" args ")" | "(" compare ")"

Functions: exp, log, sqrt, abs, erf, pow(a, b), min(a, b, ...), max(a, b, ...),
ind(condition). A bare comparison evaluates to 0/1 as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import ExpressionDomainError, ExpressionSyntaxError

_FUNCS = {"exp": 1, "log": 1, "sqrt": 1, "abs": 1, "erf": 1, "pow": 2, "ind": 1,
          "min": -1, "max": -1}
_CONSTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit() or (c == "." and i + 1 < len(text) and text[i + 1].isdigit()):
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < len(text) and text[j] in "eE":
                k = j + 1
                if k < len(text) and text[k] in "+-":
                    k += 1
                if k < len(text) and text[k].isdigit():
                    j = k
                    while j < len(text) and text[j].isdigit():
                        j += 1
            literal = text[i:j]
            try:
                float(literal)
            except ValueError:
                raise ExpressionSyntaxError(f"malformed number {literal!r}", i) from None
            tokens.append(Token("num", literal, i))
            i = j
        elif c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], i))
            i = j
        elif text.startswith("**", i):
            tokens.append(Token("op", "^", i))
            i += 2
        elif text.startswith("<=", i) or text.startswith(">=", i):
            tokens.append(Token("op", text[i:i + 2], i))
            i += 2
        elif c in "+-*/^(),<>":
            tokens.append(Token("op", c, i))
            i += 1
        else:
            raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, text=None):
        tok = self.tokens[self.i]
        if text is not None and tok.text != text:
            what = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {what}", tok.pos)
        self.i += 1
        return tok

    def parse(self):
        node = self.compare()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.pos)
        return node

    def compare(self):
        node = self.sum()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("<", "<=", ">", ">="):
            self.take()
            node = BinOp(tok.text, node, self.sum())
        return node

    def sum(self):
        node = self.product()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            node = BinOp(op, node, self.product())
        return node

    def product(self):
        node = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek().kind == "op" and self.peek().text == "-":
            self.take()
            return Neg(self.unary())
        if self.peek().kind == "op" and self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            if tok.text == "x":
                return Var()
            if tok.text in _CONSTS and self.peek().text != "(":
                return Num(_CONSTS[tok.text])
            if tok.text not in _FUNCS:
                raise ExpressionSyntaxError(f"unknown name {tok.text!r}", tok.pos)
            self.take("(")
            args = [self.compare()]
            while self.peek().text == ",":
                self.take()
                args.append(self.compare())
            self.take(")")
            arity = _FUNCS[tok.text]
            if arity > 0 and len(args) != arity:
                raise ExpressionSyntaxError(
                    f"{tok.text} takes {arity} argument(s), got {len(args)}", tok.pos)
            if arity < 0 and len(args) < 2:
                raise ExpressionSyntaxError(f"{tok.text} needs at least 2 arguments", tok.pos)
            return Call(tok.text, tuple(args))
        if tok.kind == "op" and tok.text == "(":
            node = self.compare()
            self.take(")")
            return node
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {what}", tok.pos)


def _eval(node, x, issues):
    if isinstance(node, Num):
        return np.full(x.shape, node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.arg, x, issues)
    if isinstance(node, BinOp):
        a = _eval(node.left, x, issues)
        b = _eval(node.right, x, issues)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if np.any(b == 0):
                issues.append("division by zero")
            with np.errstate(divide="ignore", invalid="ignore"):
                return a / b
        if op == "^":
            return _pow(a, b, issues)
        cmp = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}[op]
        return cmp(a, b).astype(float)
    if isinstance(node, Call):
        args = [_eval(a, x, issues) for a in node.args]
        name = node.name
        if name == "exp":
            with np.errstate(over="ignore"):
                return np.exp(args[0])
        if name == "log":
            if np.any(args[0] <= 0):
                issues.append("log of a non-positive value")
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.log(args[0])
        if name == "sqrt":
            if np.any(args[0] < 0):
                issues.append("sqrt of a negative value")
            with np.errstate(invalid="ignore"):
                return np.sqrt(args[0])
        if name == "abs":
            return np.abs(args[0])
        if name == "erf":
            return special.erf(args[0])
        if name == "pow":
            return _pow(args[0], args[1], issues)
        if name == "ind":
            return (args[0] != 0).astype(float)
        if name == "min":
            return np.minimum.reduce(args)
        if name == "max":
            return np.maximum.reduce(args)
    raise TypeError(f"unknown node {node!r}")


def _pow(a, b, issues):
    with np.errstate(all="ignore"):
        out = np.power(a, b)
    if np.any(np.isnan(out) & ~np.isnan(a) & ~np.isnan(b)):
        issues.append("fractional power of a negative value")
    if np.any((a == 0) & (b < 0)):
        issues.append("division by zero")
    return out


@dataclass(frozen=True)
class ExpressionAst:
    """A parsed formula plus its source text."""
    text: str
    root: object = field(repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _eval(self.root, x, [])

    def evaluate_checked(self, x):
        """Evaluate and return (values, list of domain problems encountered)."""
        issues = []
        values = _eval(self.root, np.asarray(x, dtype=float), issues)
        if np.any(~np.isfinite(values)) and not issues:
            issues.append("non-finite value")
        return values, issues

    def validate(self, support):
        """Reject formulas undefined somewhere on (an interior probe grid of) the support."""
        probe = probe_grid(support)
        values, issues = self.evaluate_checked(probe)
        if issues:
            bad = probe[~np.isfinite(values)]
            where = f" near x = {bad[0]:.6g}" if bad.size else ""
            raise ExpressionDomainError(f"{issues[0]} in {self.text!r}{where}")
        if np.any(values < 0):
            raise ExpressionDomainError(f"{self.text!r} is negative on the support")
        return self


def probe_grid(support, n=401):
    """Interior points of a support interval, clustered toward its ends."""
    a, b = support.lower, support.upper
    u = (np.arange(1, n + 1) - 0.5) / n
    if np.isfinite(a) and np.isfinite(b):
        return a + (b - a) * 0.5 * (1 - np.cos(np.pi * u))
    if np.isfinite(a):
        return a + u / (1 - u)
    if np.isfinite(b):
        return b - u / (1 - u)
    return np.tan(np.pi * (u - 0.5)) * 3.0


def parse_expression(text) -> ExpressionAst:
    return ExpressionAst(text, _Parser(text).parse())
