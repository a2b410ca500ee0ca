"""Scalar expressions of the time variable ``t``.

Grammar (recursive descent, conventional precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := number | 't' | 'pi' | name '(' expr ')' | '(' expr ')'

Evaluation works on floats and on numpy arrays of times alike, so a whole
grid of samples costs one tree walk.
"""

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvalError, ExpressionSyntaxError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            start = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {src[start]!r}", _byte_offset(src, start), src)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


def _byte_offset(src, index):
    return len(src[:index].encode("utf-8"))


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ExpressionSyntaxError(message, _byte_offset(self.src, tok[2]), self.src)

    def expect(self, text):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != text:
            self.fail(f"expected {text!r}")
        self.advance()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"trailing token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.peek()
        kind, text, _ = tok
        if kind == "num":
            self.advance()
            value = float(text)
            if not math.isfinite(value):
                self.fail("non-finite constant", tok)
            return Const(value)
        if kind == "name":
            self.advance()
            if text == "t":
                return Var()
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            self.fail(f"unknown identifier {text!r}", tok)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of expression", tok)
        self.fail(f"unexpected token {text!r}", tok)


def parse_expression(src):
    """Parse ``src`` into an expression tree.

    >>> parse_expression("1 + 2*t")
    BinOp(op='+', left=Const(value=1.0), right=BinOp(op='*', left=Const(value=2.0), right=Var()))
    """
    if not isinstance(src, str) or not src.strip():
        raise ExpressionSyntaxError("empty expression", 0, src if isinstance(src, str) else "")
    return _Parser(src).parse()


def _eval(node, t):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -_eval(node.operand, t)
    if isinstance(node, Call):
        return FUNCTIONS[node.name](_eval(node.arg, t))
    a = _eval(node.left, t)
    b = _eval(node.right, t)
    if node.op == "+":
        return np.add(a, b)
    if node.op == "-":
        return np.subtract(a, b)
    if node.op == "*":
        return np.multiply(a, b)
    if node.op == "/":
        if np.any(np.asarray(b) == 0.0):
            raise EvalError("division by zero")
        return np.divide(a, b)
    return np.power(np.asarray(a, dtype=float), b)


def evaluate_expression(ast, t):
    """Evaluate ``ast`` at time ``t`` (a float or an array of times).

    Raises EvalError on division by zero or any non-finite result.
    """
    with np.errstate(all="ignore"):
        value = _eval(ast, np.asarray(t, dtype=float) if np.ndim(t) else float(t))
        value = np.broadcast_to(np.asarray(value, dtype=float), np.shape(t))
    if not np.all(np.isfinite(value)):
        raise EvalError("expression evaluated to a non-finite value")
    return float(value) if value.ndim == 0 else np.array(value)


def to_source(node):
    """Fully parenthesized source text; re-parsing yields an identical tree."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.name}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


def compile_entry(entry):
    """Turn a config entry (number, string, tree or callable) into a sampler ``t -> value``."""
    if callable(entry) and not isinstance(entry, (Const, Var, Neg, BinOp, Call)):
        return entry
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        value = float(entry)
        if not math.isfinite(value):
            raise EvalError("non-finite constant entry")
        return lambda t: np.full(np.shape(t), value) if np.ndim(t) else value
    ast = parse_expression(entry) if isinstance(entry, str) else entry
    return lambda t: evaluate_expression(ast, t)
