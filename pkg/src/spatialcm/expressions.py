"""Condition and arithmetic expressions.

Conditions decide whether a dynamic anchor is active::

    expr       := or_expr
    or_expr    := and_expr ("or" and_expr)*
    and_expr   := unary ("and" unary)*
    unary      := "not" unary | comparison | "(" expr ")"
    comparison := operand (("=="|"!="|"<"|"<="|">"|">=") operand)?
    operand    := identifier | number | "'" text "'" | "true" | "false"

Field expressions use the same tokens plus ``+ - * / ^``, unary minus and
calls to a few math functions over the variables ``x``, ``y`` and ``z``.
Parse errors carry the 0-based ``offset`` of the offending token.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import ParseError, SCMError

KEYWORDS = frozenset({"and", "or", "not", "true", "false"})
COMPARATORS = ("==", "!=", "<=", ">=", "<", ">")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[a-z_][a-z0-9_]*)
  | (?P<string>'[^']*')
  | (?P<op>==|!=|<=|>=|<|>|\(|\)|\+|-|\*|/|\^|,)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | keyword | string | op | eof
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == "'":
                raise ParseError.at("unterminated text literal", text, pos)
            raise ParseError.at(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind == "ident" and m.group() in KEYWORDS:
            kind = "keyword"
        if kind == "number" and m.end() < len(text) and re.match(r"[A-Za-z_]", text[m.end()]):
            raise ParseError.at("malformed number", text, m.end())
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: Union[float, int, str, bool]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Node = Union[Literal, Var, Not, And, Or, Compare, BinOp, Neg, Call]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.advance()
        return None

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError.at(f"{message}, found {found}", self.text, tok.offset)

    def expect_end(self) -> None:
        if self.peek().kind != "eof":
            raise self.error("unexpected token")

    # -- condition grammar ---------------------------------------------------

    def or_expr(self) -> Node:
        node = self.and_expr()
        while self.accept("keyword", "or"):
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> Node:
        node = self.unary()
        while self.accept("keyword", "and"):
            node = And(node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("keyword", "not"):
            return Not(self.unary())
        if self.accept("op", "("):
            node = self.or_expr()
            if not self.accept("op", ")"):
                raise self.error("expected ')'")
            return node
        return self.comparison()

    def comparison(self) -> Node:
        left = self.operand()
        tok = self.peek()
        if tok.kind == "op" and tok.text in COMPARATORS:
            self.advance()
            return Compare(tok.text, left, self.operand())
        return left

    def operand(self) -> Node:
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return Var(tok.text)
        if tok.kind == "number":
            self.advance()
            return Literal(_number(tok.text))
        if tok.kind == "op" and tok.text == "-" and self.tokens[self.i + 1].kind == "number":
            self.advance()
            return Literal(-_number(self.advance().text))
        if tok.kind == "string":
            self.advance()
            return Literal(tok.text[1:-1])
        if tok.kind == "keyword" and tok.text in ("true", "false"):
            self.advance()
            return Literal(tok.text == "true")
        raise self.error("expected operand")

    # -- arithmetic grammar --------------------------------------------------

    def sum(self) -> Node:
        node = self.product()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                node = BinOp(tok.text, node, self.product())
            else:
                return node

    def product(self) -> Node:
        node = self.signed()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                node = BinOp(tok.text, node, self.signed())
            else:
                return node

    def signed(self) -> Node:
        if self.accept("op", "-"):
            return Neg(self.signed())
        if self.accept("op", "+"):
            return self.signed()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("op", "^"):
            return BinOp("^", base, self.signed())
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Literal(_number(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.accept("op", "("):
                if tok.text not in FUNCTIONS:
                    raise ParseError.at(f"unknown function {tok.text!r}", self.text, tok.offset)
                args = [self.sum()]
                while self.accept("op", ","):
                    args.append(self.sum())
                if not self.accept("op", ")"):
                    raise self.error("expected ')'")
                return Call(tok.text, tuple(args))
            return Var(tok.text)
        if self.accept("op", "("):
            node = self.sum()
            if not self.accept("op", ")"):
                raise self.error("expected ')'")
            return node
        raise self.error("expected number, variable or '('")


def _number(text: str) -> float | int:
    if re.fullmatch(r"\d+", text):
        return int(text)
    return float(text)


def parse_condition(text: str) -> Node:
    """Parse a condition; raises :class:`ParseError` with the error offset."""
    p = _Parser(text)
    node = p.or_expr()
    p.expect_end()
    return node


def parse_arithmetic(text: str) -> Node:
    p = _Parser(text)
    node = p.sum()
    p.expect_end()
    return node


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

Value = Union[float, int, str, bool]


def _kind(v: Value) -> str:
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, (int, float)):
        return "number"
    if isinstance(v, str):
        return "text"
    raise SCMError("TYPE_ERROR", f"unsupported context value {v!r}")


def _value(node: Node, context: Mapping[str, Value]) -> Value:
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Var):
        if node.name not in context:
            raise SCMError("UNKNOWN_VARIABLE", f"variable {node.name!r} not in context",
                           variable=node.name)
        return context[node.name]
    return _truth(node, context)


def _truth(node: Node, context: Mapping[str, Value]) -> bool:
    if isinstance(node, Not):
        return not _truth(node.operand, context)
    if isinstance(node, And):
        return _truth(node.left, context) and _truth(node.right, context)
    if isinstance(node, Or):
        return _truth(node.left, context) or _truth(node.right, context)
    if isinstance(node, Compare):
        a, b = _value(node.left, context), _value(node.right, context)
        ka, kb = _kind(a), _kind(b)
        if ka != kb:
            raise SCMError("TYPE_ERROR", f"cannot compare {ka} with {kb}")
        if node.op == "==":
            return a == b
        if node.op == "!=":
            return a != b
        if ka != "number":
            raise SCMError("TYPE_ERROR", f"ordered comparison {node.op!r} on {ka}")
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[node.op]
    if isinstance(node, (Literal, Var)):
        v = _value(node, context)
        if not isinstance(v, bool):
            raise SCMError("TYPE_ERROR", f"{v!r} is not a boolean")
        return v
    raise SCMError("TYPE_ERROR", f"{type(node).__name__} is not a condition")


def evaluate_condition(expr: Node | str, context: Mapping[str, Value]) -> bool:
    """Evaluate a condition with short-circuit ``and``/``or``.

    Only ``context`` is consulted. Unknown variables raise
    ``UNKNOWN_VARIABLE``; ordered comparison of text or booleans, mixed-type
    comparison and non-boolean connective operands raise ``TYPE_ERROR``.
    """
    if isinstance(expr, str):
        expr = parse_condition(expr)
    return _truth(expr, context)


FUNCTIONS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "abs": abs, "min": min, "max": max,
}


def evaluate_arithmetic(node: Node, variables: Mapping[str, float]) -> float:
    try:
        result = _arith(node, variables)
    except (ZeroDivisionError, ValueError, OverflowError, TypeError) as exc:
        raise SCMError("EXPRESSION_ERROR", str(exc)) from exc
    if isinstance(result, bool) or not isinstance(result, (int, float)) or not math.isfinite(result):
        raise SCMError("EXPRESSION_ERROR", f"non-numeric result {result!r}")
    return float(result)


def _arith(node: Node, variables: Mapping[str, float]):
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Var):
        if node.name not in variables:
            raise SCMError("EXPRESSION_ERROR", f"unknown variable {node.name!r}")
        return variables[node.name]
    if isinstance(node, Neg):
        return -_arith(node.operand, variables)
    if isinstance(node, BinOp):
        a, b = _arith(node.left, variables), _arith(node.right, variables)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return math.pow(a, b)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](*(_arith(a, variables) for a in node.args))
    raise SCMError("EXPRESSION_ERROR", f"{type(node).__name__} is not arithmetic")
