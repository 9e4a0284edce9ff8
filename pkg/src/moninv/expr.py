"""Arithmetic expression dialect for user-declared update maps.

Grammar (whitespace insensitive)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | primary
    primary := NUMBER | IDENT | FUNC "(" expr ("," expr)+ ")" | "(" expr ")"
    IDENT   := ("x" | "u" | "d") POSITIVE_INT
    FUNC    := "min" | "max"

Identifiers are 1-based: ``x1..xn`` state coordinates, ``u1..um`` input
coordinates, ``d1..dp`` disturbance coordinates. Errors carry line and
column of the offending token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union


class ExprError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x", "u" or "d"
    index: int  # zero-based


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
    func: str
    args: tuple["Node", ...]


Node = Union[Num, Var, Neg, BinOp, Call]

_FUNCS = ("min", "max")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int) -> list[_Token]:
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        col = i + 1
        if ch in "+-*/(),":
            out.append(_Token(ch, ch, line, col))
            i += 1
        elif ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or text[j] == "." or text[j] in "eE"
                             or (text[j] in "+-" and j > i and text[j - 1] in "eE")):
                if text[j] == ".":
                    if seen_dot:
                        break
                    seen_dot = True
                j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ExprError(f"malformed numeric literal {lit!r}", line, col)
            out.append(_Token("num", lit, line, col))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(_Token("ident", text[i:j], line, col))
            i = j
        else:
            raise ExprError(f"unexpected character {ch!r}", line, col)
    out.append(_Token("end", "", line, len(text) + 1))
    return out


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str | None = None) -> _Token:
        tok = self.tokens[self.pos]
        if kind is not None and tok.kind != kind:
            raise ExprError(
                f"expected {kind!r}, found {tok.text or 'end of expression'!r}",
                tok.line,
                tok.col,
            )
        self.pos += 1
        return tok

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.take().kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().kind == "-":
            self.take()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok.kind == "ident":
            self.take()
            if tok.text in _FUNCS:
                self.take("(")
                args = [self.expr()]
                while self.peek().kind == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                if len(args) < 2:
                    raise ExprError(
                        f"{tok.text} needs at least two arguments", tok.line, tok.col
                    )
                return Call(tok.text, tuple(args))
            kind = tok.text[0]
            if kind in ("x", "u", "d") and tok.text[1:].isdigit():
                index = int(tok.text[1:])
                if index < 1:
                    raise ExprError(f"identifier {tok.text!r} is 0-based", tok.line, tok.col)
                return Var(kind, index - 1)
            raise ExprError(f"unknown identifier {tok.text!r}", tok.line, tok.col)
        raise ExprError(
            f"expected a value, found {tok.text or 'end of expression'!r}",
            tok.line,
            tok.col,
        )


def parse(text: str, line: int = 1) -> Node:
    """Parse one expression; ``line`` seeds error positions."""
    parser = _Parser(_tokenize(text, line))
    node = parser.expr()
    tok = parser.peek()
    if tok.kind != "end":
        raise ExprError(f"unexpected trailing {tok.text!r}", tok.line, tok.col)
    return node


def check_vars(node: Node, dims: dict[str, int], line: int = 1) -> None:
    """Reject identifiers outside the declared coordinate counts."""
    if isinstance(node, Var):
        limit = dims.get(node.kind, 0)
        if node.index >= limit:
            raise ExprError(
                f"identifier {node.kind}{node.index + 1} exceeds declared "
                f"{node.kind}-dimension {limit}",
                line,
                1,
            )
    elif isinstance(node, Neg):
        check_vars(node.operand, dims, line)
    elif isinstance(node, BinOp):
        check_vars(node.left, dims, line)
        check_vars(node.right, dims, line)
    elif isinstance(node, Call):
        for a in node.args:
            check_vars(a, dims, line)


def evaluate(node: Node, x: Sequence[float], u: Sequence[float], d: Sequence[float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        source = {"x": x, "u": u, "d": d}[node.kind]
        return float(source[node.index])
    if isinstance(node, Neg):
        return -evaluate(node.operand, x, u, d)
    if isinstance(node, BinOp):
        a = evaluate(node.left, x, u, d)
        b = evaluate(node.right, x, u, d)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Call):
        vals = [evaluate(a, x, u, d) for a in node.args]
        return min(vals) if node.func == "min" else max(vals)
    raise TypeError(f"not an expression node: {node!r}")


def to_source(node: Node) -> str:
    """Render a parseable form; round-trips to an equivalent evaluation."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"{node.kind}{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_source(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")
