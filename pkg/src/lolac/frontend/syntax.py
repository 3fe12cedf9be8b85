"""AST node definitions and the canonical pretty-printer."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union


class Type(enum.Enum):
    INT32 = "Int32"
    BOOL = "Bool"

    def __str__(self) -> str:
        return self.value

    @property
    def size(self) -> int:
        return 4 if self is Type.INT32 else 1


INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOWHERE = Span(0, 0)


# Expressions.  `ty` is None in the raw tree and filled in by the type checker.
# Spans never take part in equality so that round-trip comparisons are structural.


@dataclass(frozen=True)
class Literal:
    value: Union[int, bool]
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Name:
    """Bare identifier as written; resolved to ConstRef or StreamAccess."""

    name: str
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class ConstRef:
    name: str
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class StreamAccess:
    stream: str
    offset: int = 0
    default: Optional[Literal] = None
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" | "not"
    operand: "Expr"
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Ite:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Call:
    fn: str  # min | max | abs | int
    args: tuple
    span: Span = field(default=NOWHERE, compare=False)
    ty: Optional[Type] = None


Expr = Union[Literal, Name, ConstRef, StreamAccess, Unary, Binary, Ite, Call]

ARITHMETIC = ("+", "-", "*", "/", "%")
COMPARISON = ("<", "<=", ">", ">=")
EQUALITY = ("==", "!=")
LOGICAL = ("and", "or")
BUILTINS = {"min": 2, "max": 2, "abs": 1, "int": 1}


# Declarations.


@dataclass(frozen=True)
class InputDecl:
    names: tuple
    type: Type
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class ConstDecl:
    name: str
    type: Type
    value: Literal
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class OutputDecl:
    name: str
    type: Optional[Type]
    expr: Expr
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class TriggerDecl:
    expr: Expr
    message: Optional[str] = None
    span: Span = field(default=NOWHERE, compare=False)


Decl = Union[InputDecl, ConstDecl, OutputDecl, TriggerDecl]


@dataclass(frozen=True)
class RawSpec:
    declarations: tuple = ()


def children(expr):
    """Direct sub-expressions of `expr` (defaults are not sub-expressions)."""
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, Binary):
        return (expr.left, expr.right)
    if isinstance(expr, Ite):
        return (expr.cond, expr.then, expr.orelse)
    if isinstance(expr, Call):
        return expr.args
    return ()


def walk(expr):
    """Pre-order traversal."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def accesses(expr):
    """All StreamAccess nodes of `expr` in source order."""
    return [n for n in walk(expr) if isinstance(n, StreamAccess)]


# Pretty-printing.  Output is canonical: `&&`, `||`, `==`, if-then-else, and
# every compound operand parenthesized, which keeps re-parsing trivially exact.

_SURFACE = {"and": "&&", "or": "||"}


def format_literal(lit: Literal) -> str:
    if isinstance(lit.value, bool):
        return "true" if lit.value else "false"
    return str(lit.value)


def format_expr(expr, top: bool = True) -> str:
    if isinstance(expr, Literal):
        return format_literal(expr)
    if isinstance(expr, (Name, ConstRef)):
        return expr.name
    if isinstance(expr, StreamAccess):
        if expr.default is None and expr.offset == 0:
            return expr.stream
        default = format_literal(expr.default) if expr.default is not None else "0"
        return f"{expr.stream}[{expr.offset}, {default}]"
    if isinstance(expr, Unary):
        sym = "-" if expr.op == "neg" else "!"
        inner = format_expr(expr.operand, top=False)
        # keep "- 5" from re-lexing as the literal -5
        if sym == "-" and isinstance(expr.operand, Literal):
            inner = f"({inner})"
        return sym + inner
    if isinstance(expr, Binary):
        text = f"{format_expr(expr.left, False)} {_SURFACE.get(expr.op, expr.op)} {format_expr(expr.right, False)}"
        return text if top else f"({text})"
    if isinstance(expr, Ite):
        text = f"if {format_expr(expr.cond)} then {format_expr(expr.then)} else {format_expr(expr.orelse)}"
        return text if top else f"({text})"
    if isinstance(expr, Call):
        return f"{expr.fn}({', '.join(format_expr(a) for a in expr.args)})"
    raise TypeError(f"not an expression: {expr!r}")


def _quote(message: str) -> str:
    return '"' + message.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def format_decl(decl) -> str:
    if isinstance(decl, InputDecl):
        return f"input {', '.join(decl.names)}: {decl.type}"
    if isinstance(decl, ConstDecl):
        return f"constant {decl.name}: {decl.type} := {format_literal(decl.value)}"
    if isinstance(decl, OutputDecl):
        annot = f": {decl.type}" if decl.type is not None else ""
        return f"output {decl.name}{annot} := {format_expr(decl.expr)}"
    if isinstance(decl, TriggerDecl):
        msg = f" {_quote(decl.message)}" if decl.message is not None else ""
        return f"trigger {format_expr(decl.expr)}{msg}"
    raise TypeError(f"not a declaration: {decl!r}")


def format_spec(spec: RawSpec) -> str:
    return "".join(format_decl(d) + "\n" for d in spec.declarations)
