"""Rust rendering of types, literals, identifiers, and expressions."""

from __future__ import annotations

from ..frontend.syntax import Binary, Call, Ite, Literal, StreamAccess, Type, Unary, walk

RUST_KEYWORDS = frozenset(
    """as async await break const continue crate dyn else enum extern false fn for if impl in let loop
    match mod move mut pub ref return self Self static struct super trait true type unsafe use where
    while abstract become box do final macro override priv typeof unsized virtual yield try gen union""".split()
)


def rust_type(ty: Type) -> str:
    return "i32" if ty is Type.INT32 else "bool"


def rust_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return f"({value}i32)" if value < 0 else f"{value}i32"


def rust_string(text: str | None) -> str:
    out = []
    for ch in text or "":
        if ch in '"\\':
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "{" or ch == "}":
            out.append(ch)
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{{{ord(ch):x}}}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def field_names(names) -> dict:
    """Rust-safe field identifiers, unique per stream."""
    taken = set()
    result = {}
    for name in names:
        ident = name
        while ident in RUST_KEYWORDS or ident in taken or ident.startswith("r#"):
            ident += "_"
        taken.add(ident)
        result[name] = ident
    return result


def has_division(expr) -> bool:
    return any(isinstance(n, Binary) and n.op in ("/", "%") for n in walk(expr))


class ExprTranslator:
    """Translates a typed expression; stream accesses go through `access`."""

    def __init__(self, access, division: str = "checked"):
        self.access = access
        self.division = division
        self.reads = 0

    def __call__(self, expr) -> str:
        if isinstance(expr, Literal):
            return rust_literal(expr.value)
        if isinstance(expr, StreamAccess):
            return self.access(expr)
        if isinstance(expr, Unary):
            inner = self(expr.operand)
            return f"i32::wrapping_neg({inner})" if expr.op == "neg" else f"(!{inner})"
        if isinstance(expr, Ite):
            return f"(if {self(expr.cond)} {{ {self(expr.then)} }} else {{ {self(expr.orelse)} }})"
        if isinstance(expr, Call):
            args = [self(a) for a in expr.args]
            if expr.fn == "min":
                return f"std::cmp::min({args[0]}, {args[1]})"
            if expr.fn == "max":
                return f"std::cmp::max({args[0]}, {args[1]})"
            if expr.fn == "abs":
                return f"i32::wrapping_abs({args[0]})"
            return f"i32::from({args[0]})"
        if isinstance(expr, Binary):
            a, b = self(expr.left), self(expr.right)
            op = expr.op
            if op in ("+", "-", "*"):
                fn = {"+": "wrapping_add", "-": "wrapping_sub", "*": "wrapping_mul"}[op]
                return f"i32::{fn}({a}, {b})"
            if op in ("/", "%"):
                fn = "div" if op == "/" else "rem"
                if self.division == "checked":
                    return f"{fn}_i32({a}, {b})?"
                return f"ghost_{fn}({a}, {b})"
            if op == "and":
                return f"({a} & {b})"
            if op == "or":
                return f"({a} | {b})"
            return f"({a} {op} {b})"
        raise TypeError(f"unexpected node {expr!r}")
