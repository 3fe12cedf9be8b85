"""Lexing, parsing, and type checking of Lola specifications."""

from .lexer import Token, tokenize
from .parser import parse, parse_source
from .syntax import RawSpec, Type, format_expr, format_spec
from .typecheck import TypedSpec, fold_constants, resolve_and_typecheck


def load_spec(source: str) -> TypedSpec:
    """Source text straight to a TypedSpec."""
    return resolve_and_typecheck(parse_source(source))


__all__ = [
    "RawSpec",
    "Token",
    "Type",
    "TypedSpec",
    "fold_constants",
    "format_expr",
    "format_spec",
    "load_spec",
    "parse",
    "parse_source",
    "resolve_and_typecheck",
    "tokenize",
]
