"""Recursive-descent parser producing a RawSpec."""

from __future__ import annotations

from ..errors import ParseError
from .lexer import Token, tokenize
from .syntax import (
    BUILTINS,
    Binary,
    Call,
    ConstDecl,
    InputDecl,
    Ite,
    Literal,
    Name,
    OutputDecl,
    RawSpec,
    StreamAccess,
    TriggerDecl,
    Type,
    Unary,
)

# binding power per binary operator; higher binds tighter
_BINARY = {
    "||": (1, "or"),
    "&&": (2, "and"),
    "<": (3, "<"),
    "<=": (3, "<="),
    ">": (3, ">"),
    ">=": (3, ">="),
    "==": (3, "=="),
    "!=": (3, "!="),
    "+": (4, "+"),
    "-": (4, "-"),
    "*": (5, "*"),
    "/": (5, "/"),
    "%": (5, "%"),
}

_DECL_START = {"input", "output", "trigger", "constant"}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.tok
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, text):
            raise ParseError(self.tok.span, what or (f"'{text}'" if text else kind), str(self.tok))
        return self.next()

    # declarations

    def parse_spec(self) -> RawSpec:
        decls = []
        while not self.at("eof"):
            decls.extend(self.parse_decl())
        return RawSpec(tuple(decls))

    def parse_decl(self):
        tok = self.tok
        if not (tok.kind == "kw" and tok.text in _DECL_START):
            raise ParseError(tok.span, "a declaration (input, output, trigger, constant)", str(tok))
        self.next()
        if tok.text == "input":
            return self.parse_inputs(tok)
        if tok.text == "constant":
            name = self.expect("ident", what="constant name")
            self.expect("punct", ":")
            ty = self.parse_type()
            self.expect("punct", ":=")
            return [ConstDecl(name.text, ty, self.parse_literal(), tok.span)]
        if tok.text == "output":
            name = self.expect("ident", what="output name")
            ty = None
            if self.at("punct", ":"):
                self.next()
                ty = self.parse_type()
            self.expect("punct", ":=")
            return [OutputDecl(name.text, ty, self.parse_expr(), tok.span)]
        expr = self.parse_expr()
        message = None
        if self.at("str"):
            message = self.next().value
        return [TriggerDecl(expr, message, tok.span)]

    def parse_inputs(self, start: Token):
        # `input a, b: Int32` and `input a: Bool, b: Bool` are both accepted;
        # each `names : type` group becomes its own InputDecl.
        decls = []
        span = start.span
        while True:
            names = [self.expect("ident", what="input name").text]
            while self.at("punct", ","):
                self.next()
                names.append(self.expect("ident", what="input name").text)
            self.expect("punct", ":")
            decls.append(InputDecl(tuple(names), self.parse_type(), span))
            if not self.at("punct", ","):
                return decls
            self.next()
            span = self.tok.span

    def parse_type(self) -> Type:
        tok = self.expect("ident", what="type (Int32 or Bool)")
        try:
            return Type(tok.text)
        except ValueError:
            raise ParseError(tok.span, "type (Int32 or Bool)", str(tok)) from None

    def parse_literal(self) -> Literal:
        tok = self.tok
        if self.at("kw", "true") or self.at("kw", "false"):
            self.next()
            return Literal(tok.text == "true", tok.span)
        sign = 1
        if self.at("punct", "-"):
            self.next()
            sign = -1
        num = self.expect("int", what="literal")
        return Literal(sign * num.value, tok.span)

    def parse_signed_int(self) -> int:
        sign = 1
        if self.at("punct", "-"):
            self.next()
            sign = -1
        elif self.at("punct", "+"):
            self.next()
        return sign * self.expect("int", what="integer offset").value

    # expressions

    def parse_expr(self, min_bp: int = 0):
        if self.at("kw", "if") and min_bp == 0:
            return self.parse_if()
        left = self.parse_unary()
        while True:
            tok = self.tok
            if tok.kind != "punct" or tok.text not in _BINARY:
                return left
            bp, op = _BINARY[tok.text]
            if bp <= min_bp:
                return left
            self.next()
            right = self.parse_expr(bp)
            left = Binary(op, left, right, tok.span)

    def parse_if(self):
        start = self.next()
        cond = self.parse_expr()
        self.expect("kw", "then")
        then = self.parse_expr()
        self.expect("kw", "else")
        return Ite(cond, then, self.parse_expr(), start.span)

    def parse_unary(self):
        tok = self.tok
        if self.at("punct", "-"):
            self.next()
            if self.at("int"):
                return Literal(-self.next().value, tok.span)
            return Unary("neg", self.parse_unary(), tok.span)
        if self.at("punct", "!"):
            self.next()
            return Unary("not", self.parse_unary(), tok.span)
        return self.parse_primary()

    def parse_primary(self):
        tok = self.tok
        if tok.kind == "int":
            self.next()
            return Literal(tok.value, tok.span)
        if tok.kind == "kw" and tok.text in ("true", "false"):
            self.next()
            return Literal(tok.text == "true", tok.span)
        if tok.kind == "kw" and tok.text == "if":
            return self.parse_if()
        if self.at("punct", "("):
            self.next()
            inner = self.parse_expr()
            self.expect("punct", ")")
            return inner
        if tok.kind == "ident":
            self.next()
            if self.at("punct", "(") and (tok.text in BUILTINS or tok.text == "ite"):
                return self.parse_call(tok)
            if self.at("punct", "["):
                self.next()
                offset = self.parse_signed_int()
                self.expect("punct", ",")
                default = self.parse_literal()
                self.expect("punct", "]")
                return StreamAccess(tok.text, offset, default, tok.span)
            return Name(tok.text, tok.span)
        raise ParseError(tok.span, "an expression", str(tok))

    def parse_call(self, name: Token):
        self.expect("punct", "(")
        args = [self.parse_expr()]
        while self.at("punct", ","):
            self.next()
            args.append(self.parse_expr())
        close = self.expect("punct", ")")
        if name.text == "ite":
            if len(args) != 3:
                raise ParseError(close.span, "3 arguments to ite", f"{len(args)}")
            return Ite(args[0], args[1], args[2], name.span)
        return Call(name.text, tuple(args), name.span)


def parse(tokens: list[Token]) -> RawSpec:
    return Parser(tokens).parse_spec()


def parse_source(source: str) -> RawSpec:
    return parse(tokenize(source))
