"""Tokenizer for Lola specification text."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import LexError
from .syntax import Span

KEYWORDS = frozenset({"input", "output", "trigger", "constant", "if", "then", "else", "true", "false"})

# Longest match first.  Alternative surface forms are normalized here so the
# parser only ever sees one spelling per operator.
_PUNCT = [
    (":=", ":="),
    ("&&", "&&"),
    ("||", "||"),
    ("==", "=="),
    ("!=", "!="),
    ("<=", "<="),
    (">=", ">="),
    ("&", "&&"),
    ("|", "||"),
    ("∧", "&&"),
    ("∨", "||"),
    ("¬", "!"),
    ("=", "=="),
    ("<", "<"),
    (">", ">"),
    ("!", "!"),
    ("+", "+"),
    ("-", "-"),
    ("*", "*"),
    ("/", "/"),
    ("%", "%"),
    (":", ":"),
    (",", ","),
    ("[", "["),
    ("]", "]"),
    ("(", "("),
    (")", ")"),
]

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # "kw" | "ident" | "int" | "str" | "punct" | "eof"
    text: str
    span: Span
    value: object = None

    def __str__(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "str":
            return f'string "{self.value}"'
        return f"'{self.text}'"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line, col = 1, 1
    n = len(source)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        span = Span(line, col)
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, span))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and (source[j].isalpha() or source[j] == "_"):
                raise LexError(f"malformed number {source[i:j + 1]!r}", span)
            tokens.append(Token("int", source[i:j], span, int(source[i:j])))
            advance(j - i)
            continue
        if ch == '"':
            j = i + 1
            chars = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError("unterminated string", span)
                c = source[j]
                if c == '"':
                    break
                if c == "\\":
                    if j + 1 >= n or source[j + 1] not in _ESCAPES:
                        raise LexError("invalid escape sequence in string", span)
                    chars.append(_ESCAPES[source[j + 1]])
                    j += 2
                    continue
                chars.append(c)
                j += 1
            tokens.append(Token("str", source[i:j + 1], span, "".join(chars)))
            advance(j + 1 - i)
            continue
        for text, canon in _PUNCT:
            if source.startswith(text, i):
                tokens.append(Token("punct", canon, span))
                advance(len(text))
                break
        else:
            raise LexError(f"illegal character {ch!r}", span)
    tokens.append(Token("eof", "", Span(line, col)))
    return tokens
