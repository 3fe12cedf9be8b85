import pytest
from hypothesis import given, settings

from lolac.corpus import ALL, source
from lolac.errors import (
    DefaultTypeError,
    LexError,
    ParseError,
    SpecNameError,
    SpecTypeError,
)
from lolac.frontend import format_spec, load_spec, parse_source, tokenize
from lolac.frontend.syntax import Binary, Ite, Literal, StreamAccess, Type, Unary

from specgen import spec_sources


def kinds(text):
    return [(t.kind, t.text) for t in tokenize(text)][:-1]


def test_alternate_spellings_normalise():
    assert kinds("a & b ∧ c | d ∨ e") == kinds("a && b && c || d || e")
    assert kinds("x = y") == kinds("x == y")
    assert kinds("¬p") == kinds("!p")
    assert ("punct", ":=") in kinds("output a := 1")


def test_comments_and_strings():
    toks = tokenize('// nothing here\ntrigger x "a \\"quoted\\" msg"')
    assert [t.kind for t in toks] == ["kw", "ident", "str", "eof"]
    assert toks[2].value == 'a "quoted" msg'
    assert toks[1].span.line == 2


@pytest.mark.parametrize("bad", ['trigger x "open', "output a := 1$", "output a := 12abc"])
def test_lex_errors(bad):
    with pytest.raises(LexError):
        tokenize(bad)


def test_precedence():
    raw = parse_source("input a: Int32\noutput o := a + 2 * 3 < 7 || !(a == 1) && true")
    e = raw.declarations[1].expr
    assert isinstance(e, Binary) and e.op == "or"
    left, right = e.left, e.right
    assert left.op == "<" and left.left.op == "+" and left.left.right.op == "*"
    assert right.op == "and" and isinstance(right.left, Unary)


def test_access_forms():
    raw = parse_source("input a: Int32\noutput o := a[-2, 7] + a[1, -3] + a")
    e = raw.declarations[1].expr
    first = e.left.left
    assert first == StreamAccess("a", -2, Literal(7))
    assert e.left.right.default == Literal(-3)
    assert e.right.name == "a"


def test_if_then_else_and_ite_agree():
    a = load_spec("input x: Int32\noutput o := if x > 0 then 1 else 2")
    b = load_spec("input x: Int32\noutput o := ite(x > 0, 1, 2)")
    assert isinstance(a.outputs[0].expr, Ite)
    assert a.outputs[0].expr == b.outputs[0].expr


@pytest.mark.parametrize(
    "text",
    [
        "output o := ",
        "input : Int32",
        "output o := a[1]",
        "output o := (1",
        "trigger",
        "output o := a[x, 0]",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_source("input a: Int32\n" + text)


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_source("input a: Int32\noutput o := a +")
    assert info.value.span.line == 2
    assert "error" in info.value.format("x.lola") and info.value.format("x.lola").startswith("x.lola:2:")


@pytest.mark.parametrize("name", ALL)
def test_corpus_round_trip(name):
    raw = parse_source(source(name))
    again = parse_source(format_spec(raw))
    assert again == raw
    assert format_spec(again) == format_spec(raw)


@settings(max_examples=60, deadline=None)
@given(spec_sources(division=True))
def test_random_round_trip(text):
    raw = parse_source(text)
    assert parse_source(format_spec(raw)) == raw


def test_types_inferred():
    spec = load_spec(source("network"))
    assert spec.type_of("count") is Type.INT32
    assert spec.type_of("trigger_0") is Type.BOOL
    assert [t.index for t in spec.triggers] == [0, 1, 2]
    assert [s.name for s in spec.evaluated][:3] == ["count", "receiver", "trigger_0"]


def test_recursive_inference_uses_default():
    spec = load_spec("output c := c[-1, 0] + 1\noutput f := f[-1, false] || true")
    assert spec.type_of("c") is Type.INT32 and spec.type_of("f") is Type.BOOL


def test_constants_fold():
    from lolac.frontend import fold_constants

    spec = load_spec("constant k: Int32 := 5\ninput a: Int32\noutput o := a + k")
    folded = fold_constants(spec.outputs[0].expr, spec.constant_values())
    assert isinstance(folded.right, Literal) and folded.right.value == 5


@pytest.mark.parametrize(
    "text, exc",
    [
        ("input a: Int32\noutput a := 1", SpecNameError),
        ("output o := q", SpecNameError),
        ("output min := 1", SpecNameError),
        ("output trigger_0 := true", SpecNameError),
        ("input a: Int32\noutput o: Bool := a", SpecTypeError),
        ("input a: Int32\noutput o := a[-1, true]", DefaultTypeError),
        ("input a: Bool\noutput o := a + 1", SpecTypeError),
        ("input a: Int32\ntrigger a \"x\"", SpecTypeError),
        ("input a: Int32, b: Bool\noutput o := a == b", SpecTypeError),
        ("output o := ite(true, 1, false)", SpecTypeError),
        ("output o := 3000000000", SpecTypeError),
        ("constant k: Int32 := 1\noutput o := k[-1, 0]", SpecNameError),
        ("output o := min(1)", SpecTypeError),
    ],
)
def test_rejections(text, exc):
    with pytest.raises(exc):
        load_spec(text)


def test_int32_min_literal():
    spec = load_spec("output o := -2147483648")
    assert spec.outputs[0].expr.value == -2147483648
