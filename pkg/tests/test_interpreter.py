import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lolac import analyze, evaluate, load_spec
from lolac.corpus import RANGES, source
from lolac.errors import EvalError, IllFormedSpec
from lolac.harness import generate_random_trace
from lolac.interpreter import (
    MISSING,
    PENDING,
    div_trunc,
    eval_expr,
    format_firings,
    model_to_csv,
    rem_trunc,
    wrap32,
)
from lolac.traces import Trace

from specgen import spec_sources


def run(text, **cols):
    spec = load_spec(text)
    length = len(next(iter(cols.values()))) if cols else 0
    return evaluate(spec, Trace(length, cols))


def test_altitude_hand_evaluation():
    model = run(source("altitude"), altitude=[100, 150, 180, 250])
    assert model.values["tooLow"] == [True, True, False, False]
    assert model.values["tooHigh"] == [False] * 4
    assert [(k, i) for k, i, _ in model.firings] == [(0, 0), (1, 0)]


def test_recursive_pair():
    model = run("input x: Int32\noutput b: Int32 := b[-1, 0] + 1\noutput a := b + 1", x=[0, 0, 0])
    assert model.values["b"] == [1, 2, 3]
    assert model.values["a"] == [2, 3, 4]


def test_future_access_and_defaults():
    model = run("input x: Int32\noutput n := x[1, -1]\noutput p := x[-2, 9]", x=[5, 6, 7])
    assert model.values["n"] == [6, 7, -1]
    assert model.values["p"] == [9, 9, 5]


def test_backward_recursion_through_future():
    # s depends on its own future value: evaluated back to front
    model = run("input x: Int32\noutput s: Int32 := s[1, 0] + x", x=[1, 2, 3])
    assert model.values["s"] == [6, 5, 3]


@pytest.mark.parametrize(
    "a, b, q, r",
    [(7, 2, 3, 1), (-7, 2, -3, -1), (7, -2, -3, 1), (-7, -2, 3, -1), (-2147483648, -1, -2147483648, 0)],
)
def test_truncating_division(a, b, q, r):
    assert div_trunc(a, b) == q and rem_trunc(a, b) == r
    model = run("input a: Int32, b: Int32\noutput q := a / b\noutput r := a % b", a=[a], b=[b])
    assert model.values["q"] == [q] and model.values["r"] == [r]


def test_wrapping():
    assert wrap32(2**31) == -(2**31)
    model = run(
        "input a: Int32\noutput s := a + 1\noutput m := a * a\noutput n := -a\noutput b := abs(a)",
        a=[2147483647, -2147483648],
    )
    assert model.values["s"] == [-2147483648, -2147483647]
    assert model.values["m"] == [1, 0]
    assert model.values["n"] == [-2147483647, -2147483648]
    assert model.values["b"] == [2147483647, -2147483648]


def test_division_fault_reports_first_position():
    spec = load_spec("input a: Int32\noutput o := 10 / a\ntrigger o > 3 \"big\"")
    with pytest.raises(EvalError) as info:
        evaluate(spec, Trace(4, {"a": [1, 2, 0, 0]}))
    err = info.value
    assert (err.kind, err.position, err.stream) == ("division_by_zero", 2, "o")
    assert sorted(err.faults) == [("o", 2), ("o", 3)]
    assert err.partial.firings == [(0, 0, "big"), (1, 0, "big")]


def test_ite_is_lazy():
    model = run("input a: Int32\noutput o := ite(a == 0, 0, 10 / a)", a=[0, 5])
    assert model.values["o"] == [0, 2]


def test_and_or_are_strict():
    with pytest.raises(EvalError):
        run("input a: Int32\noutput o := a == 0 && 10 / a > 1", a=[1, 0])


def test_eval_expr_pending_and_boundaries():
    spec = load_spec("input a: Int32\noutput o: Int32 := a[-1, 7] + o[1, 0]")
    expr = spec.outputs[0].expr
    values = {"a": [1, 2], "o": [MISSING, MISSING]}
    assert eval_expr(expr, 0, values, 2, {}) is PENDING
    values["o"][1] = 5
    assert eval_expr(expr, 0, values, 2, {}) == 12
    assert eval_expr(expr, 1, values, 2, {}) == 1


def test_empty_trace():
    model = run(source("altitude"), altitude=[])
    assert model.values == {"tooLow": [], "tooHigh": [], "trigger_0": [], "trigger_1": []}
    assert model_to_csv(model) == "tooLow,tooHigh,trigger_0,trigger_1\n"


def test_model_csv_format():
    model = run(source("altitude"), altitude=[100, 150, 180, 250])
    text = model_to_csv(model)
    assert text.splitlines()[1] == "true,false,true,false"
    assert text.splitlines()[-1] == "# trigger,1,0,Flying below minimum altitude."
    assert format_firings(model.firings) == (
        "0,0,Flying below minimum altitude.\n1,0,Flying below minimum altitude.\n"
    )


def _tree_walk(spec, trace):
    """Reference-of-the-reference: repeated sweeps with the tree walker."""
    n = trace.length
    values = dict(trace.columns)
    for s in spec.evaluated:
        values[s.name] = [MISSING] * n
    consts = spec.constant_values()
    changed = True
    while changed:
        changed = False
        for s in spec.evaluated:
            for k in range(n):
                if values[s.name][k] is MISSING:
                    v = eval_expr(s.expr, k, values, n, consts)
                    if v is not PENDING:
                        values[s.name][k] = v
                        changed = True
    return {s.name: values[s.name] for s in spec.evaluated}


@settings(max_examples=150, deadline=None)
@given(spec_sources(max_outputs=5, division=True), st.integers(0, 12), st.integers(0, 2**32))
def test_compiled_closures_match_tree_walker(text, length, seed):
    spec = load_spec(text)
    try:
        analyze(spec)
    except IllFormedSpec:
        return
    trace = generate_random_trace(spec, seed, length, {"i0": (-4, 4), "i1": (-4, 4)})
    try:
        expected = _tree_walk(spec, trace)
    except EvalError:
        with pytest.raises(EvalError):
            evaluate(spec, trace)
        return
    try:
        model = evaluate(spec, trace)
    except EvalError:
        pytest.fail("closure evaluation faulted where the tree walker did not")
    assert model.values == expected


@settings(max_examples=100, deadline=None)
@given(spec_sources(max_outputs=5, division=True), st.integers(0, 12), st.integers(0, 2**32), st.integers(0, 99))
def test_worklist_order_is_irrelevant(text, length, seed, order_seed):
    spec = load_spec(text)
    try:
        analyze(spec)
    except IllFormedSpec:
        return
    trace = generate_random_trace(spec, seed, length, {"i0": (-4, 4), "i1": (-4, 4)})

    def outcome(rng):
        try:
            m = evaluate(spec, trace, rng)
            return ("ok", m.values, m.firings)
        except EvalError as e:
            return ("fault", e.position, e.stream, sorted(e.faults))

    assert outcome(None) == outcome(random.Random(order_seed))


@pytest.mark.parametrize("name", ["altitude", "network", "flight_phase_nodiv"])
def test_every_cell_filled_at_all_short_lengths(name, corpus_specs):
    spec, report = corpus_specs[name]
    for n in range(report.preflen + 3):
        model = evaluate(spec, generate_random_trace(spec, n, n, RANGES[name]))
        for s in spec.evaluated:
            assert len(model.values[s.name]) == n and MISSING not in model.values[s.name]
