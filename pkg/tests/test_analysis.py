"""Analysis checked against brute-force enumeration of paths and cycles."""

import pytest
from hypothesis import given, settings

from lolac import analyze, load_spec
from lolac.analysis import build_dependency_graph, check_well_formed, lint
from lolac.corpus import source
from lolac.errors import DivisionByZeroLiteral, IllFormedSpec

from specgen import spec_sources


def simple_paths(graph, start):
    """Every simple path from `start` as a list of edges (including the empty path)."""
    out = []

    def walk(node, seen, path):
        out.append(list(path))
        for e in graph.edges:
            if e.accessor == node and e.accessed not in seen:
                path.append(e)
                walk(e.accessed, seen | {e.accessed}, path)
                path.pop()

    walk(start, {start}, [])
    return out


def simple_cycles(graph):
    cycles = []
    order = {n: i for i, n in enumerate(graph.nodes)}
    for start in graph.nodes:
        def walk(node, seen, path):
            for e in graph.edges:
                if e.accessor != node:
                    continue
                if e.accessed == start:
                    cycles.append(path + [e])
                elif e.accessed not in seen and order[e.accessed] > order[start]:
                    walk(e.accessed, seen | {e.accessed}, path + [e])

        walk(start, {start}, [])
    return cycles


def brute_shifts(graph):
    return {n: max(0, max(sum(e.offset for e in p) for p in simple_paths(graph, n))) for n in graph.nodes}


def brute_facts(spec):
    graph = build_dependency_graph(spec)
    cycles = simple_cycles(graph)
    if any(sum(e.offset for e in c) > 0 for c in cycles):
        return {"verdict": "positive_cycle"}
    shift = brute_shifts(graph)
    dist = {e: shift[e.accessor] - e.offset - shift[e.accessed] for e in graph.edges}
    if any(all(dist[e] == 0 for e in c) for c in cycles):
        return {"verdict": "zero_sync_cycle"}
    memreq = {n: max([dist[e] for e in graph.edges if e.accessed == n], default=0) for n in graph.nodes}
    zero = [e for e in graph.edges if dist[e] == 0 and graph.kinds[e.accessed] != "input"]

    def chain(n):  # longest chain of zero-distance edges below n
        return max([1 + chain(e.accessed) for e in zero if e.accessor == n], default=0)

    layer = {n: chain(n) + 1 for n in graph.nodes if graph.kinds[n] != "input"}
    return {
        "verdict": "ok",
        "shift": shift,
        "memreq": memreq,
        "layer": layer,
        "preflen": max([shift[n] + memreq[n] for n in graph.nodes], default=0),
        "postlen": max(shift.values(), default=0),
        "dist": dist,
    }


@settings(max_examples=300, deadline=None)
@given(spec_sources(max_outputs=6))
def test_analysis_matches_brute_force(text):
    spec = load_spec(text)
    facts = brute_facts(spec)
    verdict = check_well_formed(build_dependency_graph(spec))
    if facts["verdict"] != "ok":
        assert not verdict.ok
        witness = verdict.errors[0]
        assert witness.kind == facts["verdict"]
        # the witness is a genuine closed walk of the right weight
        edges = witness.edges
        assert all(a.accessed == b.accessor for a, b in zip(edges, edges[1:] + edges[:1]))
        if witness.kind == "positive_cycle":
            assert witness.weight > 0
        else:
            assert all(e.distance == 0 for e in edges)
        with pytest.raises(IllFormedSpec):
            analyze(spec)
        return
    assert verdict.ok
    report = analyze(spec)
    assert report.shift == facts["shift"]
    assert report.memreq == facts["memreq"]
    assert report.slots == {n: m + 1 for n, m in facts["memreq"].items()}
    assert report.layer == facts["layer"]
    assert (report.preflen, report.postlen) == (facts["preflen"], facts["postlen"])
    # every synchronized distance is non-negative
    assert all(e.distance >= 0 for e in report.sync_edges)
    # the total order respects layers and declaration order within a layer
    decl = [s.name for s in spec.evaluated]
    assert report.total_order == sorted(decl, key=lambda n: (report.layer[n], decl.index(n)))
    size = {"Int32": 4, "Bool": 1}
    assert report.memcon == sum(report.slots[n] * size[str(report.types[n])] for n in report.graph.nodes)


def test_altitude_values(corpus_specs):
    spec, r = corpus_specs["altitude"]
    assert r.shift == {"altitude": 0, "tooLow": 1, "tooHigh": 1, "trigger_0": 1, "trigger_1": 1}
    assert r.memreq["altitude"] == 2 and r.slots["altitude"] == 3
    assert (r.preflen, r.postlen) == (2, 1)
    assert r.layers == [["tooLow", "tooHigh"], ["trigger_0", "trigger_1"]]
    # tooLow reads altitude at offsets -1, 0, +1: distances 2, 1, 0
    d = sorted(e.distance for e in r.sync_edges if e.accessor == "tooLow")
    assert d == [0, 1, 2]
    assert r.memcon == 3 * 4 + 4 * 1


def test_network_values(corpus_specs):
    spec, r = corpus_specs["network"]
    assert set(r.shift.values()) == {0}
    assert r.layers == [
        ["count", "received", "opened", "closed"],
        ["receiver", "workload", "trigger_2"],
        ["trigger_0", "trigger_1"],
    ]
    assert (r.preflen, r.postlen) == (2, 0)
    assert r.slots["receiver"] == 3


def test_adapted_altitude_has_no_postfix(corpus_specs):
    _, r = corpus_specs["altitude_adapted"]
    assert (r.preflen, r.postlen) == (2, 0)
    assert set(r.shift.values()) == {0}


def test_flight_phase_lengths(corpus_specs):
    for name in ("flight_phase", "flight_phase_nodiv"):
        _, r = corpus_specs[name]
        assert (r.preflen, r.postlen) == (1, 0)


def test_positive_cycle_witness():
    with pytest.raises(IllFormedSpec) as info:
        analyze(load_spec("output a: Int32 := a[1, 0]"))
    (w,) = info.value.verdict.errors
    assert w.kind == "positive_cycle" and w.weight == 1 and w.nodes == ["a"]


def test_zero_sync_cycle_witness():
    spec = load_spec("output a: Int32 := b\noutput b: Int32 := a")
    verdict = check_well_formed(build_dependency_graph(spec))
    (w,) = verdict.errors
    assert w.kind == "zero_sync_cycle" and sorted(w.nodes) == ["a", "b"]


def test_untyped_zero_cycle_is_structural():
    with pytest.raises(IllFormedSpec) as info:
        load_spec("output a := b\noutput b := a")
    assert info.value.verdict.errors[0].kind == "zero_sync_cycle"


def test_self_recursion_is_fine():
    r = analyze(load_spec("output b: Int32 := b[-1, 0] + 1\noutput a := b + 1"))
    assert r.memreq["b"] == 1 and r.shift == {"a": 0, "b": 0}


def test_empty_spec():
    r = analyze(load_spec(""))
    assert (r.preflen, r.postlen, r.memcon) == (0, 0, 0)
    assert r.layers == []


def test_flight_phase_division_lints():
    warnings = [l for l in lint(load_spec(source("flight_phase"))) if l.code == "possible-division-by-zero"]
    assert len(warnings) >= 2
    assert any("1 / (time - time[-1, 0])" in l.message for l in warnings)
    assert not [l for l in lint(load_spec(source("flight_phase_nodiv"))) if l.code == "possible-division-by-zero"]


def test_literal_denominators():
    quiet = lint(load_spec("input a: Int32\noutput o := a / 2 + a % -3\noutput p := o"))
    assert not [l for l in quiet if l.code == "possible-division-by-zero"]
    with pytest.raises(DivisionByZeroLiteral):
        lint(load_spec("input a: Int32\noutput o := a / 0"))
    with pytest.raises(DivisionByZeroLiteral):
        analyze(load_spec("constant z: Int32 := 0\ninput a: Int32\noutput o := a % z"))


def test_unused_stream_lint(corpus_specs):
    _, r = corpus_specs["network"]
    assert [l.stream for l in r.lints if l.code == "unused-stream"] == ["received"]


def test_report_json_schema(corpus_specs):
    _, r = corpus_specs["altitude"]
    doc = r.to_json()
    assert set(doc) == {"streams", "edges", "preflen", "postlen", "memcon_bytes", "lints"}
    alt = next(s for s in doc["streams"] if s["name"] == "altitude")
    assert alt == {
        "name": "altitude", "kind": "input", "type": "Int32", "shift": 0, "layer": 0,
        "memreq": 2, "slots": 3, "outgoing_memreq": 0,
    }
