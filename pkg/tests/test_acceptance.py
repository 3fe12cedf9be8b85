"""Acceptance criteria 1-9; each test records one PASS/FAIL line.

The lines are printed in the "acceptance criteria" section at the end of
the pytest run.  Criterion 10 (external verifier runs) is out of scope.
"""

import json
import re
import time

import pytest

from lolac import analyze, evaluate, load_spec
from lolac.cli import main
from lolac.codegen import CodegenOptions, emit_annotations, generate, render_annotations
from lolac.corpus import CORPUS, RANGES, source
from lolac.harness import DifftestConfig, RandomTraces, bench, memory_profile, run_difftest
from lolac.traces import Trace

from conftest import GOLDEN, needs_toolchain
from structural import growable_outside_ghost, memory_fields

pytestmark = pytest.mark.acceptance


def test_criterion_1_analysis_values(criterion):
    start = time.perf_counter()
    alt = analyze(load_spec(source("altitude")))
    net = analyze(load_spec(source("network")))
    elapsed = time.perf_counter() - start
    got = {
        "shift(tooLow)": alt.shift["tooLow"],
        "shift(tooHigh)": alt.shift["tooHigh"],
        "memreq(altitude)": alt.memreq["altitude"],
        "slots(altitude)": alt.slots["altitude"],
        "preflen(altitude)": alt.preflen,
        "postlen(altitude)": alt.postlen,
        "max shift(network)": max(net.shift.values()),
        "layers(network)": len(net.layers),
        "preflen(network)": net.preflen,
        "postlen(network)": net.postlen,
    }
    want = dict(zip(got, [1, 1, 2, 3, 2, 1, 0, 3, 2, 0]))
    ok = got == want and elapsed < 1.0
    criterion(1, ok, f"{got} in {elapsed * 1000:.1f} ms")
    assert ok


def test_criterion_2_interpreter_oracle(criterion):
    spec = load_spec(source("altitude"))
    model = evaluate(spec, Trace(4, {"altitude": [100, 150, 180, 250]}))
    fired = [(k, i) for k, i, _ in model.firings]
    ok = fired == [(0, 0), (1, 0)]
    criterion(2, ok, f"firings (position, trigger) = {fired}")
    assert ok


@pytest.fixture(scope="module")
def corpus_difftest(tmp_path_factory):
    """One run per corpus spec over 200 seeded traces and all three builds."""
    reports = {}
    start = time.perf_counter()
    for name in CORPUS:
        cfg = DifftestConfig(
            spec_source=source(name),
            spec_name=name,
            parallel=True,
            annotations=True,
            workdir=tmp_path_factory.mktemp(name),
            timing_repetitions=3,
            random=RandomTraces(seed=2024, count=200, max_len=100, ranges=RANGES[name]),
        )
        reports[name] = run_difftest(cfg)
    return reports, time.perf_counter() - start


def _variant_summary(reports, variant):
    parts, ok = [], True
    for name, rep in reports.items():
        cases = [c for c in rep.cases if c.variant == variant]
        agree = sum(c.agrees for c in cases)
        faults = sum(c.verdict == "runtime_fault" for c in cases)
        ok = ok and len(cases) == 200 and agree == 200
        parts.append(f"{name} {agree}/{len(cases)}" + (f" ({faults} identical faults)" if faults else ""))
    return ok, "; ".join(parts)


@needs_toolchain
def test_criterion_3_differential_equivalence(corpus_difftest, criterion):
    reports, elapsed = corpus_difftest
    ok, detail = _variant_summary(reports, "sequential")
    lengths = sorted({c.length for r in reports.values() for c in r.cases})
    covered = all(n in lengths for n in range(max(r.preflen for r in reports.values()) + 1))
    ok = ok and covered and elapsed < 600
    criterion(3, ok, f"{detail}; lengths {lengths[0]}..{lengths[-1]}; {elapsed:.0f} s for all builds")
    assert ok


@needs_toolchain
def test_criterion_4_parallel_equivalence(corpus_difftest, criterion):
    reports, _ = corpus_difftest
    ok, detail = _variant_summary(reports, "parallel")
    diverged = sum(len(r.variant_divergence) for r in reports.values())
    ok = ok and diverged == 0
    criterion(4, ok, f"{detail}; traces where a variant differs from sequential: {diverged}")
    assert ok


def _flight_trace(n):
    zeros = [0] * n
    # strictly increasing time keeps every denominator non-zero
    return Trace(n, {"time_s": list(range(1, n + 1)), "time_micros": zeros, "velo_x": zeros,
                     "velo_y": zeros, "velo_r_x": zeros, "velo_r_y": zeros})


@needs_toolchain
def test_criterion_5_constant_memory(criterion):
    structural, growth = [], {}
    for name in CORPUS:
        spec = load_spec(source(name))
        report = analyze(spec)
        text = generate(spec, report, CodegenOptions(), name).source_text
        fields = memory_fields(text)
        sized = sorted(fields.values()) == sorted(report.slots.values()) and len(fields) == len(report.slots)
        structural.append(sized and not growable_outside_ghost(text))
        mem = memory_profile(spec, 10**5, 10**6, ranges=RANGES[name], name=name,
                             trace_factory=_flight_trace if name == "flight_phase" else None)
        growth[name] = (mem.short_kb, mem.long_kb, mem.growth)
    ok = all(structural) and all(g <= 0.05 for _, _, g in growth.values())
    detail = ", ".join(f"{n} {a}->{b} KiB ({g:+.1%})" for n, (a, b, g) in growth.items())
    criterion(5, ok, f"structural {sum(structural)}/{len(structural)}; peak RSS 1e5->1e6: {detail}")
    assert ok


@needs_toolchain
def test_criterion_6_performance_direction(criterion):
    start = time.perf_counter()
    results = []
    for name in ("altitude_adapted", "network"):
        spec = load_spec(source(name))
        results.append(bench(spec, 10**6, repetitions=5, interpreter_repetitions=3, ranges=RANGES[name], name=name))
    elapsed = time.perf_counter() - start
    ok = all(r.ratio >= 10 for r in results) and elapsed < 300
    detail = "; ".join(f"{r.spec_name} interp {r.interpreter_ns:.0f} ns/ev, monitor {r.monitor_ns:.1f} ns/ev, {r.ratio:.0f}x"
                       for r in results)
    criterion(6, ok, f"{detail}; {elapsed:.0f} s")
    assert ok


def test_criterion_7_division_lints(capsys, criterion):
    code = main(["check", "flight_phase"])
    out = capsys.readouterr().out
    warnings = [l for l in out.splitlines() if "warning[possible-division-by-zero]" in l]
    normal = [re.sub(r"\s+", "", l) for l in warnings]
    cites = any("1/(time-time[-1,0])" in l for l in normal)
    ok = code == 0 and len(warnings) >= 2 and cites
    criterion(7, ok, f"{len(warnings)} warnings, cites 1 / (time - time[-1,0]): {cites}")
    assert ok


def test_criterion_8_well_formedness_rejection(tmp_path, capsys, criterion):
    cases = {
        "positive_cycle": "input x: Int32\noutput a: Int32 := a[1,0]\n",
        "zero_sync_cycle": "output a := b\noutput b := a\n",
    }
    seen = []
    for kind, text in cases.items():
        path = tmp_path / f"{kind}.lola"
        path.write_text(text)
        code = main(["--json", "check", str(path)])
        payload = json.loads(capsys.readouterr().out)
        kinds = [e["kind"] for e in payload["errors"]]
        seen.append((kind, code, kinds))
    ok = all(code == 1 and kind in kinds for kind, code, kinds in seen)
    criterion(8, ok, "; ".join(f"{k}: exit {c}, witnesses {ks}" for k, c, ks in seen))
    assert ok


@needs_toolchain
def test_criterion_9_annotations(corpus_difftest, criterion):
    spec = load_spec(source("altitude"))
    report = analyze(spec)
    golden = render_annotations(emit_annotations(spec, report)) == (GOLDEN / "altitude_annotations.txt").read_text()
    text = generate(spec, report, CodegenOptions(annotations=True)).source_text
    inv = re.search(r"assert!\((.*mem\.altitude\[0\].*)\);", text)
    three = bool(inv) and inv.group(1).count("mem.altitude[") == 3
    pre = '#[requires="index < 3"]' in text
    reports, _ = corpus_difftest
    ok_runs, detail = _variant_summary(reports, "annotated")
    same = all(
        {(c.trace, c.verdict) for c in r.cases if c.variant == "annotated"}
        == {(c.trace, c.verdict) for c in r.cases if c.variant == "sequential"}
        for r in reports.values()
    )
    ok = golden and three and pre and ok_runs and same
    criterion(9, ok, f"golden {golden}, 3-conjunct invariant {three}, index < 3 {pre}; annotated {detail}; verdicts unchanged {same}")
    assert ok
