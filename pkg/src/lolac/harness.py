"""Random traces, toolchain orchestration, differential testing, and timing.

Random generation uses xorshift64* (Vigna's multiplier 0x2545F4914F6CDD1D,
shifts 12/25/27) whose 64-bit state is seeded by one round of splitmix64.
Int32 cells are `lo + x mod (hi - lo + 1)`; Bool cells are the top bit.
Cells are drawn row by row, inputs in declaration order.
"""

from __future__ import annotations

import logging
import os
import shlex
import shutil
import statistics
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import AnalysisReport, analyze
from .codegen import CodegenOptions, generate
from .errors import BuildError, EvalError
from .frontend.syntax import INT32_MAX, INT32_MIN, Type
from .frontend.typecheck import TypedSpec
from .interpreter import evaluate, model_to_csv
from .traces import Trace, read_trace_csv, write_trace_csv

log = logging.getLogger(__name__)

DEFAULT_TOOLCHAIN = "rustc --edition 2021 -O -D warnings -o {out} {src}"
DEFAULT_INT_RANGE = (-1000, 1000)
_M64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        self.state = splitmix64(seed & _M64) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _M64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _M64

    def uniform(self, lo: int, hi: int) -> int:
        return lo + self.next_u64() % (hi - lo + 1)

    def coin(self) -> bool:
        return bool(self.next_u64() >> 63)


def generate_random_trace(spec: TypedSpec, seed: int, length: int, ranges: dict | None = None) -> Trace:
    if length < 0:
        raise ValueError("trace length must be non-negative")
    ranges = ranges or {}
    rng = XorShift64Star(seed)
    draws = []
    for s in spec.inputs:
        if s.type is Type.BOOL:
            draws.append(None)
            continue
        lo, hi = ranges.get(s.name, DEFAULT_INT_RANGE)
        if not INT32_MIN <= lo <= hi <= INT32_MAX:
            raise ValueError(f"bad value range [{lo}, {hi}] for {s.name}")
        draws.append((lo, hi))
    cols = [[] for _ in spec.inputs]
    for _ in range(length):
        for col, rng_range in zip(cols, draws):
            col.append(rng.coin() if rng_range is None else rng.uniform(*rng_range))
    return Trace(length, {s.name: col for s, col in zip(spec.inputs, cols)})


# toolchain


def toolchain_template(override: str | None = None) -> str:
    return override or os.environ.get("LOLAC_TOOLCHAIN") or DEFAULT_TOOLCHAIN


def build_monitor(source_text: str, workdir: Path, name: str = "monitor", template: str | None = None) -> Path:
    """Write the source and invoke the toolchain; returns the executable path."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    src = workdir / f"{name}.rs"
    out = workdir / name
    src.write_text(source_text)
    argv = [tok.format(src=str(src), out=str(out)) for tok in shlex.split(toolchain_template(template))]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise BuildError(f"cannot run toolchain {argv[0]!r}: {exc}") from None
    output = proc.stdout + proc.stderr
    if proc.returncode != 0 or not out.exists():
        raise BuildError(f"toolchain exited with status {proc.returncode}", output)
    return out


@dataclass
class MonitorRun:
    returncode: int
    firings: list  # (position, index, message)
    dump: str | None
    stderr: str
    seconds: float = 0.0

    @property
    def fault_position(self):
        if self.returncode != 2:
            return None
        marker = "division by zero at position "
        for line in self.stderr.splitlines():
            if marker in line:
                return int(line.rsplit(marker, 1)[1].strip())
        return None


def parse_firings(text: str) -> list:
    firings = []
    for line in text.splitlines():
        k, i, msg = line.split(",", 2)
        firings.append((int(k), int(i), msg))
    return firings


def run_monitor(binary: Path, trace_path: Path, streams_out: Path | None = None, timeout: float = 600) -> MonitorRun:
    argv = [str(binary)]
    if streams_out is not None:
        argv += ["--streams-out", str(streams_out)]
    with open(trace_path, "rb") as stdin:
        start = time.perf_counter()
        proc = subprocess.run(argv, stdin=stdin, capture_output=True, timeout=timeout)
        elapsed = time.perf_counter() - start
    dump = None
    if streams_out is not None and Path(streams_out).exists():
        dump = Path(streams_out).read_text()
    stdout = proc.stdout.decode("utf-8", "replace")
    try:
        firings = sorted(parse_firings(stdout), key=lambda f: (f[0], f[1]))
    except ValueError:
        firings = [(-1, -1, stdout)]
    return MonitorRun(proc.returncode, firings, dump, proc.stderr.decode("utf-8", "replace"), elapsed)


# difftest


@dataclass
class RandomTraces:
    seed: int = 1
    count: int = 100
    max_len: int = 100
    ranges: dict = field(default_factory=dict)


@dataclass
class DifftestConfig:
    spec_path: Path | None = None
    spec_source: str | None = None
    spec_name: str = "spec"
    trace_files: list | None = None
    random: RandomTraces | None = None
    toolchain: str | None = None
    parallel: bool = False
    annotations: bool = False
    keep_artifacts: bool = False
    workdir: Path | None = None
    jobs: int | None = None
    timing_repetitions: int = 10

    def load(self) -> TypedSpec:
        from .frontend import load_spec

        text = self.spec_source if self.spec_source is not None else Path(self.spec_path).read_text()
        return load_spec(text)


@dataclass
class CaseResult:
    trace: str
    length: int
    variant: str
    verdict: str  # match | mismatch | build_failure | runtime_fault
    detail: dict = field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        return self.verdict == "match" or (self.verdict == "runtime_fault" and self.detail.get("side") == "both")

    def to_json(self) -> dict:
        return {"trace": self.trace, "length": self.length, "variant": self.variant, "verdict": self.verdict, **self.detail}


@dataclass
class DifftestReport:
    spec_name: str
    preflen: int
    variants: list
    cases: list = field(default_factory=list)
    # traces on which a variant's raw output differs from the sequential build
    variant_divergence: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def counts(self) -> dict:
        counts = {"match": 0, "mismatch": 0, "build_failure": 0, "runtime_fault": 0}
        for c in self.cases:
            counts[c.verdict] += 1
        return counts

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.agrees]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.variant_divergence

    def to_json(self) -> dict:
        return {
            "summary": {
                "spec": self.spec_name,
                "preflen": self.preflen,
                "variants": self.variants,
                "cases": len(self.cases),
                "counts": self.counts,
                "agreeing": sum(c.agrees for c in self.cases),
                "variant_divergence": self.variant_divergence,
                "ok": self.ok,
                "timing": self.timing,
            },
            "cases": [c.to_json() for c in self.cases],
        }

    def format_text(self) -> str:
        counts = self.counts
        lines = [
            f"difftest {self.spec_name}: {len(self.cases)} cases over variants {', '.join(self.variants)}",
            "  " + ", ".join(f"{k}={v}" for k, v in counts.items()),
        ]
        faults = sum(1 for c in self.cases if c.verdict == "runtime_fault" and c.agrees)
        if faults:
            lines.append(f"  {faults} runtime fault(s) reported identically by both sides")
        for c in self.failures[:10]:
            lines.append(f"  FAIL {c.trace} [{c.variant}] {c.verdict}: {c.detail}")
        for trace in self.variant_divergence[:10]:
            lines.append(f"  FAIL {trace}: variant output differs from sequential build")
        if self.timing:
            t = self.timing
            lines.append(
                f"  timing on {t['events']} events: interpreter {t['interpreter_ns_per_event']:.1f} ns/event, "
                f"monitor {t['monitor_ns_per_event']:.1f} ns/event"
            )
        lines.append("  verdict: " + ("all agree" if self.ok else "DISAGREEMENT"))
        return "\n".join(lines) + "\n"


def _first_divergence(expected: str, actual: str | None, names: list):
    exp_rows = [ln for ln in expected.splitlines()[1:] if not ln.startswith("#")]
    act_rows = [ln for ln in (actual or "").splitlines()[1:] if not ln.startswith("#")]
    for k in range(max(len(exp_rows), len(act_rows))):
        e = exp_rows[k].split(",") if k < len(exp_rows) else [None] * len(names)
        a = act_rows[k].split(",") if k < len(act_rows) else [None] * len(names)
        for j, name in enumerate(names or [""]):
            ev = e[j] if j < len(e) else None
            av = a[j] if j < len(a) else None
            if ev != av:
                return k, name, ev, av
    return None


def _first_firing_divergence(expected: list, actual: list):
    for e, a in zip(expected, actual):
        if e != a:
            first = min(e, a)
            return first[0], f"trigger_{first[1]}", e, a
    longer = expected if len(expected) > len(actual) else actual
    extra = longer[min(len(expected), len(actual))]
    return (
        extra[0],
        f"trigger_{extra[1]}",
        extra if longer is expected else None,
        extra if longer is actual else None,
    )


def compare_run(spec: TypedSpec, oracle, run: MonitorRun) -> tuple[str, dict]:
    """Classify one monitor run against the interpreter's model (or fault)."""
    names = [s.name for s in spec.evaluated]
    if isinstance(oracle, EvalError):
        if run.returncode == 2:
            pos = run.fault_position
            positions = {p for _, p in oracle.faults}
            expected = {(k, i, m or "") for k, i, m in oracle.partial.firings}
            if pos in positions and set(run.firings) <= expected:
                return "runtime_fault", {"side": "both", "position": pos}
            return "mismatch", {
                "position": pos,
                "stream": None,
                "expected": f"fault at one of {sorted(positions)}",
                "actual": f"fault at {pos}",
            }
        return "runtime_fault", {"side": "interpreter", "position": oracle.position, "stream": oracle.stream}
    if run.returncode == 2:
        return "runtime_fault", {"side": "monitor", "position": run.fault_position}
    if run.returncode != 0:
        return "runtime_fault", {"side": "monitor", "position": None, "stderr": run.stderr.strip()[-500:]}
    expected_dump = model_to_csv(oracle)
    expected_firings = [(k, i, m or "") for k, i, m in oracle.firings]
    if run.dump is not None and run.dump != expected_dump:
        div = _first_divergence(expected_dump, run.dump, names)
        if div is None:
            div = (None, "firing log", expected_dump.split("#", 1)[-1], (run.dump or "").split("#", 1)[-1])
        k, stream, e, a = div
        return "mismatch", {"position": k, "stream": stream, "expected": e, "actual": a}
    if run.firings != expected_firings:
        k, stream, e, a = _first_firing_divergence(expected_firings, run.firings)
        return "mismatch", {"position": k, "stream": stream, "expected": e, "actual": a}
    return "match", {}


def difftest_traces(spec: TypedSpec, preflen: int, cfg: RandomTraces) -> list[tuple[str, Trace]]:
    """Random traces; the first ones cover every length 0..preflen."""
    master = XorShift64Star(cfg.seed)
    traces = []
    for n in range(cfg.count):
        length = n if n <= preflen else master.uniform(0, max(cfg.max_len, preflen))
        seed = master.next_u64()
        traces.append((f"random-{n:04d}", generate_random_trace(spec, seed, length, cfg.ranges)))
    return traces


def _median_seconds(fn, reps: int) -> float:
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def run_difftest(config: DifftestConfig) -> DifftestReport:
    spec = config.load()
    report = analyze(spec)
    variants = ["sequential"] + (["parallel"] if config.parallel else []) + (["annotated"] if config.annotations else [])
    options = {
        "sequential": CodegenOptions(emit_streams=True),
        "parallel": CodegenOptions(emit_streams=True, parallel=True),
        "annotated": CodegenOptions(emit_streams=True, annotations=True),
    }
    if config.trace_files is not None:
        traces = [(Path(p).name, read_trace_csv(Path(p).read_text(), spec)) for p in sorted(config.trace_files)]
    else:
        traces = difftest_traces(spec, report.preflen, config.random or RandomTraces())
    root = Path(tempfile.mkdtemp(prefix="lolac-difftest-", dir=config.workdir))
    result = DifftestReport(config.spec_name, report.preflen, variants)
    try:
        binaries: dict = {}
        build_errors: dict = {}

        def build(variant):
            program = generate(spec, report, options[variant], config.spec_name)
            try:
                binaries[variant] = build_monitor(program.source_text, root / variant, "monitor", config.toolchain)
            except BuildError as exc:
                build_errors[variant] = exc

        jobs = config.jobs or os.cpu_count() or 1
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(build, variants))

        def run_case(index_trace):
            index, (name, trace) = index_trace
            case_dir = root / f"case-{index:05d}"
            case_dir.mkdir()
            trace_path = case_dir / "trace.csv"
            trace_path.write_text(write_trace_csv(trace, spec))
            try:
                oracle = evaluate(spec, trace)
            except EvalError as exc:
                oracle = exc
            cases, raw = [], {}
            for variant in variants:
                if variant in build_errors:
                    err = build_errors[variant]
                    cases.append(CaseResult(name, trace.length, variant, "build_failure", {"message": str(err), "output": err.output[-2000:]}))
                    continue
                run = run_monitor(binaries[variant], trace_path, case_dir / f"{variant}.streams.csv")
                raw[variant] = (run.returncode, run.fault_position, run.firings, run.dump)
                verdict, detail = compare_run(spec, oracle, run)
                cases.append(CaseResult(name, trace.length, variant, verdict, detail))
            diverged = any(raw[v] != raw["sequential"] for v in raw if "sequential" in raw)
            if not config.keep_artifacts:
                shutil.rmtree(case_dir, ignore_errors=True)
            return cases, (name if diverged else None)

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for cases, diverged in pool.map(run_case, enumerate(traces)):
                result.cases.extend(cases)
                if diverged:
                    result.variant_divergence.append(diverged)

        longest = max(traces, key=lambda t: t[1].length, default=None)
        if longest and longest[1].length > 0 and "sequential" in binaries and config.timing_repetitions > 0:
            name, trace = longest
            path = root / "timing.csv"
            path.write_text(write_trace_csv(trace, spec))

            def interp():
                try:
                    evaluate(spec, trace)
                except EvalError:
                    pass

            reps = config.timing_repetitions
            t_i = _median_seconds(interp, reps)
            t_m = statistics.median(run_monitor(binaries["sequential"], path).seconds for _ in range(reps))
            result.timing = {
                "trace": name,
                "events": trace.length,
                "repetitions": reps,
                "interpreter_ns_per_event": t_i * 1e9 / trace.length,
                "monitor_ns_per_event": t_m * 1e9 / trace.length,
            }
    finally:
        if not config.keep_artifacts:
            shutil.rmtree(root, ignore_errors=True)
    return result


# benchmarking


@dataclass
class BenchResult:
    spec_name: str
    events: int
    repetitions: int
    interpreter_repetitions: int
    interpreter_ns: float
    monitor_ns: float

    @property
    def ratio(self) -> float:
        return self.interpreter_ns / self.monitor_ns if self.monitor_ns > 0 else float("inf")

    @property
    def monitor_faster(self) -> bool:
        return self.monitor_ns <= self.interpreter_ns

    def to_json(self) -> dict:
        return {
            "spec": self.spec_name,
            "events": self.events,
            "repetitions": self.repetitions,
            "interpreter_repetitions": self.interpreter_repetitions,
            "interpreter_ns_per_event": self.interpreter_ns,
            "monitor_ns_per_event": self.monitor_ns,
            "ratio": self.ratio,
            "monitor_faster": self.monitor_faster,
        }

    def format_text(self) -> str:
        return (
            f"bench {self.spec_name}: {self.events} events\n"
            f"  interpreter {self.interpreter_ns:.1f} ns/event (median of {self.interpreter_repetitions})\n"
            f"  monitor     {self.monitor_ns:.1f} ns/event (median of {self.repetitions})\n"
            f"  speedup     {self.ratio:.1f}x\n"
        )


def bench(
    spec: TypedSpec,
    events: int,
    repetitions: int = 10,
    *,
    interpreter_repetitions: int | None = None,
    seed: int = 1,
    ranges: dict | None = None,
    toolchain: str | None = None,
    workdir: Path | None = None,
    name: str = "spec",
    report: AnalysisReport | None = None,
) -> BenchResult:
    """Median ns/event of the interpreter and of the compiled monitor.

    Interpreter time covers evaluation of an already parsed trace; monitor
    time is the wall time of the process reading the CSV trace from a file.
    """
    if events < 1:
        raise ValueError("bench needs at least one event")
    if events < 10**5:
        log.warning("bench with %d events; medians are unstable below 10^5", events)
    report = report or analyze(spec)
    trace = generate_random_trace(spec, seed, events, ranges)
    root = Path(tempfile.mkdtemp(prefix="lolac-bench-", dir=workdir))
    try:
        binary = build_monitor(generate(spec, report, CodegenOptions(), name).source_text, root, "monitor", toolchain)
        path = root / "trace.csv"
        path.write_text(write_trace_csv(trace, spec))
        run_monitor(binary, path)  # warm the page cache
        t_m = statistics.median(run_monitor(binary, path).seconds for _ in range(repetitions))

        def interp():
            try:
                evaluate(spec, trace)
            except EvalError:
                pass

        ireps = interpreter_repetitions or repetitions
        t_i = _median_seconds(interp, ireps)
    finally:
        shutil.rmtree(root, ignore_errors=True)
    return BenchResult(name, events, repetitions, ireps, t_i * 1e9 / events, t_m * 1e9 / events)


# memory


# A child forked from this (large) Python process inherits the parent's
# resident-set high-water mark across exec, so the monitor is launched from
# a tiny compiled helper and measured there with getrusage(RUSAGE_CHILDREN).
_RSS_PROBE = r"""
use std::process::{Command, Stdio};

#[repr(C)]
struct RUsage {
    fields: [i64; 18],
}

extern "C" {
    fn getrusage(who: i32, usage: *mut RUsage) -> i32;
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trace = std::fs::File::open(&args[2]).expect("cannot open trace");
    let status = Command::new(&args[1])
        .stdin(Stdio::from(trace))
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .expect("cannot run monitor");
    let mut usage = RUsage { fields: [0; 18] };
    // RUSAGE_CHILDREN; ru_maxrss follows the two timevals
    unsafe { getrusage(-1, &mut usage) };
    println!("{} {}", status.code().unwrap_or(-1), usage.fields[4]);
}
"""


def build_rss_probe(workdir: Path, template: str | None = None) -> Path:
    return build_monitor(_RSS_PROBE, workdir, "rss_probe", template)


def peak_rss_kb(binary: Path, trace_path: Path, probe: Path) -> int:
    """Peak resident set size of one monitor run, in KiB (Linux)."""
    proc = subprocess.run([str(probe), str(binary), str(trace_path)], capture_output=True, text=True, check=True)
    code, rss = (int(v) for v in proc.stdout.split())
    if code != 0:
        raise RuntimeError(f"monitor exited with status {code}")
    return rss


@dataclass
class MemoryResult:
    short_events: int
    long_events: int
    short_kb: int
    long_kb: int

    @property
    def growth(self) -> float:
        return (self.long_kb - self.short_kb) / self.short_kb


def memory_profile(
    spec: TypedSpec,
    short: int = 10**5,
    long: int = 10**6,
    *,
    seed: int = 1,
    ranges: dict | None = None,
    trace_factory=None,
    toolchain: str | None = None,
    workdir: Path | None = None,
    name: str = "spec",
) -> MemoryResult:
    """Peak RSS of the sequential monitor on a short and a long trace.

    `trace_factory(n)` replaces the random traces, e.g. when random inputs
    would trip a division fault before the end.
    """
    report = analyze(spec)
    make = trace_factory or (lambda n: generate_random_trace(spec, seed, n, ranges))
    root = Path(tempfile.mkdtemp(prefix="lolac-mem-", dir=workdir))
    try:
        binary = build_monitor(generate(spec, report, CodegenOptions(), name).source_text, root, "monitor", toolchain)
        probe = build_rss_probe(root, toolchain)
        rss = []
        for n in (short, long):
            path = root / f"trace-{n}.csv"
            path.write_text(write_trace_csv(make(n), spec))
            rss.append(peak_rss_kb(binary, path, probe))
            path.unlink()
    finally:
        shutil.rmtree(root, ignore_errors=True)
    return MemoryResult(short, long, rss[0], rss[1])
