"""Command-line entry point.

Exit codes: 0 success, 1 specification error, 2 runtime evaluation fault,
3 internal, toolchain, trace-format, or usage error (a difftest that finds
a disagreement also exits 3).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus
from .analysis import analyze, build_dependency_graph, check_well_formed, format_report, lint
from .codegen import CodegenOptions, generate, render_report
from .codegen.rust import IO_MODES
from .errors import BuildError, EvalError, IllFormedSpec, LolaError, TraceFormatError
from .frontend import load_spec
from .harness import DifftestConfig, RandomTraces, bench, build_monitor, run_difftest
from .interpreter import evaluate, format_firings, model_to_csv
from .traces import read_trace_csv

EXIT_OK, EXIT_SPEC, EXIT_FAULT, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, top: bool) -> None:
    # accepted both before and after the subcommand
    default = False if top else argparse.SUPPRESS
    p.add_argument("--json", action="store_true", default=default, help="machine-readable output")
    p.add_argument("--quiet", action="store_true", default=default, help="suppress non-essential output")


def _range(text: str):
    try:
        name, bounds = text.split("=", 1)
        lo, hi = bounds.split(":", 1)
        return name.strip(), (int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=LO:HI, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lolac", description="Compile Lola specifications into constant-memory monitors.")
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p, top=False)
        p.add_argument("spec", help="specification file, or the name of a bundled example")
        return p

    p = command("analyze", "print shifts, layers, and the memory plan")
    p.add_argument("--figures", metavar="DIR", help="write a layer diagram and its table to DIR")

    command("check", "check well-formedness and print lints")

    p = command("compile", "emit a monitor program")
    p.add_argument("-o", "--output", required=True, metavar="PATH", help="where to write the Rust source")
    p.add_argument("--parallel", action="store_true", help="evaluate each layer with scoped threads")
    p.add_argument("--annotations", action="store_true", help="emit contracts, invariants, and ghost memory")
    p.add_argument("--emit-streams", action="store_true", help="support --streams-out in the monitor")
    p.add_argument("--io-mode", choices=IO_MODES, default="csv_stdin")
    p.add_argument("--build", metavar="BIN", help="also build an executable with the toolchain")
    p.add_argument("--toolchain", help="build command template with {src} and {out}")

    p = command("interpret", "run the reference interpreter on a trace")
    p.add_argument("--trace", required=True, metavar="CSV")
    p.add_argument("--streams-out", metavar="PATH", help="write every stream value to PATH")

    p = command("difftest", "compare compiled monitors with the interpreter")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--traces", metavar="DIR", help="use the *.csv traces in DIR")
    src.add_argument("--random", type=int, metavar="N", help="use N random traces (default 100)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-len", type=int, default=100)
    p.add_argument("--range", type=_range, action="append", default=[], metavar="NAME=LO:HI",
                   help="value range of an Int32 input")
    p.add_argument("--parallel", action="store_true", help="also test the parallel build")
    p.add_argument("--annotations", action="store_true", help="also test the annotated build")
    p.add_argument("--jobs", type=int)
    p.add_argument("--workdir", metavar="DIR")
    p.add_argument("--keep-artifacts", action="store_true")
    p.add_argument("--toolchain")
    p.add_argument("--timing-repetitions", type=int, default=10)
    p.add_argument("--figures", metavar="DIR")

    p = command("bench", "time interpreter and monitor per event")
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--interpreter-repetitions", type=int)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--range", type=_range, action="append", default=[], metavar="NAME=LO:HI")
    p.add_argument("--toolchain")
    p.add_argument("--figures", metavar="DIR")
    return parser


def _read_spec(arg: str):
    """Returns (source text, display name, bundled example name or None)."""
    path = Path(arg)
    if not path.exists() and arg in corpus.ALL:
        return corpus.source(arg), f"{arg}.lola", arg
    try:
        return path.read_text(encoding="utf-8"), arg, None
    except (OSError, UnicodeDecodeError) as exc:
        raise LolaError(f"cannot read specification: {exc}") from None


def _stem(display: str) -> str:
    return Path(display).stem


def _emit(args, payload, text: str | None) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    elif text and not args.quiet:
        sys.stdout.write(text)


def _witness_json(w) -> dict:
    return {
        "kind": w.kind,
        "nodes": list(w.nodes),
        "weight": w.weight,
        "edges": [
            {"from": e.accessor, "to": e.accessed, **({"offset": e.offset} if w.kind == "positive_cycle" else {"sync_distance": e.distance, "offset": e.offset})}
            for e in w.edges
        ],
    }


def _describe_witness(w) -> str:
    if w.kind == "positive_cycle":
        label = f"positive-weight cycle (total offset {w.weight:+d})"
    else:
        label = "zero-sync-distance cycle"
    return f"not efficiently monitorable: {label}: {w.describe()}"


def cmd_analyze(args) -> int:
    text, display, _ = _read_spec(args.spec)
    spec = load_spec(text)
    report = analyze(spec)
    files = []
    if args.figures:
        from .plotting import plot_layers

        files = plot_layers(report, args.figures, f"{_stem(display)}-layers")
    payload = report.to_json()
    payload["figures"] = [str(f) for f in files]
    _emit(args, payload, format_report(report))
    return EXIT_OK


def cmd_check(args) -> int:
    text, display, _ = _read_spec(args.spec)
    try:
        spec = load_spec(text)
        verdict = check_well_formed(build_dependency_graph(spec))
    except IllFormedSpec as exc:
        # untypeable offset-0 cycles are caught while loading
        verdict = exc.verdict
    lints = lint(spec) if verdict.ok else []
    if args.json:
        print(json.dumps({
            "ok": verdict.ok,
            "errors": [_witness_json(w) for w in verdict.errors],
            "lints": [{"code": l.code, "stream": l.stream, "message": l.message} for l in lints],
        }, indent=2))
    if not verdict.ok:
        for w in verdict.errors:
            print(f"{display}: error: {_describe_witness(w)}", file=sys.stderr)
        return EXIT_SPEC
    if not args.json and not args.quiet:
        print("ok: efficiently monitorable")
    if not args.json:
        for l in lints:
            where = f"{display}:{l.span.line}:{l.span.col}: " if l.span else f"{display}: "
            print(f"{where}warning[{l.code}]: {l.message}")
    return EXIT_OK


def cmd_compile(args) -> int:
    text, display, _ = _read_spec(args.spec)
    spec = load_spec(text)
    report = analyze(spec)
    options = CodegenOptions(parallel=args.parallel, annotations=args.annotations,
                             io_mode=args.io_mode, emit_streams=args.emit_streams)
    program = generate(spec, report, options, _stem(display))
    out = Path(args.output)
    out.write_text(program.source_text)
    payload = {"output": str(out), **program.metadata}
    if args.build:
        binary = Path(args.build).resolve()
        built = build_monitor(program.source_text, binary.parent, binary.name, args.toolchain)
        payload["binary"] = str(built)
    _emit(args, payload, render_report(program))
    return EXIT_OK


def cmd_interpret(args) -> int:
    text, display, _ = _read_spec(args.spec)
    spec = load_spec(text)
    analyze(spec)  # the interpreter only runs well-formed specifications
    trace = read_trace_csv(Path(args.trace).read_text(), spec)
    model = evaluate(spec, trace)
    if args.streams_out:
        Path(args.streams_out).write_text(model_to_csv(model))
    if args.json:
        print(json.dumps({
            "length": model.length,
            "firings": [{"position": k, "index": i, "message": m} for k, i, m in model.firings],
        }, indent=2))
    else:
        sys.stdout.write(format_firings(model.firings))
    return EXIT_OK


def cmd_difftest(args) -> int:
    text, display, example = _read_spec(args.spec)
    load_spec(text)  # report syntax errors before anything is built
    ranges = dict(corpus.RANGES.get(example, {})) if example else {}
    ranges.update(dict(args.range))
    config = DifftestConfig(
        spec_source=text,
        spec_name=_stem(display),
        parallel=args.parallel,
        annotations=args.annotations,
        toolchain=args.toolchain,
        keep_artifacts=args.keep_artifacts,
        workdir=Path(args.workdir) if args.workdir else None,
        jobs=args.jobs,
        timing_repetitions=args.timing_repetitions,
    )
    if args.traces:
        config.trace_files = sorted(Path(args.traces).glob("*.csv"))
        if not config.trace_files:
            raise TraceFormatError(f"no *.csv traces in {args.traces}")
    else:
        config.random = RandomTraces(seed=args.seed, count=args.random if args.random is not None else 100,
                                     max_len=args.max_len, ranges=ranges)
    report = run_difftest(config)
    files = []
    if args.figures:
        from .plotting import plot_difftest

        files = plot_difftest(report, args.figures, f"{config.spec_name}-difftest")
    payload = report.to_json()
    payload["summary"]["figures"] = [str(f) for f in files]
    _emit(args, payload, report.format_text())
    if not report.ok:
        for c in report.failures[:5]:
            print(f"{display}: disagreement on {c.trace} [{c.variant}]: {c.verdict} {c.detail}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_bench(args) -> int:
    text, display, example = _read_spec(args.spec)
    spec = load_spec(text)
    if args.events < 1:
        raise UsageError("bench: --events must be at least 1")
    ranges = dict(corpus.RANGES.get(example, {})) if example else {}
    ranges.update(dict(args.range))
    result = bench(spec, args.events, args.repetitions, interpreter_repetitions=args.interpreter_repetitions,
                   seed=args.seed, ranges=ranges, toolchain=args.toolchain, name=_stem(display))
    files = []
    if args.figures:
        from .plotting import plot_bench

        files = plot_bench([result], args.figures, f"{result.spec_name}-bench")
    payload = result.to_json()
    payload["figures"] = [str(f) for f in files]
    _emit(args, payload, result.format_text())
    if not result.monitor_faster:
        print(f"{display}: warning: monitor was not faster than the interpreter", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "check": cmd_check,
    "compile": cmd_compile,
    "interpret": cmd_interpret,
    "difftest": cmd_difftest,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="lolac: %(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INTERNAL
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    display = getattr(args, "spec", "<spec>")
    try:
        return COMMANDS[args.command](args)
    except IllFormedSpec as exc:
        for w in exc.verdict.errors:
            print(f"{display}: error: {_describe_witness(w)}", file=sys.stderr)
        return EXIT_SPEC
    except LolaError as exc:
        print(exc.format(display), file=sys.stderr)
        return EXIT_SPEC
    except EvalError as exc:
        print(f"{display}: runtime fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except TraceFormatError as exc:
        print(f"trace error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except BuildError as exc:
        print(f"toolchain error: {exc}\n{exc.output}", file=sys.stderr)
        return EXIT_INTERNAL
    except UsageError as exc:
        print(f"lolac: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"lolac: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # never let a traceback escape
        print(f"lolac: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
