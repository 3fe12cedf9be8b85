"""Rust backend: emits a single-file, constant-memory monitor program."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..analysis import AnalysisReport
from ..errors import UnsupportedSpec
from ..frontend.syntax import Binary, walk
from ..frontend.typecheck import TypedSpec, fold_constants
from .annotations import emit_annotations
from .rustexpr import ExprTranslator, field_names, has_division, rust_literal, rust_string, rust_type
from .plan import DEFAULT, READ, evaluated_in_postfix, evaluated_in_prefix, plan_expression


IO_MODES = ("csv_stdin", "embedded_functions")


@dataclass
class CodegenOptions:
    parallel: bool = False
    annotations: bool = False
    io_mode: str = "csv_stdin"
    emit_streams: bool = False


@dataclass
class EmittedProgram:
    source_text: str
    preflen: int
    postlen: int
    slots: dict
    layers: list
    annotation_blocks: int = 0
    options: CodegenOptions = field(default_factory=CodegenOptions)
    spec_name: str = "spec"

    @property
    def metadata(self) -> dict:
        return {
            "preflen": self.preflen,
            "postlen": self.postlen,
            "slots": dict(self.slots),
            "layers": [list(l) for l in self.layers],
            "annotation_blocks": self.annotation_blocks,
        }


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.level = 0

    def line(self, text: str = "") -> None:
        self.lines.append(("    " * self.level + text) if text else "")

    def block(self, lines) -> None:
        for ln in lines:
            self.line(ln)

    def open(self, text: str) -> None:
        self.line(text)
        self.level += 1

    def close(self, text: str = "}") -> None:
        self.level -= 1
        self.line(text)


_ROUND = re.compile(r"\bround\b")


class RustEmitter:
    def __init__(self, spec: TypedSpec, report: AnalysisReport, options: CodegenOptions, name: str = "spec"):
        if options.io_mode not in IO_MODES:
            raise UnsupportedSpec(f"unknown io mode {options.io_mode!r}")
        self.spec = spec
        self.report = report
        self.options = options
        self.name = name
        consts = spec.constant_values()
        self.exprs = {s.name: fold_constants(s.expr, consts) for s in spec.evaluated}
        self.plans = {n: {p.node: p for p in plan_expression(spec, report, n, e)} for n, e in self.exprs.items()}
        self.inputs = [s.name for s in spec.inputs]
        self.evaluated = [s.name for s in spec.evaluated]
        self.fields = field_names(self.inputs + self.evaluated)
        self.types = {n: rust_type(report.types[n]) for n in self.inputs + self.evaluated}
        self.divides = {n: has_division(e) for n, e in self.exprs.items()}
        self.triggers = {t.name: t for t in spec.triggers}
        self.read_streams = {p.accessed for plans in self.plans.values() for p in plans.values()}
        self.layers = report.layers
        self.annotations = emit_annotations(spec, report, self.fields) if options.annotations else []
        self.anchors: dict = {}
        for block in self.annotations:
            self.anchors.setdefault(block.anchor, []).append(block)
        self.rows = report.postlen + 1
        self.used_helpers: set = set()

    # helpers

    def f(self, name: str) -> str:
        return self.fields[name]

    def anchored(self, w: _Writer, anchor: str) -> None:
        for block in self.anchors.get(anchor, []):
            w.block(block.lines)

    def zero(self, name: str) -> str:
        return "0i32" if self.types[name] == "i32" else "false"

    def phase_tag(self, phase: str, k: int | None) -> str:
        return {"loop": "", "pre": f"pre{k}_", "post": f"post{k}_", "epi": f"epi{k}_"}[phase]

    def evaluated_in(self, name: str, phase: str, k: int | None) -> bool:
        if phase == "loop":
            return True
        if phase == "pre":
            return evaluated_in_prefix(self.report, name, k)
        return evaluated_in_postfix(self.report, name, k)

    def decision(self, plan, phase: str, k: int | None) -> str:
        if phase == "loop":
            return READ
        if phase == "pre":
            return plan.in_prefix(k)
        return plan.in_postfix(k)

    # evaluation functions

    def eval_function(self, w: _Writer, name: str, phase: str, k: int | None) -> None:
        plans = self.plans[name]
        # epilogue rounds check past accesses at runtime
        dynamic = []

        def access(node):
            plan = plans[node]
            what = self.decision(plan, phase, k)
            if what == DEFAULT:
                return rust_literal(plan.default.value)
            read = f"mem.get_{self.f(node.stream)}({plan.buffer_index})"
            translator.reads += 1
            if phase == "epi" and node.offset < 0:
                dynamic.append(node)
                return f"(if pos + ({node.offset}) >= 0 {{ {read} }} else {{ {rust_literal(plan.default.value)} }})"
            return read

        translator = ExprTranslator(access)
        body = translator(self.exprs[name])
        ty = self.types[name]
        mem = "mem" if translator.reads else "_mem"
        params = f"{mem}: &Memory" + (", pos: i64" if phase == "epi" else "")
        if phase == "epi" and not dynamic:
            params = f"{mem}: &Memory, _pos: i64"
        fn = f"eval_{self.phase_tag(phase, k)}{self.f(name)}"
        self.anchored(w, f"eval.{name}")
        if self.divides[name]:
            w.open(f"fn {fn}({params}) -> Result<{ty}, ()> {{")
            w.line(f"Ok({body})")
        else:
            w.open(f"fn {fn}({params}) -> {ty} {{")
            w.line(body)
        w.close()

    # prelude

    def emit_prelude(self, w: _Writer) -> None:
        r = self.report
        w.line(f"// Monitor generated by lolac for specification '{self.name}'.")
        w.line(f"// prefix={r.preflen} postfix={r.postlen} layers={len(self.layers)}")
        w.line("#![allow(non_snake_case)]")
        w.line("#![allow(unused_parens)]")
        w.line("")
        if self.options.io_mode == "csv_stdin":
            w.line("use std::io::{BufRead, Write};")
        else:
            w.line("use std::io::Write;")
        w.line("")
        if not any(self.divides.values()):
            w.line("#[allow(dead_code)]")
        w.line("struct Fault {")
        w.line("    position: i64,")
        w.line("}")
        w.line("")
        ops = {n.op for e in self.exprs.values() for n in walk(e) if isinstance(n, Binary)}
        if "/" in ops:
            w.line("fn div_i32(a: i32, b: i32) -> Result<i32, ()> {")
            w.line("    if b == 0 { Err(()) } else { Ok(a.wrapping_div(b)) }")
            w.line("}")
            w.line("")
        if "%" in ops:
            w.line("fn rem_i32(a: i32, b: i32) -> Result<i32, ()> {")
            w.line("    if b == 0 { Err(()) } else { Ok(a.wrapping_rem(b)) }")
            w.line("}")
            w.line("")
        if self.inputs or self.evaluated:
            w.line("fn push<T: Copy, const K: usize>(buf: &mut [T; K], value: T) {")
            w.line("    buf.copy_within(0..K - 1, 1);")
            w.line("    buf[0] = value;")
            w.line("}")
            w.line("")

    def emit_memory(self, w: _Writer) -> None:
        names = self.inputs + self.evaluated
        w.open("struct Memory {")
        for n in names:
            if n not in self.read_streams and not self.options.annotations:
                w.line("#[allow(dead_code)]")
            w.line(f"{self.f(n)}: [{self.types[n]}; {self.report.slots[n]}],")
        w.close()
        w.line("")
        w.open("impl Memory {")
        w.open("fn new() -> Memory {")
        w.open("Memory {")
        for n in names:
            w.line(f"{self.f(n)}: [{self.zero(n)}; {self.report.slots[n]}],")
        w.close()
        w.close()
        for n in names:
            if n not in self.read_streams:
                continue
            w.line("")
            self.anchored(w, f"memory.getter.{n}")
            w.line("#[inline(always)]")
            w.open(f"fn get_{self.f(n)}(&self, index: usize) -> {self.types[n]} {{")
            w.line(f"self.{self.f(n)}[index]")
            w.close()
        w.line("")
        tuple_ty = self.input_tuple_type()
        arg = "input" if self.inputs else "_input"
        w.open(f"fn add_input(&mut self, {arg}: {tuple_ty}) {{")
        for i, n in enumerate(self.inputs):
            w.line(f"push(&mut self.{self.f(n)}, input.{i});")
        w.close()
        if self.report.postlen > 0 and self.inputs:
            w.line("")
            w.open("fn pad_input(&mut self) {")
            for n in self.inputs:
                w.line(f"push(&mut self.{self.f(n)}, {self.zero(n)});")
            w.close()
        for i, layer in enumerate(self.layers, 1):
            w.line("")
            params = ", ".join(f"{self.f(n)}: {self.types[n]}" for n in layer)
            w.open(f"fn write_layer_{i}(&mut self, {params}) {{")
            for n in layer:
                w.line(f"push(&mut self.{self.f(n)}, {self.f(n)});")
            w.close()
        w.close()
        w.line("")

    def input_tuple_type(self) -> str:
        if not self.inputs:
            return "()"
        tys = [self.types[n] for n in self.inputs]
        return "(" + ", ".join(tys) + ("," if len(tys) == 1 else "") + ")"

    def emit_embedded_input(self, w: _Writer) -> None:
        tuple_ty = self.input_tuple_type()
        w.line("// Event source for embedding: fill EVENTS, or replace the body of")
        w.line("// get_input with a call into the host system.")
        w.line(f"const EVENTS: [{tuple_ty}; 0] = [];")
        w.line("")
        w.open("struct Input {")
        w.line("next: usize,")
        w.close()
        w.line("")
        w.open("impl Input {")
        w.open("fn open() -> Result<Input, String> {")
        w.line("Ok(Input { next: 0 })")
        w.close()
        w.line("")
        w.open(f"fn get_input(&mut self) -> Option<{tuple_ty}> {{")
        w.line("let event = EVENTS.get(self.next).copied();")
        w.line("self.next += 1;")
        w.line("event")
        w.close()
        w.close()
        w.line("")

    def emit_io(self, w: _Writer) -> None:
        if self.options.io_mode == "embedded_functions":
            self.emit_embedded_input(w)
        else:
            self.emit_csv_input(w)
        self.emit_output(w)

    def emit_csv_input(self, w: _Writer) -> None:
        n_in = len(self.inputs)
        w.open("struct Input {")
        w.line("lines: std::io::StdinLock<'static>,")
        w.line("line: String,")
        if n_in:
            w.line(f"map: [usize; {n_in}],")
        w.line("row: u64,")
        w.line("done: bool,")
        w.close()
        w.line("")
        w.block(
            [
                "fn parse_i32(cell: &str) -> Option<i32> {",
                "    let cell = cell.trim();",
                "    let digits = cell.strip_prefix(|c: char| c == '+' || c == '-').unwrap_or(cell);",
                "    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {",
                "        return None;",
                "    }",
                "    cell.parse::<i32>().ok()",
                "}",
                "",
                "fn parse_bool(cell: &str) -> Option<bool> {",
                "    match cell.trim() {",
                '        "true" | "1" => Some(true),',
                '        "false" | "0" => Some(false),',
                "        _ => None,",
                "    }",
                "}",
                "",
            ]
        )
        if not any(self.types[n] == "i32" for n in self.inputs):
            idx = w.lines.index("fn parse_i32(cell: &str) -> Option<i32> {")
            del w.lines[idx : idx + 9]
        if not any(self.types[n] == "bool" for n in self.inputs):
            idx = w.lines.index("fn parse_bool(cell: &str) -> Option<bool> {")
            del w.lines[idx : idx + 8]
        w.open("impl Input {")
        w.open("fn open() -> Result<Input, String> {")
        map_init = f"map: [0; {n_in}], " if n_in else ""
        w.line(f"let mut input = Input {{ lines: std::io::stdin().lock(), line: String::new(), {map_init}row: 0, done: false }};")
        w.open("match input.lines.read_line(&mut input.line) {")
        w.line("Ok(0) => { input.done = true; return Ok(input); }")
        w.line("Ok(_) => {}")
        w.line('Err(e) => return Err(format!("cannot read trace header: {}", e)),')
        w.close()
        w.line("let header = input.line.trim_end_matches(&['\\n', '\\r'][..]).to_string();")
        if n_in == 0:
            w.open("if !header.trim().is_empty() {")
            w.line('return Err(format!("unexpected column(s) in header: {}", header));')
            w.close()
        else:
            w.line(f"let mut seen = [false; {n_in}];")
            w.line("let mut count = 0usize;")
            w.open("for (col, name) in header.split(',').enumerate() {")
            w.open("let index = match name.trim() {")
            for i, n in enumerate(self.inputs):
                w.line(f"{rust_string(n)} => {i},")
            w.line('other => return Err(format!("unknown column {:?} in header", other)),')
            w.close("};")
            w.open(f"if col >= {n_in} || seen[index] {{")
            w.line('return Err(format!("duplicate or surplus column {:?} in header", name.trim()));')
            w.close()
            w.line("seen[index] = true;")
            w.line("input.map[col] = index;")
            w.line("count += 1;")
            w.close()
            w.open(f"if count != {n_in} {{")
            w.line('return Err("header does not list every input stream".to_string());')
            w.close()
        w.line("Ok(input)")
        w.close()
        w.line("")
        tuple_ty = self.input_tuple_type()
        w.open(f"fn get_input(&mut self) -> Option<{tuple_ty}> {{")
        w.open("if self.done {")
        w.line("return None;")
        w.close()
        w.line("self.line.clear();")
        w.open("match self.lines.read_line(&mut self.line) {")
        w.line("Ok(0) => { self.done = true; return None; }")
        w.line("Ok(_) => {}")
        w.open("Err(e) => {")
        w.line('eprintln!("monitor: read error: {}; treating as end of input", e);')
        w.line("self.done = true;")
        w.line("return None;")
        w.close()
        w.close()
        w.line("self.row += 1;")
        w.line("let text = self.line.trim_end_matches(&['\\n', '\\r'][..]);")
        if n_in == 0:
            w.open("if !text.trim().is_empty() {")
            w.line('eprintln!("monitor: malformed row {}; treating as end of input", self.row);')
            w.line("self.done = true;")
            w.line("return None;")
            w.close()
            w.line("Some(())")
        else:
            for i, n in enumerate(self.inputs):
                w.line(f"let mut v{i}: Option<{self.types[n]}> = None;")
            w.line("let mut count = 0usize;")
            w.open("for (col, cell) in text.split(',').enumerate() {")
            w.line("count += 1;")
            w.open(f"if col >= {n_in} {{")
            w.line("break;")
            w.close()
            w.open("match self.map[col] {")
            for i, n in enumerate(self.inputs):
                parser = "parse_i32" if self.types[n] == "i32" else "parse_bool"
                w.line(f"{i} => v{i} = {parser}(cell),")
            w.line("_ => {}")
            w.close()
            w.close()
            pattern = ", ".join(f"Some(x{i})" for i in range(n_in))
            values = ", ".join(f"x{i}" for i in range(n_in)) + ("," if n_in == 1 else "")
            scrutinee = ", ".join(f"v{i}" for i in range(n_in)) + ("," if n_in == 1 else "")
            w.open(f"match ({scrutinee}) {{")
            w.line(f"({pattern}{',' if n_in == 1 else ''}) if count == {n_in} => Some(({values})),")
            w.open("_ => {")
            w.line('eprintln!("monitor: malformed row {}; treating as end of input", self.row);')
            w.line("self.done = true;")
            w.line("None")
            w.close()
            w.close()
        w.close()
        w.close()
        w.line("")

    def emit_output(self, w: _Writer) -> None:
        if self.options.emit_streams:
            self.emit_streams_io(w)
        w.open("struct Io {")
        w.line("input: Input,")
        w.line("out: std::io::BufWriter<std::io::StdoutLock<'static>>,")
        if self.options.emit_streams:
            w.line("streams: Option<Streams>,")
        w.close()
        w.line("")
        w.open("impl Io {")
        if self.triggers:
            w.open("fn fire(&mut self, position: i64, index: usize, message: &str) {")
            w.line('let _ = writeln!(self.out, "{},{},{}", position, index, message);')
            w.close()
            w.line("")
        w.open("fn finish(&mut self) -> Result<(), String> {")
        w.line('self.out.flush().map_err(|e| format!("cannot write output: {}", e))?;')
        if self.options.emit_streams:
            w.open("if let Some(streams) = self.streams.take() {")
            w.line('streams.finish().map_err(|e| format!("cannot write stream dump: {}", e))?;')
            w.close()
        w.line("Ok(())")
        w.close()
        w.close()
        w.line("")

    def emit_streams_io(self, w: _Writer) -> None:
        ev = self.evaluated
        w.line("#[derive(Clone, Copy)]")
        w.open("struct Row {")
        for n in ev:
            w.line(f"{self.f(n)}: {self.types[n]},")
        w.close()
        w.line("")
        blank = ", ".join(f"{self.f(n)}: {self.zero(n)}" for n in ev)
        w.line(f"const BLANK: Row = Row {{ {blank} }};")
        w.line(f"const ROWS: usize = {self.rows};")
        w.line("")
        w.open("struct Streams {")
        w.line("file: std::io::BufWriter<std::fs::File>,")
        w.line("firings: std::io::BufWriter<std::fs::File>,")
        w.line("firings_path: std::path::PathBuf,")
        w.line("rows: [Row; ROWS],")
        w.close()
        w.line("")
        w.open("impl Streams {")
        w.open("fn create(path: &str) -> std::io::Result<Streams> {")
        w.line("let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);")
        w.line(f"writeln!(file, {rust_string(','.join(ev))})?;")
        w.line('let firings_path = std::path::PathBuf::from(format!("{}.firings.tmp", path));')
        w.line("let firings = std::io::BufWriter::new(std::fs::File::create(&firings_path)?);")
        w.line("Ok(Streams { file, firings, firings_path, rows: [BLANK; ROWS] })")
        w.close()
        w.line("")
        if not ev:
            w.line("#[allow(dead_code)]")
        w.open("fn slot(&mut self, position: i64) -> &mut Row {")
        w.line("&mut self.rows[(position as usize) % ROWS]")
        w.close()
        w.line("")
        w.open(f"fn flush_row(&mut self, {'position' if ev else '_position'}: i64) {{")
        if ev:
            w.line("let row = self.rows[(position as usize) % ROWS];")
        fmt = ",".join("{}" for _ in ev)
        args = ", ".join(f"row.{self.f(n)}" for n in ev)
        if ev:
            w.line(f'let _ = writeln!(self.file, "{fmt}", {args});')
        else:
            w.line("let _ = writeln!(self.file);")
        for n in ev:
            t = self.triggers.get(n)
            if t is None:
                continue
            w.open(f"if row.{self.f(n)} {{")
            w.line(f'let _ = writeln!(self.firings, "# trigger,{{}},{t.index},{{}}", position, {rust_string(t.message)});')
            w.close()
        w.close()
        w.line("")
        w.open("fn finish(self) -> std::io::Result<()> {")
        w.line("let Streams { mut file, firings, firings_path, .. } = self;")
        w.line("drop(firings.into_inner().map_err(|e| e.into_error())?);")
        w.line("let mut log = std::fs::File::open(&firings_path)?;")
        w.line("std::io::copy(&mut log, &mut file)?;")
        w.line("file.flush()?;")
        w.line("std::fs::remove_file(&firings_path)")
        w.close()
        w.close()
        w.line("")

    def emit_ghost(self, w: _Writer) -> None:
        self.anchored(w, "ghost.decl")

    # rounds

    def round_body(self, phase: str, k: int | None) -> list[str]:
        """Statements evaluating and committing one round, after input handling."""
        w = _Writer()
        opts = self.options
        if phase in ("loop", "pre"):
            w.line("mem.add_input(input);")
        elif self.inputs:
            w.line("mem.pad_input();")
        if opts.annotations:
            for i, n in enumerate(self.inputs):
                if phase in ("loop", "pre"):
                    w.line(f"gm.{self.f(n)}.push(input.{i});")
        fired = []
        for li, layer in enumerate(self.layers, 1):
            active = [n for n in layer if self.evaluated_in(n, phase, k)]
            w.line(f"// layer {li}")
            self.evaluate_layer(w, active, phase, k)
            values = []
            for n in layer:
                values.append(f"val_{self.f(n)}" if n in active else self.zero(n))
            w.line(f"mem.write_layer_{li}({', '.join(values)});")
            for n in active:
                guard = f"if round - {self.report.shift[n]} >= 0 " if phase == "epi" else ""
                stmts = []
                if opts.annotations:
                    stmts.append(f"gm.{self.f(n)}.push(val_{self.f(n)});")
                if opts.emit_streams:
                    stmts.append(
                        f"if let Some(st) = io.streams.as_mut() {{ st.slot(round - {self.report.shift[n]}).{self.f(n)} = val_{self.f(n)}; }}"
                    )
                if n in self.triggers:
                    fired.append(n)
                if stmts:
                    if guard:
                        w.open(guard + "{")
                        w.block(stmts)
                        w.close()
                    else:
                        w.block(stmts)
        for n in sorted(fired, key=lambda n: self.triggers[n].index):
            t = self.triggers[n]
            cond = f"val_{self.f(n)}"
            if phase == "epi":
                cond = f"round - {self.report.shift[n]} >= 0 && {cond}"
            w.open(f"if {cond} {{")
            w.line(f"io.fire(round - {self.report.shift[n]}, {t.index}, {rust_string(t.message)});")
            w.close()
        if opts.emit_streams:
            flush = f"round - {self.report.postlen}"
            if phase in ("pre", "epi", "loop"):
                w.open(f"if {flush} >= 0 {{")
                w.line(f"if let Some(st) = io.streams.as_mut() {{ st.flush_row({flush}); }}")
                w.close()
            else:
                w.line(f"if let Some(st) = io.streams.as_mut() {{ st.flush_row({flush}); }}")
        return w.lines

    def evaluate_layer(self, w: _Writer, active: list, phase: str, k: int | None) -> None:
        tag = self.phase_tag(phase, k)

        def call(n, mem):
            pos_arg = f", round - {self.report.shift[n]}" if phase == "epi" else ""
            return f"eval_{tag}{self.f(n)}({mem}{pos_arg})"

        def unwrap(n):
            if self.divides[n]:
                w.line(
                    f"let val_{self.f(n)} = val_{self.f(n)}.map_err(|()| Fault {{ position: round - {self.report.shift[n]} }})?;"
                )

        if phase == "epi":
            # streams whose position is still negative commit a placeholder
            for n in active:
                shift = self.report.shift[n]
                value = call(n, "mem")
                if self.divides[n]:
                    value = f"{call(n, 'mem')}.map_err(|()| Fault {{ position: round - {shift} }})?"
                w.line(f"let val_{self.f(n)} = if round - {shift} >= 0 {{ {value} }} else {{ {self.zero(n)} }};")
                self.inline_assert(w, n, phase)
        elif self.options.parallel and len(active) >= 2:
            w.open(f"let ({', '.join(f'val_{self.f(n)}' for n in active)}) = {{")
            w.line("let m: &Memory = &*mem;")
            w.open("std::thread::scope(|sc| {")
            for n in active:
                w.line(f"let h_{self.f(n)} = sc.spawn(move || {call(n, 'm')});")
            joined = ", ".join(f"h_{self.f(n)}.join().unwrap()" for n in active)
            w.line(f"({joined})")
            w.close("})")
            w.close("};")
            for n in active:
                unwrap(n)
                self.inline_assert(w, n, phase)
        else:
            for n in active:
                w.line(f"let val_{self.f(n)} = {call(n, 'mem')};")
                unwrap(n)
                self.inline_assert(w, n, phase)

    def inline_assert(self, w: _Writer, name: str, phase: str) -> None:
        blocks = self.anchors.get(f"assert.{name}")
        if not blocks:
            return
        shift = self.report.shift[name]
        if phase == "epi":
            w.open(f"if round - {shift} >= 0 {{")
        else:
            w.open("{")
        w.line(f"let pos: i64 = round - {shift};")
        for b in blocks:
            w.block(b.lines)
        w.close()

    def with_round(self, w: _Writer, body: list[str], round_expr: str) -> None:
        if any(_ROUND.search(ln) for ln in body):
            w.line(f"let round: i64 = {round_expr};")
        w.block(body)

    def emit_phases(self, w: _Writer) -> None:
        r = self.report
        gm_param = ", gm: &mut GhostMemory" if self.options.annotations else ""
        gm_arg = ", gm" if self.options.annotations else ""
        if r.preflen > 0:
            w.open(f"fn prefix(mem: &mut Memory{gm_param}, io: &mut Io, iter: &mut i64) -> Result<bool, Fault> {{")
            for t in range(r.preflen):
                w.line(f"// prefix round {t}")
                w.open("if let Some(input) = io.input.get_input() {")
                self.with_round(w, self.round_body("pre", t), str(t))
                w.line("*iter += 1;")
                w.close("} else {")
                w.level += 1
                w.line("return Ok(true);")
                w.close()
            w.line("Ok(false)")
            w.close()
            w.line("")
        if r.postlen > 0:
            for phase, title in (("post", "postfix"), ("epi", "epilogue")):
                body = _Writer()
                body.level = 1
                for j in range(1, r.postlen + 1):
                    body.line(f"// {title} round {j}")
                    body.open("{")
                    self.with_round(body, self.round_body(phase, j), f"n - 1 + {j}")
                    body.close()
                text = "\n".join(body.lines)
                io = "io" if "io." in text else "_io"
                n = "n" if "n - 1" in text else "_n"
                w.open(f"fn {title}(mem: &mut Memory{gm_param}, {io}: &mut Io, {n}: i64) -> Result<(), Fault> {{")
                w.lines.extend(body.lines)
                w.line("Ok(())")
                w.close()
                w.line("")
        # main loop
        w.open("fn run(io: &mut Io) -> Result<(), Fault> {")
        w.line("let mut memory = Memory::new();")
        w.line("let mem = &mut memory;")
        if self.options.annotations:
            w.line("let mut ghost = GhostMemory::new();")
            w.line(f"let {'gm' if self.report.graph.nodes else '_gm'} = &mut ghost;")
        loop_body = self.round_body("loop", None)
        counted = r.preflen > 0 or r.postlen > 0 or self.options.annotations
        counted = counted or any(_ROUND.search(ln) for ln in loop_body)
        if counted:
            w.line("let mut iter: i64 = 0;")
        if r.preflen > 0:
            w.line(f"let early_exit = prefix(mem{gm_arg}, io, &mut iter)?;")
            w.open("if early_exit {")
            if r.postlen > 0:
                w.line(f"epilogue(mem{gm_arg}, io, iter)?;")
            w.line("return Ok(());")
            w.close()
        self.anchored(w, "loop.entry")
        w.open("while let Some(input) = io.input.get_input() {")
        for n in self.inputs + self.evaluated:
            self.anchored(w, f"loop.invariant.{n}")
        self.with_round(w, loop_body, "iter")
        if counted:
            w.line("iter += 1;")
        w.close()
        if r.postlen > 0:
            w.line(f"postfix(mem{gm_arg}, io, iter)?;")
        w.line("Ok(())")
        w.close()
        w.line("")

    def emit_main(self, w: _Writer) -> None:
        w.open("fn main() {")
        if self.options.emit_streams:
            w.line("let mut streams_out: Option<String> = None;")
        w.line("let mut args = std::env::args().skip(1);")
        w.open("while let Some(arg) = args.next() {")
        if self.options.emit_streams:
            w.open('if arg == "--streams-out" {')
            w.line("streams_out = args.next();")
            w.open("if streams_out.is_none() {")
            w.line('eprintln!("usage: monitor [--streams-out <path>] < trace.csv");')
            w.line("std::process::exit(3);")
            w.close()
            w.line("continue;")
            w.close()
        w.line('eprintln!("monitor: unknown argument {:?}", arg);')
        w.line(
            'eprintln!("usage: monitor'
            + (" [--streams-out <path>]" if self.options.emit_streams else "")
            + ' < trace.csv");'
        )
        w.line("std::process::exit(3);")
        w.close()
        w.open("let input = match Input::open() {")
        w.line("Ok(input) => input,")
        w.open("Err(msg) => {")
        w.line('eprintln!("monitor: {}", msg);')
        w.line("std::process::exit(3);")
        w.close()
        w.close("};")
        if self.options.emit_streams:
            w.open("let streams = match streams_out {")
            w.line("None => None,")
            w.open("Some(path) => match Streams::create(&path) {")
            w.line("Ok(s) => Some(s),")
            w.open("Err(e) => {")
            w.line('eprintln!("monitor: cannot create {}: {}", path, e);')
            w.line("std::process::exit(3);")
            w.close()
            w.close("},")
            w.close("};")
            w.line("let mut io = Io { input, out: std::io::BufWriter::new(std::io::stdout().lock()), streams };")
        else:
            w.line("let mut io = Io { input, out: std::io::BufWriter::new(std::io::stdout().lock()) };")
        w.line("let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut io)));")
        w.open("let code = match outcome {")
        w.open("Ok(Ok(())) => match io.finish() {")
        w.line("Ok(()) => 0,")
        w.open("Err(msg) => {")
        w.line('eprintln!("monitor: {}", msg);')
        w.line("3")
        w.close()
        w.close("},")
        w.open("Ok(Err(fault)) => {")
        w.line("let _ = io.finish();")
        w.line('eprintln!("monitor: division by zero at position {}", fault.position);')
        w.line("2")
        w.close()
        w.open("Err(_) => {")
        w.line("let _ = io.finish();")
        w.line('eprintln!("monitor: internal error");')
        w.line("3")
        w.close()
        w.close("};")
        w.line("std::process::exit(code);")
        w.close()

    def emit(self) -> EmittedProgram:
        r = self.report
        w = _Writer()
        self.emit_prelude(w)
        self.emit_memory(w)
        if self.options.annotations:
            self.emit_ghost(w)
        # evaluation functions: prefix variants, loop, postfix and epilogue variants
        for n in r.total_order:
            for t in range(r.preflen):
                if evaluated_in_prefix(r, n, t):
                    self.eval_function(w, n, "pre", t)
                    w.line("")
            self.eval_function(w, n, "loop", None)
            w.line("")
            for j in range(1, r.postlen + 1):
                if evaluated_in_postfix(r, n, j):
                    self.eval_function(w, n, "post", j)
                    w.line("")
                    self.eval_function(w, n, "epi", j)
                    w.line("")
        self.emit_io(w)
        self.emit_phases(w)
        self.emit_main(w)
        return EmittedProgram(
            source_text="\n".join(w.lines) + "\n",
            preflen=r.preflen,
            postlen=r.postlen,
            slots=dict(r.slots),
            layers=[list(l) for l in self.layers],
            annotation_blocks=len(self.annotations),
            options=self.options,
            spec_name=self.name,
        )


def generate(spec: TypedSpec, report: AnalysisReport, options: CodegenOptions | None = None, name: str = "spec") -> EmittedProgram:
    return RustEmitter(spec, report, options or CodegenOptions(), name).emit()
