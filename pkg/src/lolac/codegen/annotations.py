"""Verification annotations for generated monitors.

Contracts on getters are emitted as attribute-style comments.  Everything
else runs: a ghost memory keeps the full history of every stream, the
ring buffers are checked against it at each loop iteration, and each computed
value is re-derived from the history by evaluating the stream expression
directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..analysis import AnalysisReport
from ..frontend.syntax import Binary, walk
from ..frontend.typecheck import TypedSpec, fold_constants
from .rustexpr import ExprTranslator, field_names, rust_literal, rust_type


@dataclass
class AnnotationBlock:
    anchor: str  # where the emitter splices the lines in
    lines: list

    def render(self) -> str:
        return "\n".join([f"@{self.anchor}"] + self.lines)


def ghost_expression(expr, fields: dict) -> str:
    """The stream expression evaluated over the ghost history at `pos`."""

    def access(node):
        f = fields[node.stream]
        if node.offset == 0:
            return f"gm.{f}[pos as usize]"
        return f"ghost_at(&gm.{f}, pos + ({node.offset}), {rust_literal(node.default.value)})"

    return ExprTranslator(access, division="ghost")(expr)


def ghost_declarations(spec: TypedSpec, report: AnalysisReport, fields: dict) -> list[str]:
    names = report.graph.nodes
    lines = ["struct GhostMemory {"]
    lines += [f"    {fields[n]}: Vec<{rust_type(report.types[n])}>," for n in names]
    lines += ["}", "", "impl GhostMemory {", "    fn new() -> GhostMemory {", "        GhostMemory {"]
    lines += [f"            {fields[n]}: Vec::new()," for n in names]
    lines += ["        }", "    }", "}", ""]
    lines += [
        "#[allow(dead_code)]",
        "fn ghost_at<T: Copy>(history: &[T], pos: i64, default: T) -> T {",
        "    if pos < 0 || pos >= history.len() as i64 { default } else { history[pos as usize] }",
        "}",
        "",
    ]
    consts = spec.constant_values()
    ops = {
        n.op
        for s in spec.evaluated
        for n in walk(fold_constants(s.expr, consts))
        if isinstance(n, Binary)
    }
    if "/" in ops:
        lines += ["fn ghost_div(a: i32, b: i32) -> i32 {", "    a.wrapping_div(b)", "}", ""]
    if "%" in ops:
        lines += ["fn ghost_rem(a: i32, b: i32) -> i32 {", "    a.wrapping_rem(b)", "}", ""]
    return lines


def emit_annotations(spec: TypedSpec, report: AnalysisReport, fields: dict | None = None) -> list[AnnotationBlock]:
    fields = fields or field_names(report.graph.nodes)
    blocks = [AnnotationBlock("ghost.decl", ghost_declarations(spec, report, fields))]
    consts = spec.constant_values()
    read = {e.accessed for e in report.graph.edges}
    for n in report.graph.nodes:
        if n not in read:
            continue
        f = fields[n]
        slots = report.slots[n]
        lines = [f'// #[requires="index < {slots}"]']
        lines += [f'// #[ensures="index == {i} ==> result == self.{f}[{i}]"]' for i in range(slots)]
        blocks.append(AnnotationBlock(f"memory.getter.{n}", lines))
    for s in spec.evaluated:
        blocks.append(AnnotationBlock(f"eval.{s.name}", ["// #[pure]"]))
    entry = [f"assert!(iter == {report.preflen});"]
    for n in report.graph.nodes:
        entry.append(f"assert!(gm.{fields[n]}.len() as i64 == {report.preflen - report.shift[n]});")
    blocks.append(AnnotationBlock("loop.entry", entry))
    for n in report.graph.nodes:
        f = fields[n]
        shift = report.shift[n]
        conjuncts = [
            f"(iter < {shift + i + 1} || mem.{f}[{i}] == gm.{f}[(iter - {shift + i + 1}) as usize])"
            for i in range(report.slots[n])
        ]
        blocks.append(AnnotationBlock(f"loop.invariant.{n}", [f"assert!({' && '.join(conjuncts)});"]))
    for s in spec.evaluated:
        expr = ghost_expression(fold_constants(s.expr, consts), fields)
        blocks.append(AnnotationBlock(f"assert.{s.name}", [f"assert!(val_{fields[s.name]} == {expr});"]))
    return blocks


def render_annotations(blocks: list[AnnotationBlock]) -> str:
    return "\n".join(b.render() for b in blocks) + "\n"
