"""Monitor code generation."""

from .annotations import AnnotationBlock, emit_annotations, render_annotations
from .plan import AccessPlan, plan_accesses
from .report import render_report
from .rust import CodegenOptions, EmittedProgram, generate

__all__ = [
    "AccessPlan",
    "AnnotationBlock",
    "CodegenOptions",
    "EmittedProgram",
    "emit_annotations",
    "generate",
    "plan_accesses",
    "render_annotations",
    "render_report",
]
