"""Human-readable summary of a compiled monitor."""

from __future__ import annotations


def render_report(program) -> str:
    if not program.slots:
        return "no streams; trivial monitor\n"
    phases = []
    if program.preflen:
        phases.append(f"prefix={program.preflen}")
    phases.append("loop")
    if program.postlen:
        phases.append(f"postfix={program.postlen}")
    memory = ", ".join(f"{n}×{k}" for n, k in program.slots.items())
    lines = [f"{' '.join(phases)}; memory: {memory}"]
    for i, layer in enumerate(program.layers, 1):
        lines.append(f"layer {i}: {', '.join(layer)}")
    opts = program.options
    flags = [k for k in ("parallel", "annotations", "emit_streams") if getattr(opts, k)]
    lines.append(f"options: {', '.join(flags) if flags else 'sequential'}")
    lines.append(f"annotation blocks: {program.annotation_blocks}")
    return "\n".join(lines) + "\n"
