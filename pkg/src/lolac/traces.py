"""Input traces and their CSV representation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import TraceFormatError
from .frontend.syntax import INT32_MAX, INT32_MIN, Type
from .frontend.typecheck import TypedSpec

_INT = re.compile(r"[+-]?[0-9]+\Z")
_BOOLS = {"true": True, "false": False, "1": True, "0": False}


@dataclass
class Trace:
    length: int
    columns: dict = field(default_factory=dict)

    def validate(self, spec: TypedSpec) -> None:
        names = {s.name for s in spec.inputs}
        if set(self.columns) != names:
            raise TraceFormatError(f"trace columns {sorted(self.columns)} do not match inputs {sorted(names)}")
        for s in spec.inputs:
            col = self.columns[s.name]
            if len(col) != self.length:
                raise TraceFormatError(f"expected {self.length} values, found {len(col)}", column=s.name)
            for k, v in enumerate(col):
                ok = isinstance(v, bool) if s.type is Type.BOOL else (
                    isinstance(v, int) and not isinstance(v, bool) and INT32_MIN <= v <= INT32_MAX
                )
                if not ok:
                    raise TraceFormatError(f"value {v!r} is not a {s.type}", row=k + 1, column=s.name)


def parse_cell(text: str, ty: Type):
    text = text.strip()
    if ty is Type.BOOL:
        return _BOOLS[text]
    if not _INT.match(text):
        raise ValueError(text)
    value = int(text, 10)
    if not INT32_MIN <= value <= INT32_MAX:
        raise ValueError(text)
    return value


def read_trace_csv(text: str, spec: TypedSpec) -> Trace:
    """Parse the trace CSV format.  Data rows are numbered from 1."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
    if not lines:
        if spec.inputs:
            return Trace(0, {s.name: [] for s in spec.inputs})
        return Trace(0, {})
    header = [h.strip() for h in lines[0].split(",")] if lines[0].strip() or spec.inputs else []
    types = {s.name: s.type for s in spec.inputs}
    seen = set()
    for h in header:
        if h not in types:
            raise TraceFormatError(f"unknown column {h!r}", row=0)
        if h in seen:
            raise TraceFormatError(f"duplicate column {h!r}", row=0)
        seen.add(h)
    missing = [n for n in types if n not in seen]
    if missing:
        raise TraceFormatError(f"missing column(s) {', '.join(missing)}", row=0)
    columns = {s.name: [] for s in spec.inputs}
    for row, line in enumerate(lines[1:], 1):
        cells = line.split(",") if header else ([] if not line.strip() else [line])
        if len(cells) != len(header):
            raise TraceFormatError(f"expected {len(header)} cells, found {len(cells)}", row=row)
        for name, cell in zip(header, cells):
            try:
                columns[name].append(parse_cell(cell, types[name]))
            except (KeyError, ValueError):
                raise TraceFormatError(f"malformed {types[name]} value {cell.strip()!r}", row, name) from None
    return Trace(len(lines) - 1, columns)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def write_trace_csv(trace: Trace, spec: TypedSpec) -> str:
    names = [s.name for s in spec.inputs]
    out = [",".join(names)]
    cols = [trace.columns[n] for n in names]
    for k in range(trace.length):
        out.append(",".join(format_value(c[k]) for c in cols))
    return "\n".join(out) + "\n"
