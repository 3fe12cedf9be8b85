"""Exception hierarchy shared by the compiler stages."""

from __future__ import annotations


class LolaError(Exception):
    """Base class for every error raised on account of a bad specification."""

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.message = message
        self.span = span

    def format(self, filename: str = "<spec>") -> str:
        if self.span is None:
            return f"{filename}: error: {self.message}"
        return f"{filename}:{self.span.line}:{self.span.col}: error: {self.message}"


class LexError(LolaError):
    pass


class ParseError(LolaError):
    def __init__(self, span, expected: str, found: str):
        super().__init__(f"expected {expected}, found {found}", span)
        self.expected = expected
        self.found = found


class SpecNameError(LolaError):
    """Unresolved or duplicate identifier."""


class SpecTypeError(LolaError):
    def __init__(self, span, expected, found, what: str = "expression"):
        super().__init__(f"type mismatch in {what}: expected {expected}, found {found}", span)
        self.expected = expected
        self.found = found


class DefaultTypeError(SpecTypeError):
    pass


class DivisionByZeroLiteral(LolaError):
    pass


class IllFormedSpec(LolaError):
    """The specification is not efficiently monitorable."""

    def __init__(self, verdict):
        kinds = ", ".join(e.kind for e in verdict.errors)
        super().__init__(f"specification is not efficiently monitorable ({kinds})")
        self.verdict = verdict


class EvalError(Exception):
    """Runtime evaluation fault (division by zero)."""

    def __init__(self, kind: str, position: int, stream: str, span=None, faults=None, partial=None):
        super().__init__(f"{kind.replace('_', ' ')} at position {position} in {stream}")
        self.kind = kind
        self.position = position
        self.stream = stream
        self.span = span
        # every faulting (stream, position) cell reached by the evaluation
        self.faults = faults or [(stream, position)]
        self.partial = partial


class InternalStuck(RuntimeError):
    pass


class TraceFormatError(ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.row = row
        self.column = column


class BuildError(RuntimeError):
    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


class UnsupportedSpec(LolaError):
    pass
