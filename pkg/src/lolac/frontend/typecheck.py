"""Name resolution and type inference: RawSpec -> TypedSpec."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import DefaultTypeError, IllFormedSpec, SpecNameError, SpecTypeError
from .syntax import (
    ARITHMETIC,
    BUILTINS,
    COMPARISON,
    EQUALITY,
    INT32_MAX,
    INT32_MIN,
    LOGICAL,
    Binary,
    Call,
    ConstDecl,
    ConstRef,
    InputDecl,
    Ite,
    Literal,
    Name,
    OutputDecl,
    RawSpec,
    StreamAccess,
    TriggerDecl,
    Type,
    Unary,
    children,
    walk,
)

_TRIGGER_NAME = re.compile(r"trigger_\d+\Z")


@dataclass(frozen=True)
class InputStream:
    name: str
    type: Type


@dataclass(frozen=True)
class Constant:
    name: str
    type: Type
    value: Literal


@dataclass(frozen=True)
class OutputStream:
    name: str
    type: Type
    expr: object
    kind: str = "output"


@dataclass(frozen=True)
class Trigger:
    index: int
    expr: object
    message: str | None = None

    @property
    def name(self) -> str:
        return f"trigger_{self.index}"

    @property
    def type(self) -> Type:
        return Type.BOOL

    kind = "trigger"


@dataclass
class TypedSpec:
    inputs: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    triggers: list = field(default_factory=list)
    # outputs and triggers interleaved in declaration order
    evaluated: list = field(default_factory=list)
    kinds: dict = field(default_factory=dict)

    def stream(self, name: str):
        for s in self.inputs:
            if s.name == name:
                return s
        for s in self.evaluated:
            if s.name == name:
                return s
        raise KeyError(name)

    def type_of(self, name: str) -> Type:
        return self.stream(name).type

    @property
    def node_names(self) -> list[str]:
        return [s.name for s in self.inputs] + [s.name for s in self.evaluated]

    def constant_values(self) -> dict:
        return {c.name: c.value.value for c in self.constants}


def _lit_type(lit: Literal) -> Type:
    return Type.BOOL if isinstance(lit.value, bool) else Type.INT32


def _check_literal(lit: Literal) -> Literal:
    if not isinstance(lit.value, bool) and not INT32_MIN <= lit.value <= INT32_MAX:
        raise SpecTypeError(lit.span, "Int32 literal", str(lit.value), "literal (out of range)")
    return Literal(lit.value, lit.span, _lit_type(lit))


class _InferenceCycle(SpecTypeError):
    pass


def _untyped_graph(raw: RawSpec, kinds: dict):
    """Dependency graph straight from the syntax, for specs that cannot be typed."""
    from ..analysis import DependencyGraph, Edge

    nodes, node_kinds, edges = [], {}, []
    for decl in raw.declarations:
        if isinstance(decl, InputDecl):
            for name in decl.names:
                nodes.append(name)
                node_kinds[name] = "input"
    index = 0
    for decl in raw.declarations:
        if isinstance(decl, (OutputDecl, TriggerDecl)):
            if isinstance(decl, OutputDecl):
                name, kind = decl.name, "output"
            else:
                name, kind = f"trigger_{index}", "trigger"
                index += 1
            nodes.append(name)
            node_kinds[name] = kind
            for node in walk(decl.expr):
                if isinstance(node, Name) and kinds.get(node.name) in ("input", "output"):
                    edges.append(Edge(name, 0, node.name))
                elif isinstance(node, StreamAccess) and kinds.get(node.stream) in ("input", "output"):
                    edges.append(Edge(name, node.offset, node.stream))
    return DependencyGraph(nodes, node_kinds, edges)


class _Checker:
    def __init__(self):
        self.kinds: dict[str, str] = {}
        self.types: dict[str, Type] = {}
        self.constants: dict[str, Constant] = {}
        # outputs whose type is still being inferred (guards inference cycles)
        self.pending: dict[str, OutputDecl] = {}
        self.inferring: set[str] = set()

    def declare(self, name: str, kind: str, span) -> None:
        if name in self.kinds:
            raise SpecNameError(f"duplicate declaration of '{name}'", span)
        if name in BUILTINS or name == "ite":
            raise SpecNameError(f"'{name}' is a built-in function and cannot be declared", span)
        if _TRIGGER_NAME.match(name):
            raise SpecNameError(f"'{name}' is reserved for trigger streams", span)
        self.kinds[name] = kind

    def stream_type(self, name: str, span, hint: Type | None = None) -> Type:
        if name in self.types:
            return self.types[name]
        decl = self.pending.get(name)
        if decl is None:
            raise SpecNameError(f"unresolved identifier '{name}'", span)
        if name in self.inferring:
            # a recursive access's default literal fixes the type; the
            # definition is re-checked against the final type afterwards
            if hint is not None:
                return hint
            raise _InferenceCycle(span, "an explicit type annotation", "a cyclic type inference", f"output '{name}'")
        self.inferring.add(name)
        ty = self.check(decl.expr).ty
        self.inferring.discard(name)
        self.types[name] = ty
        return ty

    def check(self, expr):
        if isinstance(expr, Literal):
            return _check_literal(expr)
        if isinstance(expr, Name):
            if self.kinds.get(expr.name) == "constant":
                c = self.constants[expr.name]
                return ConstRef(expr.name, expr.span, c.type)
            ty = self.stream_type(expr.name, expr.span)
            return StreamAccess(expr.name, 0, None, expr.span, ty)
        if isinstance(expr, ConstRef):
            return ConstRef(expr.name, expr.span, self.constants[expr.name].type)
        if isinstance(expr, StreamAccess):
            if self.kinds.get(expr.stream) == "constant":
                raise SpecNameError(f"constant '{expr.stream}' cannot be accessed with an offset", expr.span)
            hint = _lit_type(expr.default) if expr.default is not None else None
            ty = self.stream_type(expr.stream, expr.span, hint)
            default = None
            if expr.default is not None:
                default = _check_literal(expr.default)
                if default.ty is not ty:
                    raise DefaultTypeError(expr.default.span, ty, default.ty, f"default of access to '{expr.stream}'")
            return StreamAccess(expr.stream, expr.offset, default, expr.span, ty)
        if isinstance(expr, Unary):
            operand = self.check(expr.operand)
            want = Type.INT32 if expr.op == "neg" else Type.BOOL
            self.expect(operand, want, "operand of " + ("'-'" if expr.op == "neg" else "'!'"))
            return Unary(expr.op, operand, expr.span, want)
        if isinstance(expr, Binary):
            left, right = self.check(expr.left), self.check(expr.right)
            op = expr.op
            if op in ARITHMETIC or op in COMPARISON:
                self.expect(left, Type.INT32, f"left operand of '{op}'")
                self.expect(right, Type.INT32, f"right operand of '{op}'")
                ty = Type.INT32 if op in ARITHMETIC else Type.BOOL
            elif op in EQUALITY:
                self.expect(right, left.ty, f"right operand of '{op}'")
                ty = Type.BOOL
            elif op in LOGICAL:
                self.expect(left, Type.BOOL, f"left operand of '{op}'")
                self.expect(right, Type.BOOL, f"right operand of '{op}'")
                ty = Type.BOOL
            else:
                raise AssertionError(op)
            return Binary(op, left, right, expr.span, ty)
        if isinstance(expr, Ite):
            cond = self.check(expr.cond)
            self.expect(cond, Type.BOOL, "condition")
            then, orelse = self.check(expr.then), self.check(expr.orelse)
            self.expect(orelse, then.ty, "else branch")
            return Ite(cond, then, orelse, expr.span, then.ty)
        if isinstance(expr, Call):
            arity = BUILTINS[expr.fn]
            if len(expr.args) != arity:
                raise SpecTypeError(expr.span, f"{arity} argument(s)", f"{len(expr.args)}", f"call to {expr.fn}")
            args = tuple(self.check(a) for a in expr.args)
            want = Type.BOOL if expr.fn == "int" else Type.INT32
            for a in args:
                self.expect(a, want, f"argument of {expr.fn}")
            return Call(expr.fn, args, expr.span, Type.INT32)
        raise TypeError(f"unexpected node {expr!r}")

    @staticmethod
    def expect(node, ty: Type, what: str) -> None:
        if node.ty is not ty:
            raise SpecTypeError(node.span, ty, node.ty, what)


def resolve_and_typecheck(raw: RawSpec) -> TypedSpec:
    chk = _Checker()
    spec = TypedSpec()
    for decl in raw.declarations:
        if isinstance(decl, InputDecl):
            for name in decl.names:
                chk.declare(name, "input", decl.span)
                chk.types[name] = decl.type
                spec.inputs.append(InputStream(name, decl.type))
        elif isinstance(decl, ConstDecl):
            chk.declare(decl.name, "constant", decl.span)
            value = _check_literal(decl.value)
            if value.ty is not decl.type:
                raise SpecTypeError(decl.value.span, decl.type, value.ty, f"value of constant '{decl.name}'")
            const = Constant(decl.name, decl.type, value)
            chk.constants[decl.name] = const
            spec.constants.append(const)
        elif isinstance(decl, OutputDecl):
            chk.declare(decl.name, "output", decl.span)
            if decl.type is not None:
                chk.types[decl.name] = decl.type
            else:
                chk.pending[decl.name] = decl

    try:
        _check_definitions(chk, spec, raw)
    except _InferenceCycle as exc:
        # a cycle of offset-0 accesses cannot be typed, but it is first of
        # all not monitorable; report the structural problem when there is one
        from ..analysis import check_well_formed

        verdict = check_well_formed(_untyped_graph(raw, chk.kinds))
        if not verdict.ok:
            raise IllFormedSpec(verdict) from None
        raise
    spec.kinds = dict(chk.kinds)
    for t in spec.triggers:
        spec.kinds[t.name] = "trigger"
    return spec


def _check_definitions(chk: _Checker, spec: TypedSpec, raw: RawSpec) -> None:
    trigger_index = 0
    for decl in raw.declarations:
        if isinstance(decl, OutputDecl):
            expr = chk.check(decl.expr)
            declared = decl.type if decl.type is not None else chk.stream_type(decl.name, decl.span)
            if expr.ty is not declared:
                raise SpecTypeError(expr.span, declared, expr.ty, f"definition of output '{decl.name}'")
            out = OutputStream(decl.name, declared, expr)
            spec.outputs.append(out)
            spec.evaluated.append(out)
        elif isinstance(decl, TriggerDecl):
            expr = chk.check(decl.expr)
            chk.expect(expr, Type.BOOL, "trigger condition")
            trig = Trigger(trigger_index, expr, decl.message)
            trigger_index += 1
            spec.triggers.append(trig)
            spec.evaluated.append(trig)


def fold_constants(expr, constants: dict):
    """Replace ConstRef nodes by typed literals."""
    if isinstance(expr, ConstRef):
        return Literal(constants[expr.name], expr.span, expr.ty)
    kids = children(expr)
    if not kids:
        return expr
    folded = tuple(fold_constants(k, constants) for k in kids)
    if isinstance(expr, Unary):
        return Unary(expr.op, folded[0], expr.span, expr.ty)
    if isinstance(expr, Binary):
        return Binary(expr.op, folded[0], folded[1], expr.span, expr.ty)
    if isinstance(expr, Ite):
        return Ite(*folded, expr.span, expr.ty)
    return Call(expr.fn, folded, expr.span, expr.ty)
