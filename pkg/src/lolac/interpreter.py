"""Reference semantics: evaluation models over finite traces.

The interpreter fills every (stream, position) cell by a worklist fixpoint
and never consults the static analysis, so it can serve as an independent
oracle for the generated monitors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import EvalError, InternalStuck
from .frontend.syntax import Binary, Call, ConstRef, Ite, Literal, StreamAccess, Unary
from .frontend.typecheck import TypedSpec
from .traces import Trace, format_value

_HALF = 0x80000000
_MASK = 0xFFFFFFFF


def wrap32(x: int) -> int:
    return ((x + _HALF) & _MASK) - _HALF


def div_trunc(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return wrap32(q if (a < 0) == (b < 0) else -q)


def rem_trunc(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    q = q if (a < 0) == (b < 0) else -q
    return wrap32(a - b * q)


class _Missing:
    __slots__ = ()

    def __repr__(self) -> str:
        return "MISSING"


MISSING = _Missing()


class _PendingType:
    __slots__ = ()

    def __repr__(self) -> str:
        return "PENDING"


PENDING = _PendingType()


class _DivisionByZero(Exception):
    def __init__(self, span):
        self.span = span


@dataclass
class EvaluationModel:
    names: list  # outputs and triggers in declaration order
    length: int
    values: dict = field(default_factory=dict)
    firings: list = field(default_factory=list)  # (position, trigger index, message)


def eval_expr(expr, k: int, values: dict, length: int, constants: dict, on_read=None):
    """Evaluate `expr` at position `k`.

    `values` maps every stream name to its column (inputs complete, outputs
    possibly holding MISSING).  Returns PENDING when a needed cell has not
    been computed yet; raises EvalError on division by zero.
    """
    try:
        return _eval(expr, k, values, length, constants, on_read)
    except _DivisionByZero as exc:
        raise EvalError("division_by_zero", k, "<expr>", exc.span) from None


def _eval(expr, k, values, length, constants, on_read):
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, ConstRef):
        return constants[expr.name]
    if isinstance(expr, StreamAccess):
        j = k + expr.offset
        if not 0 <= j < length:
            return expr.default.value
        if on_read is not None:
            on_read(expr.stream, j)
        v = values[expr.stream][j]
        return PENDING if v is MISSING else v
    if isinstance(expr, Unary):
        v = _eval(expr.operand, k, values, length, constants, on_read)
        if v is PENDING:
            return v
        return wrap32(-v) if expr.op == "neg" else not v
    if isinstance(expr, Ite):
        c = _eval(expr.cond, k, values, length, constants, on_read)
        if c is PENDING:
            return c
        return _eval(expr.then if c else expr.orelse, k, values, length, constants, on_read)
    if isinstance(expr, Call):
        args = []
        for a in expr.args:
            v = _eval(a, k, values, length, constants, on_read)
            if v is PENDING:
                return v
            args.append(v)
        return _builtin(expr.fn, args)
    if isinstance(expr, Binary):
        a = _eval(expr.left, k, values, length, constants, on_read)
        if a is PENDING:
            return a
        b = _eval(expr.right, k, values, length, constants, on_read)
        if b is PENDING:
            return b
        return _binary(expr.op, a, b, expr.span)
    raise TypeError(f"unexpected node {expr!r}")


def _builtin(fn, args):
    if fn == "min":
        return min(args)
    if fn == "max":
        return max(args)
    if fn == "abs":
        return wrap32(abs(args[0]))
    return int(args[0])


def _binary(op, a, b, span=None):
    if op == "+":
        return wrap32(a + b)
    if op == "-":
        return wrap32(a - b)
    if op == "*":
        return wrap32(a * b)
    if op in ("/", "%"):
        if b == 0:
            raise _DivisionByZero(span)
        return div_trunc(a, b) if op == "/" else rem_trunc(a, b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "and":
        return a and b
    if op == "or":
        return a or b
    raise AssertionError(op)


# Closure compilation.  Same semantics as _eval, specialised per expression so
# long traces stay tractable; tests check both paths against each other.


class _Blocked(Exception):
    __slots__ = ("stream", "position")

    def __init__(self, stream, position):
        self.stream = stream
        self.position = position


def _compile(expr, columns, length, constants):
    if isinstance(expr, Literal):
        value = expr.value
        return lambda k: value
    if isinstance(expr, ConstRef):
        value = constants[expr.name]
        return lambda k: value
    if isinstance(expr, StreamAccess):
        col = columns[expr.stream]
        stream = expr.stream
        w = expr.offset
        if w == 0:

            def access(k):
                v = col[k]
                if v is MISSING:
                    raise _Blocked(stream, k)
                return v

            return access
        default = expr.default.value

        def shifted(k):
            j = k + w
            if 0 <= j < length:
                v = col[j]
                if v is MISSING:
                    raise _Blocked(stream, j)
                return v
            return default

        return shifted
    if isinstance(expr, Unary):
        f = _compile(expr.operand, columns, length, constants)
        if expr.op == "neg":
            return lambda k: ((_HALF - f(k)) & _MASK) - _HALF
        return lambda k: not f(k)
    if isinstance(expr, Ite):
        c = _compile(expr.cond, columns, length, constants)
        t = _compile(expr.then, columns, length, constants)
        e = _compile(expr.orelse, columns, length, constants)
        return lambda k: t(k) if c(k) else e(k)
    if isinstance(expr, Call):
        fs = [_compile(a, columns, length, constants) for a in expr.args]
        fn = expr.fn
        if fn == "min":
            f, g = fs
            return lambda k: min(f(k), g(k))
        if fn == "max":
            f, g = fs
            return lambda k: max(f(k), g(k))
        (f,) = fs
        if fn == "abs":
            return lambda k: wrap32(abs(f(k)))
        return lambda k: int(f(k))
    if isinstance(expr, Binary):
        f = _compile(expr.left, columns, length, constants)
        g = _compile(expr.right, columns, length, constants)
        op = expr.op
        if op == "+":
            return lambda k: ((f(k) + g(k) + _HALF) & _MASK) - _HALF
        if op == "-":
            return lambda k: ((f(k) - g(k) + _HALF) & _MASK) - _HALF
        if op == "*":
            return lambda k: ((f(k) * g(k) + _HALF) & _MASK) - _HALF
        if op == "<":
            return lambda k: f(k) < g(k)
        if op == "<=":
            return lambda k: f(k) <= g(k)
        if op == ">":
            return lambda k: f(k) > g(k)
        if op == ">=":
            return lambda k: f(k) >= g(k)
        if op == "==":
            return lambda k: f(k) == g(k)
        if op == "!=":
            return lambda k: f(k) != g(k)
        if op == "and":
            # both operands are evaluated, left first
            return lambda k: f(k) & g(k)
        if op == "or":
            return lambda k: f(k) | g(k)
        span = expr.span

        def divide(k):
            a = f(k)
            b = g(k)
            if b == 0:
                raise _DivisionByZero(span)
            return div_trunc(a, b) if op == "/" else rem_trunc(a, b)

        return divide
    raise TypeError(f"unexpected node {expr!r}")


def evaluate(spec: TypedSpec, trace: Trace, rng: random.Random | None = None) -> EvaluationModel:
    """Compute the evaluation model of `spec` over `trace`.

    With `rng`, cells are taken from the worklist in random order; the result
    must not depend on it.
    """
    n = trace.length
    names = [s.name for s in spec.evaluated]
    columns = {name: trace.columns[name] for name in (s.name for s in spec.inputs)}
    for name in names:
        columns[name] = [MISSING] * n
    constants = spec.constant_values()
    funcs = [_compile(s.expr, columns, n, constants) for s in spec.evaluated]
    cols = [columns[name] for name in names]
    index = {name: i for i, name in enumerate(names)}

    if rng is None:
        work = [(i, k) for k in range(n - 1, -1, -1) for i in range(len(names) - 1, -1, -1)]
    else:
        work = [(i, k) for k in range(n) for i in range(len(names))]
        rng.shuffle(work)
    waiting: dict = {}
    faults = []
    filled = 0
    while work:
        if rng is None:
            cell = work.pop()
        else:
            j = rng.randrange(len(work))
            work[j], work[-1] = work[-1], work[j]
            cell = work.pop()
        i, k = cell
        try:
            v = funcs[i](k)
        except _Blocked as blk:
            waiting.setdefault((index[blk.stream], blk.position), []).append(cell)
            continue
        except _DivisionByZero as exc:
            faults.append((k, i, exc.span))
            continue
        cols[i][k] = v
        filled += 1
        released = waiting.pop(cell, None)
        if released:
            work.extend(released)

    partial = EvaluationModel(names, n, dict(zip(names, cols)))
    for t in spec.triggers:
        col = columns[t.name]
        partial.firings.extend((k, t.index, t.message) for k in range(n) if col[k] is True)
    partial.firings.sort(key=lambda f: (f[0], f[1]))
    if faults:
        faults.sort(key=lambda f: (f[0], f[1]))
        k, i, span = faults[0]
        raise EvalError(
            "division_by_zero",
            k,
            names[i],
            span,
            faults=[(names[fi], fk) for fk, fi, _ in faults],
            partial=partial,
        )
    if filled != n * len(names):
        raise InternalStuck(f"evaluation stuck with {n * len(names) - filled} unfilled cells")
    return partial


def model_to_csv(model: EvaluationModel) -> str:
    lines = [",".join(model.names)]
    cols = [model.values[name] for name in model.names]
    for k in range(model.length):
        lines.append(",".join(format_value(c[k]) for c in cols))
    for k, index, message in model.firings:
        lines.append(f"# trigger,{k},{index},{message if message is not None else ''}")
    return "\n".join(lines) + "\n"


def format_firings(firings) -> str:
    return "".join(f"{k},{i},{m if m is not None else ''}\n" for k, i, m in firings)
