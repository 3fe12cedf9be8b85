"""Dependency graph, shifts, evaluation layers, memory plan, and lints."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DivisionByZeroLiteral, IllFormedSpec
from .frontend.syntax import Binary, Literal, Unary, accesses, format_expr, walk
from .frontend.typecheck import TypedSpec, fold_constants


@dataclass(frozen=True)
class Edge:
    accessor: str
    offset: int
    accessed: str


@dataclass(frozen=True)
class SyncEdge:
    accessor: str
    distance: int
    accessed: str
    offset: int


@dataclass
class DependencyGraph:
    nodes: list  # names, inputs first then outputs/triggers in declaration order
    kinds: dict  # name -> "input" | "output" | "trigger"
    edges: list = field(default_factory=list)

    def outgoing(self, node: str):
        return [e for e in self.edges if e.accessor == node]


@dataclass
class CycleWitness:
    kind: str  # "positive_cycle" | "zero_sync_cycle"
    nodes: list
    edges: list  # Edge for positive cycles, SyncEdge for zero-sync cycles

    @property
    def weight(self) -> int:
        return sum(e.offset if isinstance(e, Edge) else e.distance for e in self.edges)

    def describe(self) -> str:
        parts = []
        for e in self.edges:
            label = f"{e.offset:+d}" if isinstance(e, Edge) else f"d={e.distance}"
            parts.append(f"{e.accessor} -({label})-> {e.accessed}")
        return "; ".join(parts)


@dataclass
class WellFormednessVerdict:
    ok: bool
    errors: list = field(default_factory=list)


@dataclass(frozen=True)
class Lint:
    code: str
    stream: str
    message: str
    span: object = None


@dataclass
class AnalysisReport:
    graph: DependencyGraph
    shift: dict
    sync_edges: list
    layer: dict
    total_order: list
    memreq: dict
    slots: dict
    memcon: int
    preflen: int
    postlen: int
    lints: list
    outgoing_memreq: dict
    types: dict

    @property
    def layers(self) -> list[list[str]]:
        """Outputs/triggers grouped per layer, in total order."""
        if not self.layer:
            return []
        grouped = [[] for _ in range(max(self.layer.values()))]
        for name in self.total_order:
            grouped[self.layer[name] - 1].append(name)
        return grouped

    def to_json(self) -> dict:
        streams = []
        for name in self.graph.nodes:
            streams.append(
                {
                    "name": name,
                    "kind": self.graph.kinds[name],
                    "type": str(self.types[name]),
                    "shift": self.shift[name],
                    "layer": self.layer.get(name, 0),
                    "memreq": self.memreq[name],
                    "slots": self.slots[name],
                    "outgoing_memreq": self.outgoing_memreq[name],
                }
            )
        edges = [
            {"from": e.accessor, "offset": e.offset, "to": e.accessed, "sync_distance": e.distance}
            for e in self.sync_edges
        ]
        return {
            "streams": streams,
            "edges": edges,
            "preflen": self.preflen,
            "postlen": self.postlen,
            "memcon_bytes": self.memcon,
            "lints": [{"code": l.code, "stream": l.stream, "message": l.message} for l in self.lints],
        }


def build_dependency_graph(spec: TypedSpec) -> DependencyGraph:
    nodes = [s.name for s in spec.inputs] + [s.name for s in spec.evaluated]
    kinds = {s.name: "input" for s in spec.inputs}
    kinds.update({s.name: s.kind for s in spec.evaluated})
    consts = spec.constant_values()
    edges = []
    for s in spec.evaluated:
        for acc in accesses(fold_constants(s.expr, consts)):
            edges.append(Edge(s.name, acc.offset, acc.stream))
    return DependencyGraph(nodes, kinds, edges)


def _positive_cycle(graph: DependencyGraph):
    """Bellman-Ford on maximal path weight; returns a positive cycle or None."""
    dist = {n: 0 for n in graph.nodes}
    pred: dict = {}
    updated = None
    for _ in range(len(graph.nodes)):
        updated = None
        for e in graph.edges:
            # shift(s) >= w + shift(s'): relax the accessor from the accessed node
            cand = dist[e.accessed] + e.offset
            if cand > dist[e.accessor]:
                dist[e.accessor] = cand
                pred[e.accessor] = e
                updated = e.accessor
        if updated is None:
            return None
    if updated is None:
        return None
    # walk back far enough to be inside the cycle
    node = updated
    for _ in range(len(graph.nodes)):
        node = pred[node].accessed
    cycle_edges = []
    cur = node
    while True:
        e = pred[cur]
        cycle_edges.append(e)
        cur = e.accessed
        if cur == node:
            break
    witness = CycleWitness("positive_cycle", [e.accessor for e in cycle_edges], cycle_edges)
    assert witness.weight > 0, witness
    return witness


def compute_shifts(graph: DependencyGraph) -> dict:
    shift = {n: 0 for n in graph.nodes}
    for _ in range(len(graph.nodes) + 1):
        changed = False
        for e in graph.edges:
            cand = e.offset + shift[e.accessed]
            if cand > shift[e.accessor]:
                shift[e.accessor] = cand
                changed = True
        if not changed:
            return shift
    raise RuntimeError("positive cycle escaped the well-formedness check")


def synchronize_edges(graph: DependencyGraph, shift: dict) -> list[SyncEdge]:
    return [
        SyncEdge(e.accessor, shift[e.accessor] - e.offset - shift[e.accessed], e.accessed, e.offset)
        for e in graph.edges
    ]


def _zero_sync_cycle(graph: DependencyGraph, sync_edges: list[SyncEdge]):
    succ: dict = {n: [] for n in graph.nodes}
    for e in sync_edges:
        if e.distance == 0:
            succ[e.accessor].append(e)
    color = {n: 0 for n in graph.nodes}  # 0 new, 1 on stack, 2 done
    stack: list = []

    def visit(n):
        color[n] = 1
        for e in succ[n]:
            stack.append(e)
            if color[e.accessed] == 1:
                start = next(i for i, x in enumerate(stack) if x.accessor == e.accessed)
                return list(stack[start:])
            if color[e.accessed] == 0:
                found = visit(e.accessed)
                if found:
                    return found
            stack.pop()
        color[n] = 2
        return None

    for n in graph.nodes:
        if color[n] == 0:
            found = visit(n)
            if found:
                return CycleWitness("zero_sync_cycle", [e.accessor for e in found], found)
    return None


def check_well_formed(graph: DependencyGraph) -> WellFormednessVerdict:
    witness = _positive_cycle(graph)
    if witness is not None:
        return WellFormednessVerdict(False, [witness])
    shift = compute_shifts(graph)
    witness = _zero_sync_cycle(graph, synchronize_edges(graph, shift))
    if witness is not None:
        return WellFormednessVerdict(False, [witness])
    return WellFormednessVerdict(True)


def compute_layers(sync_edges: list[SyncEdge], spec: TypedSpec):
    evaluated = [s.name for s in spec.evaluated]
    before: dict = {n: set() for n in evaluated}
    for e in sync_edges:
        if e.distance == 0 and e.accessed in before:
            before[e.accessor].add(e.accessed)
    layer: dict = {}

    def depth(n, seen=()):
        if n in layer:
            return layer[n]
        if n in seen:
            raise RuntimeError(f"zero-sync cycle through {n}")
        layer[n] = 1 + max((depth(m, seen + (n,)) for m in before[n]), default=0)
        return layer[n]

    for n in evaluated:
        depth(n)
    index = {n: i for i, n in enumerate(evaluated)}
    order = sorted(evaluated, key=lambda n: (layer[n], index[n]))
    return layer, order


def compute_memory(sync_edges: list[SyncEdge], spec: TypedSpec):
    memreq = {n: 0 for n in spec.node_names}
    for e in sync_edges:
        memreq[e.accessed] = max(memreq[e.accessed], e.distance)
    slots = {n: m + 1 for n, m in memreq.items()}
    memcon = sum(slots[n] * spec.type_of(n).size for n in spec.node_names)
    return memreq, slots, memcon


def compute_phase_lengths(shift: dict, memreq: dict):
    preflen = max((shift[n] + memreq[n] for n in shift), default=0)
    postlen = max(shift.values(), default=0)
    return preflen, postlen


def _nonzero_literal(expr) -> bool:
    if isinstance(expr, Unary) and expr.op == "neg":
        expr = expr.operand
    return isinstance(expr, Literal) and expr.value != 0


def _zero_literal(expr) -> bool:
    if isinstance(expr, Unary) and expr.op == "neg":
        expr = expr.operand
    return isinstance(expr, Literal) and not isinstance(expr.value, bool) and expr.value == 0


def lint(spec: TypedSpec) -> list[Lint]:
    consts = spec.constant_values()
    warnings = []
    accessed_by_others = set()
    for s in spec.evaluated:
        expr = fold_constants(s.expr, consts)
        for acc in accesses(expr):
            if acc.stream != s.name:
                accessed_by_others.add(acc.stream)
        for node in walk(expr):
            if isinstance(node, Binary) and node.op in ("/", "%"):
                if _zero_literal(node.right):
                    raise DivisionByZeroLiteral(f"division by literal zero in '{s.name}'", node.span)
                if not _nonzero_literal(node.right):
                    warnings.append(
                        Lint(
                            "possible-division-by-zero",
                            s.name,
                            f"denominator of '{format_expr(node)}' in '{s.name}' may be zero",
                            node.span,
                        )
                    )
    for out in spec.outputs:
        if out.name not in accessed_by_others:
            warnings.append(Lint("unused-stream", out.name, f"output '{out.name}' is never accessed", None))
    return warnings


def analyze(spec: TypedSpec) -> AnalysisReport:
    """Run the full analysis; raises IllFormedSpec for non-monitorable specs."""
    graph = build_dependency_graph(spec)
    verdict = check_well_formed(graph)
    if not verdict.ok:
        raise IllFormedSpec(verdict)
    shift = compute_shifts(graph)
    sync = synchronize_edges(graph, shift)
    layer, order = compute_layers(sync, spec)
    memreq, slots, memcon = compute_memory(sync, spec)
    preflen, postlen = compute_phase_lengths(shift, memreq)
    outgoing = {n: 0 for n in graph.nodes}
    for e in sync:
        # the same maximum taken over accesses made by s, for comparison
        outgoing[e.accessor] = max(outgoing[e.accessor], e.distance)
    types = {n: spec.type_of(n) for n in graph.nodes}
    return AnalysisReport(
        graph=graph,
        shift=shift,
        sync_edges=sync,
        layer=layer,
        total_order=order,
        memreq=memreq,
        slots=slots,
        memcon=memcon,
        preflen=preflen,
        postlen=postlen,
        lints=lint(spec),
        outgoing_memreq=outgoing,
        types=types,
    )


def format_report(report: AnalysisReport) -> str:
    rows = [("stream", "kind", "type", "shift", "layer", "memreq", "slots", "outgoing")]
    for n in report.graph.nodes:
        rows.append(
            (
                n,
                report.graph.kinds[n],
                str(report.types[n]),
                str(report.shift[n]),
                str(report.layer.get(n, 0)),
                str(report.memreq[n]),
                str(report.slots[n]),
                str(report.outgoing_memreq[n]),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.append("")
    lines.append(f"preflen={report.preflen} postlen={report.postlen} memcon={report.memcon} bytes")
    for i, group in enumerate(report.layers, 1):
        lines.append(f"layer {i}: {', '.join(group)}")
    for l in report.lints:
        lines.append(f"warning[{l.code}]: {l.message}")
    return "\n".join(lines) + "\n"
