"""Static resolution of every stream access to a ring-buffer slot or default.

Every round commits one value per stream (a placeholder when the stream is
not evaluated in that round), so after the commit in round R slot i of
stream s holds position R - shift(s) - i.  An access that runs before its
target has been committed in the current round therefore reads one slot
closer to the front.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..analysis import AnalysisReport
from ..frontend.syntax import StreamAccess, walk
from ..frontend.typecheck import TypedSpec, fold_constants

READ = "read"
DEFAULT = "default"


@dataclass(frozen=True)
class AccessPlan:
    accessor: str
    accessed: str
    offset: int
    sync_distance: int
    committed_this_round: bool
    buffer_index: int
    default: object  # Literal or None
    # one entry per prefix round 0..preflen-1 / postfix round 1..postlen;
    # None where the accessor is not evaluated in that round
    prefix: tuple
    postfix: tuple
    node: StreamAccess  # the access occurrence in the folded expression

    def in_prefix(self, t: int):
        return self.prefix[t]

    def in_postfix(self, j: int):
        return self.postfix[j - 1]


def committed_before(report: AnalysisReport, accessor: str, accessed: str) -> bool:
    kind = report.graph.kinds[accessed]
    return kind == "input" or report.layer[accessed] < report.layer[accessor]


def evaluated_in_prefix(report: AnalysisReport, stream: str, t: int) -> bool:
    return t >= report.shift[stream]


def evaluated_in_postfix(report: AnalysisReport, stream: str, j: int) -> bool:
    return report.shift[stream] >= j


def plan_expression(spec: TypedSpec, report: AnalysisReport, name: str, expr) -> list[AccessPlan]:
    shift = report.shift
    plans = []
    for node in walk(expr):
        if not isinstance(node, StreamAccess):
            continue
        w = node.offset
        d = shift[name] - w - shift[node.stream]
        committed = committed_before(report, name, node.stream)
        index = d if committed else d - 1
        assert 0 <= index < report.slots[node.stream], (name, node, index)
        prefix = []
        for t in range(report.preflen):
            if not evaluated_in_prefix(report, name, t):
                prefix.append(None)
            else:
                # absolute target position t - shift(s) + w
                prefix.append(DEFAULT if t - shift[name] + w < 0 else READ)
        postfix = []
        for j in range(1, report.postlen + 1):
            if not evaluated_in_postfix(report, name, j):
                postfix.append(None)
            else:
                # target position relative to the last one, N: j - shift(s) + w
                postfix.append(DEFAULT if j - shift[name] + w > 0 else READ)
        plans.append(
            AccessPlan(
                accessor=name,
                accessed=node.stream,
                offset=w,
                sync_distance=d,
                committed_this_round=committed,
                buffer_index=index,
                default=node.default,
                prefix=tuple(prefix),
                postfix=tuple(postfix),
                node=node,
            )
        )
    return plans


def plan_accesses(spec: TypedSpec, report: AnalysisReport) -> list[AccessPlan]:
    consts = spec.constant_values()
    plans = []
    for s in spec.evaluated:
        plans.extend(plan_expression(spec, report, s.name, fold_constants(s.expr, consts)))
    return plans
