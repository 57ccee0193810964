"""Events, Allen interval relations and temporal consistency.

Intervals are closed ``[start, start + duration]``; point events have
duration 0. A point sitting on the start (end) of a longer interval
*starts* (*finishes*) it; ``meets`` needs both intervals to have length.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .errors import SCMError
from .kernel import (
    ALLEN_RELATIONS, Metamodel, ModelInstance, Violation, objects_of_kind, validate_model,
)

CONVERSE = {
    "before": "after", "after": "before",
    "meets": "met-by", "met-by": "meets",
    "overlaps": "overlapped-by", "overlapped-by": "overlaps",
    "during": "contains", "contains": "during",
    "starts": "started-by", "started-by": "starts",
    "finishes": "finished-by", "finished-by": "finishes",
    "equals": "equals",
}
assert set(CONVERSE) == set(ALLEN_RELATIONS)

# relation -> (earlier, later) position of its (source, target) in the precedence graph
PRECEDENCE = {"before": (0, 1), "meets": (0, 1), "after": (1, 0), "met-by": (1, 0)}


@dataclass(frozen=True)
class EventInterval:
    uuid: str
    start: int | None = None
    duration: int | None = None

    def __post_init__(self):
        if self.duration is not None and self.duration < 0:
            raise SCMError("INVALID_EVENT", f"event {self.uuid} has negative duration")

    @property
    def end(self) -> int | None:
        if self.start is None or self.duration is None:
            return None
        return self.start + self.duration


def when(e: EventInterval) -> int:
    """Timestamp (UTC seconds) at which the event starts."""
    if e.start is None:
        raise SCMError("NO_TIMESTAMP", f"event {e.uuid} has no start")
    return e.start


def infer_relation(a: EventInterval, b: EventInterval) -> str:
    """The Allen relation holding from ``a`` to ``b``."""
    if a.end is None or b.end is None:
        raise SCMError("NO_TIMESTAMP", "both events need start and duration")
    s1, e1, s2, e2 = a.start, a.end, b.start, b.end
    if e1 < s2:
        return "before"
    if e2 < s1:
        return "after"
    if s1 == s2:
        if e1 == e2:
            return "equals"
        return "starts" if e1 < e2 else "started-by"
    if e1 == e2:
        return "finishes" if s1 > s2 else "finished-by"
    # now s1 != s2, e1 != e2 and the intervals touch or overlap
    if s1 < s2:
        if e1 == s2:
            return "meets"
        return "contains" if e2 < e1 else "overlaps"
    if e2 == s1:
        return "met-by"
    return "during" if e1 < e2 else "overlapped-by"


def event_interval(model: ModelInstance, mm: Metamodel, uuid: str) -> EventInterval:
    b = mm.builtins
    values = model.get(uuid).values
    duration_attr, start_attr = b.event_attrs
    start = values.get(start_attr) or [None]
    duration = values.get(duration_attr) or [None]
    return EventInterval(uuid, start[0], duration[0])


def check_temporal_consistency(model: ModelInstance, mm: Metamodel) -> list[Violation]:
    """Report precedence cycles and relations contradicted by timestamps.

    Codes: CYCLE (before/meets chains that loop back), CONTRADICTION (an
    asserted relation differs from the one implied by both events' times).
    """
    if validate_model(model, mm):
        raise SCMError("INVALID_MODEL", f"model {model.id!r} does not conform")
    b = mm.builtins
    src_attr, tgt_attr = b.endpoint_attrs
    rel_attr = b.temporal_attrs[0]
    out = []
    succ: dict[str, set[str]] = defaultdict(set)
    for rel in objects_of_kind(model, mm, {"temporal-relation"}):
        src, tgt = rel.values[src_attr][0], rel.values[tgt_attr][0]
        relation = rel.values[rel_attr][0]
        if relation in PRECEDENCE:
            first, second = PRECEDENCE[relation]
            pair = (src, tgt)
            succ[pair[first]].add(pair[second])
        ea, eb = event_interval(model, mm, src), event_interval(model, mm, tgt)
        if ea.end is not None and eb.end is not None:
            actual = infer_relation(ea, eb)
            if actual != relation:
                out.append(Violation("CONTRADICTION", rel.uuid,
                                     f"asserted {relation} but the timestamps give {actual}"))
    cycle = _find_cycle(succ)
    if cycle:
        out.append(Violation("CYCLE", ",".join(sorted(set(cycle))),
                             "precedence cycle " + " -> ".join(cycle)))
    return sorted(out)


def _find_cycle(succ: dict[str, set[str]]) -> list[str] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[str, int] = defaultdict(int)
    nodes = sorted(set(succ) | {v for vs in succ.values() for v in vs})
    for root in nodes:
        if color[root] != WHITE:
            continue
        path = [root]
        color[root] = GREY
        stack = [iter(sorted(succ[root]))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                color[path.pop()] = BLACK
                stack.pop()
            elif color[nxt] == GREY:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append(iter(sorted(succ[nxt])))
    return None
