"""Append-only causal set of emission and absorption events."""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DuplicateEvent, UnknownEvent
from .substratum import Transaction


class EventKind(enum.Enum):
    EMISSION = "Emission"
    ABSORPTION = "Absorption"


@dataclass(frozen=True)
class Event:
    id: int
    kind: EventKind
    system: str
    tick: int


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


@dataclass
class InvariantReport:
    violations: list[Violation] = field(default_factory=list)
    n_events: int = 0
    n_links: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


class CausalSet:
    """Events join only through :meth:`add_transaction`; nothing is ever removed.

    Links are interval links (emission to its absorption) plus worldline links
    chaining consecutive events of the same system. Order truth is the link
    relation; ticks are labels.
    """

    def __init__(self):
        self._events: dict[int, Event] = {}
        self._succ: dict[int, list[int]] = {}
        self._pred: dict[int, list[int]] = {}
        self._links: set[tuple[int, int]] = set()
        self._latest: dict[str, int] = {}
        self._pairs: list[tuple[int, int]] = []
        self._watermark = (0, 0)

    @classmethod
    def from_parts(
        cls,
        events: Iterable[Event],
        links: Iterable[tuple[int, int]],
        pairs: Iterable[tuple[int, int]] = (),
    ) -> "CausalSet":
        """Assemble a causet without the growth rules (loading, fault seeding)."""
        cs = cls()
        for ev in events:
            cs._put_event(ev)
        for a, b in links:
            cs._link(a, b)
        cs._pairs = list(pairs)
        return cs

    def __len__(self) -> int:
        return len(self._events)

    def __contains__(self, event_id: int) -> bool:
        return event_id in self._events

    @property
    def events(self) -> tuple[Event, ...]:
        return tuple(self._events[k] for k in sorted(self._events))

    @property
    def links(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self._links))

    @property
    def transactions(self) -> tuple[tuple[int, int], ...]:
        return tuple(self._pairs)

    def event(self, event_id: int) -> Event:
        try:
            return self._events[event_id]
        except KeyError:
            raise UnknownEvent(f"no event {event_id}") from None

    def _put_event(self, ev: Event) -> None:
        if ev.id in self._events:
            raise DuplicateEvent(f"event {ev.id} already present")
        self._events[ev.id] = ev
        self._succ[ev.id] = []
        self._pred[ev.id] = []

    def _link(self, a: int, b: int) -> None:
        if (a, b) in self._links:
            return
        self._links.add((a, b))
        self._succ.setdefault(a, []).append(b)
        self._pred.setdefault(b, []).append(a)

    def add_transaction(self, t: Transaction) -> "CausalSet":
        em_id, ab_id = t.emission_event, t.absorption_event
        if em_id == ab_id or em_id in self._events or ab_id in self._events:
            raise DuplicateEvent(f"transaction events {em_id}/{ab_id} already present")
        em = Event(em_id, EventKind.EMISSION, t.emitter_id, t.tick)
        ab = Event(ab_id, EventKind.ABSORPTION, t.winner_system, t.tick)
        prev_em = self._latest.get(t.emitter_id)
        prev_ab = self._latest.get(t.winner_system)
        self._put_event(em)
        self._put_event(ab)
        if prev_em is not None:
            self._link(prev_em, em_id)
        self._link(em_id, ab_id)
        if prev_ab is not None:
            self._link(prev_ab, ab_id)
        self._latest[t.emitter_id] = em_id
        self._latest[t.winner_system] = ab_id
        self._pairs.append((em_id, ab_id))
        # both new events have no successors beyond em -> ab, so no cycle can close
        return self

    def precedes(self, a: int, b: int) -> bool:
        """True iff ``b`` is reachable from ``a`` through at least one link."""
        self.event(a)
        self.event(b)
        seen = set()
        queue = deque(self._succ[a])
        while queue:
            x = queue.popleft()
            if x == b:
                return True
            if x in seen:
                continue
            seen.add(x)
            queue.extend(self._succ.get(x, ()))
        return False

    def _kahn_order(self) -> list[int] | None:
        indeg = {k: 0 for k in self._events}
        for _, b in self._links:
            if b in indeg:
                indeg[b] += 1
        queue = deque(sorted(k for k, d in indeg.items() if d == 0))
        order = []
        while queue:
            x = queue.popleft()
            order.append(x)
            for y in self._succ.get(x, ()):
                indeg[y] -= 1
                if indeg[y] == 0:
                    queue.append(y)
        return order if len(order) == len(self._events) else None

    def check_invariants(self) -> InvariantReport:
        """Audit the causet; records a new watermark when clean of removals."""
        report = InvariantReport(n_events=len(self._events), n_links=len(self._links))
        bad = report.violations.append
        for a, b in sorted(self._links):
            if a not in self._events or b not in self._events:
                bad(Violation("DanglingLink", f"{a}->{b}"))
            if a == b:
                bad(Violation("Reflexive", f"self-link on {a}"))
        acyclic = self._kahn_order() is not None
        if not acyclic:
            bad(Violation("CycleDetected", "link relation contains a directed cycle"))
        for em, ab in self._pairs:
            if em not in self._events or ab not in self._events:
                bad(Violation("MissingEvent", f"transaction {em}->{ab}"))
                continue
            e, a = self._events[em], self._events[ab]
            if e.kind is not EventKind.EMISSION or a.kind is not EventKind.ABSORPTION:
                bad(Violation("KindMismatch", f"transaction {em}->{ab}"))
            if acyclic and (not self.precedes(em, ab) or self.precedes(ab, em)):
                bad(Violation("AbsorptionNotAfterEmission", f"transaction {em}->{ab}"))
            if e.tick > a.tick:
                bad(Violation("TickInversion", f"transaction {em}->{ab}"))
        for ev in self._events.values():
            if ev.kind is EventKind.ABSORPTION:
                sources = [p for p in self._pred.get(ev.id, ()) if self._events[p].kind is EventKind.EMISSION]
                if len(sources) != 1:
                    bad(Violation("AbsorptionSource", f"event {ev.id} has {len(sources)} emission parents"))
        n_ev, n_ln = self._watermark
        if len(self._events) < n_ev or len(self._links) < n_ln:
            bad(Violation("WatermarkRegression", f"had {n_ev} events / {n_ln} links"))
        else:
            self._watermark = (len(self._events), len(self._links))
        return report

    def export(self, fmt: str = "dot") -> bytes:
        fmt = fmt.lower()
        if fmt == "dot":
            return self._to_dot().encode()
        if fmt == "json":
            return self._to_json().encode()
        raise ValueError(f"unknown export format {fmt!r}")

    def _to_dot(self) -> str:
        if not self._events:
            return "digraph{}\n"
        lines = ["digraph{"]
        for ev in self.events:
            lines.append(f'  e{ev.id} [label="{ev.kind.value}@{ev.tick}", system="{ev.system}"];')
        for a, b in self.links:
            lines.append(f"  e{a} -> e{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def _to_json(self) -> str:
        doc = {
            "events": [
                {"id": ev.id, "kind": ev.kind.value, "system": ev.system, "tick": ev.tick} for ev in self.events
            ],
            "links": [list(link) for link in self.links],
            "transactions": [list(p) for p in self._pairs],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def add_transaction(cs: CausalSet, t: Transaction) -> CausalSet:
    return cs.add_transaction(t)


def precedes(cs: CausalSet, a: int, b: int) -> bool:
    return cs.precedes(a, b)


def check_invariants(cs: CausalSet) -> InvariantReport:
    return cs.check_invariants()


def export(cs: CausalSet, fmt: str = "dot") -> bytes:
    return cs.export(fmt)
