"""Transition systems: representation, validation, classification, text format.

A transition system is a finite edge-labeled directed graph with a
distinguished initial state.  Admissible systems are deterministic, simple,
loop-free, reachable from the initial state, and free of unused events;
``validate`` reports every violated condition instead of repairing anything,
because downstream constructions (reachability graphs in particular) produce
graphs that legitimately break simplicity or loop-freeness and still need to
be represented.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Edge",
    "TransitionSystem",
    "TsClass",
    "Violation",
    "ValidationReport",
    "ParseError",
    "validate",
    "classify",
    "linear_word",
    "parse_ts",
    "serialize_ts",
]

IDENTIFIER = re.compile(r"[A-Za-z0-9_.:+-]+\Z")

Edge = tuple[str, str, str]  # (source, event, target)


class TransitionSystem:
    """Immutable edge-labeled graph with an initial state.

    State and event identifiers are opaque strings; iteration order is
    declaration order everywhere, so that witnesses and serializations are
    reproducible.  Construction enforces referential integrity only; the
    five admissibility conditions are checked by :func:`validate`.
    """

    __slots__ = ("states", "events", "initial", "edges", "_succ", "_hash", "__weakref__")

    def __init__(
        self,
        states: Iterable[str],
        events: Iterable[str],
        initial: str,
        edges: Iterable[Edge],
    ):
        states = tuple(states)
        events = tuple(events)
        edges = tuple(tuple(e) for e in edges)
        state_set = set(states)
        event_set = set(events)
        if len(state_set) != len(states):
            raise ValueError("duplicate state declaration")
        if len(event_set) != len(events):
            raise ValueError("duplicate event declaration")
        if not states:
            raise ValueError("a transition system needs at least one state")
        if initial not in state_set:
            raise ValueError(f"initial state {initial!r} is not a declared state")
        seen = set()
        for src, ev, dst in edges:
            if src not in state_set:
                raise ValueError(f"edge references undeclared state {src!r}")
            if dst not in state_set:
                raise ValueError(f"edge references undeclared state {dst!r}")
            if ev not in event_set:
                raise ValueError(f"edge references undeclared event {ev!r}")
            if (src, ev, dst) in seen:
                raise ValueError(f"duplicate edge {(src, ev, dst)!r}")
            seen.add((src, ev, dst))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_succ", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("TransitionSystem is immutable")

    @classmethod
    def from_edges(cls, initial: str, edges: Iterable[Edge],
                   extra_events: Iterable[str] = ()) -> "TransitionSystem":
        """Build a TS declaring states/events in order of first appearance."""
        edges = [tuple(e) for e in edges]
        states: dict[str, None] = {initial: None}
        events: dict[str, None] = {}
        for src, ev, dst in edges:
            states.setdefault(src, None)
            events.setdefault(ev, None)
            states.setdefault(dst, None)
        for ev in extra_events:
            events.setdefault(ev, None)
        return cls(states, events, initial, edges)

    @classmethod
    def chain(cls, word: Sequence[str], prefix: str = "s") -> "TransitionSystem":
        """Linear TS prefix0 -word[0]-> prefix1 -...-> prefixN."""
        edges = [(f"{prefix}{i}", ev, f"{prefix}{i + 1}") for i, ev in enumerate(word)]
        return cls.from_edges(f"{prefix}0", edges)

    def successors(self, state: str) -> dict[str, str]:
        """Map event -> target for the edges leaving ``state``.

        On nondeterministic graphs the last edge wins; admissible systems
        are deterministic, so this is only a concern for raw graphs.
        """
        succ = self._succ
        if succ is None:
            succ = {s: {} for s in self.states}
            for src, ev, dst in self.edges:
                succ[src][ev] = dst
            object.__setattr__(self, "_succ", succ)
        return succ[state]

    def has_edge(self, state: str, event: str) -> bool:
        return event in self.successors(state)

    def rename(self, fn) -> "TransitionSystem":
        """Apply ``fn`` to every state and event identifier."""
        return TransitionSystem(
            [fn(s) for s in self.states],
            [fn(e) for e in self.events],
            fn(self.initial),
            [(fn(a), fn(e), fn(b)) for a, e, b in self.edges],
        )

    def __eq__(self, other):
        if not isinstance(other, TransitionSystem):
            return NotImplemented
        return (
            self.states == other.states
            and self.events == other.events
            and self.initial == other.initial
            and set(self.edges) == set(other.edges)
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.states, self.events, self.initial, frozenset(self.edges)))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return (
            f"TransitionSystem({len(self.states)} states, "
            f"{len(self.events)} events, {len(self.edges)} edges)"
        )


@dataclass(frozen=True)
class TsClass:
    """Tight structural class of a TS: k-fold, g-grade, linearity."""

    manifoldness: int
    degree: int
    linear: bool


@dataclass(frozen=True)
class Violation:
    kind: str  # deterministic | simple | loop-free | reachable | reduced
    offenders: tuple

    def __str__(self):
        items = ", ".join(map(str, self.offenders))
        return f"{self.kind}: {items}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(map(str, self.violations))


def validate(ts: TransitionSystem) -> ValidationReport:
    """Check determinism, simplicity, loop-freeness, reachability, reducedness.

    All violations are reported, not just the first.  Dangling references
    cannot occur here (the constructor rejects them); an empty event set is
    treated as a structural error because no admissible system has one.
    """
    if not ts.events:
        raise ValueError("transition system declares no events")
    violations: list[Violation] = []

    by_source_event: dict[tuple[str, str], list[Edge]] = {}
    by_ends: dict[tuple[str, str], list[Edge]] = {}
    loops = []
    for edge in ts.edges:
        src, ev, dst = edge
        by_source_event.setdefault((src, ev), []).append(edge)
        by_ends.setdefault((src, dst), []).append(edge)
        if src == dst:
            loops.append(edge)
    dups = [es for es in by_source_event.values() if len(es) > 1]
    if dups:
        violations.append(
            Violation("deterministic", tuple(e for es in dups for e in es))
        )
    multi = [es for es in by_ends.values() if len(es) > 1]
    if multi:
        violations.append(Violation("simple", tuple(e for es in multi for e in es)))
    if loops:
        violations.append(Violation("loop-free", tuple(loops)))

    reached = {ts.initial}
    frontier = [ts.initial]
    while frontier:
        state = frontier.pop()
        for dst in ts.successors(state).values():
            if dst not in reached:
                reached.add(dst)
                frontier.append(dst)
    unreached = tuple(s for s in ts.states if s not in reached)
    if unreached:
        violations.append(Violation("reachable", unreached))

    used = {ev for _, ev, _ in ts.edges}
    unused = tuple(e for e in ts.events if e not in used)
    if unused:
        violations.append(Violation("reduced", unused))

    return ValidationReport(tuple(violations))


def classify(ts: TransitionSystem) -> TsClass:
    """Tight event manifoldness k, state degree g, and linearity flag."""
    per_event: dict[str, int] = {e: 0 for e in ts.events}
    indeg: dict[str, int] = {s: 0 for s in ts.states}
    outdeg: dict[str, int] = {s: 0 for s in ts.states}
    for src, ev, dst in ts.edges:
        per_event[ev] += 1
        outdeg[src] += 1
        indeg[dst] += 1
    k = max(per_event.values(), default=0)
    g = max(max(indeg.values()), max(outdeg.values()))
    linear = g <= 1 and indeg[ts.initial] == 0
    return TsClass(manifoldness=k, degree=g, linear=linear)


def linear_word(ts: TransitionSystem) -> list[str]:
    """Event sequence e1..et of a linear TS, in chain order."""
    if not classify(ts).linear:
        raise ValueError("linear_word requires a linear transition system")
    word = []
    state = ts.initial
    for _ in range(len(ts.edges)):
        succ = ts.successors(state)
        (event, state), = succ.items()
        word.append(event)
    return word


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _check_identifier(token: str, line: int) -> str:
    if not IDENTIFIER.match(token):
        raise ParseError(f"invalid identifier {token!r}", line)
    return token


def _content_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def parse_ts(text: str) -> TransitionSystem:
    """Parse the line-based ``.ts`` format.

    Grammar: a ``.ts`` header, exactly one ``initial <state>`` line, zero or
    more ``edge <source> <event> <target>`` lines, optional ``event <name>``
    forced declarations, ``#`` comments.  States and events are declared by
    first use.
    """
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError("empty input, expected a .ts header")
    header_no, header = lines[0]
    if header != ".ts":
        raise ParseError(f"expected '.ts' header, found {header!r}", header_no)

    initial: str | None = None
    states: dict[str, None] = {}
    events: dict[str, None] = {}
    edges: list[Edge] = []
    for number, line in lines[1:]:
        fields = line.split()
        if fields[0] == "initial":
            if len(fields) != 2:
                raise ParseError("initial takes exactly one state", number)
            if initial is not None:
                raise ParseError("duplicate initial declaration", number)
            initial = _check_identifier(fields[1], number)
            states.setdefault(initial, None)
        elif fields[0] == "event":
            if len(fields) != 2:
                raise ParseError("event takes exactly one name", number)
            events.setdefault(_check_identifier(fields[1], number), None)
        elif fields[0] == "edge":
            if len(fields) != 4:
                raise ParseError("edge takes source, event, target", number)
            src, ev, dst = (_check_identifier(f, number) for f in fields[1:])
            states.setdefault(src, None)
            events.setdefault(ev, None)
            states.setdefault(dst, None)
            edges.append((src, ev, dst))
        else:
            raise ParseError(f"unknown directive {fields[0]!r}", number)
    if initial is None:
        raise ParseError("missing initial declaration")
    return TransitionSystem(states, events, initial, edges)


def serialize_ts(ts: TransitionSystem) -> str:
    """Canonical text for a TS; parse(serialize(ts)) == ts."""
    out = [".ts", f"initial {ts.initial}"]
    mentioned = {ts.initial}
    for src, ev, dst in ts.edges:
        mentioned.update((src, dst))
    used = {ev for _, ev, _ in ts.edges}
    out.extend(f"event {ev}" for ev in ts.events if ev not in used)
    out.extend(f"edge {src} {ev} {dst}" for src, ev, dst in ts.edges)
    orphan = [s for s in ts.states if s not in mentioned]
    if orphan:
        # The format cannot declare isolated non-initial states.
        raise ValueError(f"unserializable isolated states: {orphan}")
    return "\n".join(out) + "\n"
