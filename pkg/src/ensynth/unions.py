"""Unions of disjoint transition systems, joining, region lifting, rectification.

A union treats an ordered collection of state-disjoint TSs as one system:
regions, SSP and ESSP are defined over the aggregate state set with one
shared signature, which is exactly what the region solver computes on the
disconnected graph.  ``join`` chains the components into a single TS with
fresh connector states and events; by the joining equivalence this
preserves SSP and feasibility in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .regions import Region
from .ts import Edge, ParseError, TransitionSystem, classify, linear_word, _content_lines, parse_ts

__all__ = [
    "TsUnion",
    "JoinPlan",
    "make_union",
    "join",
    "default_join_plan",
    "lift_region",
    "rectify",
    "rectified_name",
    "original_name",
    "parse_union",
    "serialize_union",
]


class TsUnion:
    """Ordered collection of state-disjoint TSs viewed as one system."""

    __slots__ = ("components", "states", "events", "edges", "component_of", "__weakref__")

    def __init__(self, components: Sequence[TransitionSystem]):
        components = tuple(components)
        if not components:
            raise ValueError("a union needs at least one component")
        states: list[str] = []
        events: dict[str, None] = {}
        edges: list[Edge] = []
        component_of: dict[str, int] = {}
        for i, comp in enumerate(components):
            for s in comp.states:
                if s in component_of:
                    raise ValueError(
                        f"state {s!r} appears in components "
                        f"{component_of[s]} and {i}"
                    )
                component_of[s] = i
                states.append(s)
            for e in comp.events:
                events.setdefault(e, None)
            edges.extend(comp.edges)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "events", tuple(events))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "component_of", component_of)

    def __setattr__(self, name, value):
        raise AttributeError("TsUnion is immutable")

    def has_edge(self, state: str, event: str) -> bool:
        comp = self.components[self.component_of[state]]
        return event in comp.events and comp.has_edge(state, event)

    @property
    def manifoldness(self) -> int:
        counts: dict[str, int] = {}
        for _, ev, _ in self.edges:
            counts[ev] = counts.get(ev, 0) + 1
        return max(counts.values(), default=0)

    def __eq__(self, other):
        if not isinstance(other, TsUnion):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"TsUnion({len(self.components)} components, {len(self.states)} states)"


def make_union(items: Iterable[TransitionSystem | TsUnion]) -> TsUnion:
    """Union of TSs and unions; nested unions are flattened in order."""
    flat: list[TransitionSystem] = []
    for item in items:
        if isinstance(item, TsUnion):
            flat.extend(item.components)
        else:
            flat.append(item)
    return TsUnion(flat)


@dataclass(frozen=True)
class JoinPlan:
    """Terminal states chosen per component (the last one is never used).

    Connector names are derived from the position: state ``z.<i>``, events
    ``y1.<i>`` and ``y2.<i>`` link terminal i-1 to the initial state of
    component i.
    """

    terminals: tuple

    def terminal(self, i: int) -> str:
        t = self.terminals[i]
        if t is None:
            raise ValueError(f"join plan names no terminal for component {i}")
        return t


def default_join_plan(union: TsUnion) -> JoinPlan:
    """Terminals default to the actual terminal state of linear components;
    non-linear components must be given explicitly."""
    terminals = []
    for comp in union.components:
        if classify(comp).linear:
            state = comp.initial
            succ = comp.successors(state)
            while succ:
                (state,) = succ.values()
                succ = comp.successors(state)
            terminals.append(state)
        else:
            terminals.append(None)
    return JoinPlan(tuple(terminals))


def join(union: TsUnion, plan: JoinPlan | None = None) -> TransitionSystem:
    """Chain the components of a union into one TS via fresh connectors."""
    if plan is None:
        plan = default_join_plan(union)
    comps = union.components
    if len(plan.terminals) != len(comps):
        raise ValueError("join plan does not match the number of components")
    for i in range(len(comps) - 1):
        t = plan.terminal(i)
        if t not in comps[i].states:
            raise ValueError(f"terminal {t!r} is not a state of component {i}")
    if len(comps) == 1:
        return comps[0]

    taken = set(union.states) | set(union.events)
    states: list[str] = list(comps[0].states)
    events: dict[str, None] = dict.fromkeys(comps[0].events)
    edges: list[Edge] = list(comps[0].edges)
    for i in range(1, len(comps)):
        z, y1, y2 = f"z.{i}", f"y1.{i}", f"y2.{i}"
        for name in (z, y1, y2):
            if name in taken:
                raise ValueError(f"connector name {name!r} clashes with the union")
        edges.append((plan.terminal(i - 1), y1, z))
        edges.append((z, y2, comps[i].initial))
        states.append(z)
        states.extend(comps[i].states)
        events[y1] = None
        events[y2] = None
        for e in comps[i].events:
            events.setdefault(e, None)
        edges.extend(comps[i].edges)
    return TransitionSystem(states, events, comps[0].initial, edges)


def lift_region(
    union: TsUnion,
    region: Region,
    extras: Sequence[TransitionSystem],
) -> Region:
    """Extend a region of ``union`` over additional linear components.

    Allowed whenever each extra component has at most one edge whose event
    carries a non-zero signature in the region; the new membership is the
    prefix up to that edge's source (signature -1) or its complement
    (signature +1), and empty when no such edge exists.  The extended
    region keeps the original signature on all old events.
    """
    if region.system is not union and region.system != union:
        raise ValueError("region does not belong to the given union")
    sig = region.signature
    members = list(region.members)
    for comp in extras:
        if not classify(comp).linear:
            raise ValueError("region lifting requires linear extra components")
        word = linear_word(comp)
        chain = [comp.initial]
        for _ in word:
            (nxt,) = comp.successors(chain[-1]).values()
            chain.append(nxt)
        constrained = [
            k for k, ev in enumerate(word) if sig.get(ev, 0) != 0
        ]
        if len(constrained) > 1:
            raise ValueError(
                f"component {comp!r} has {len(constrained)} edges with "
                "non-zero constrained signature; lifting needs at most one"
            )
        if not constrained:
            continue  # membership stays empty on this component
        k = constrained[0]
        prefix = chain[: k + 1]
        if sig[word[k]] == 1:
            members.extend(chain[k + 1:])
        else:
            members.extend(prefix)
    extended = make_union([*union.components, *extras])
    return Region.from_members(extended, members)


def rectified_name(tag: tuple[str, str], name: str) -> str:
    event, state = tag
    return f"{event}:{state}:{name}"


def original_name(name: str) -> str:
    return name.split(":", 2)[2]


def rectify(union: TsUnion, tag: tuple[str, str]) -> TsUnion:
    """Rename all states and events to (event, state, x) triples.

    Regions transport bijectively, and rectified unions with distinct tags
    are state- and event-disjoint, so independently built gadget unions can
    be aggregated without clashes.
    """
    return TsUnion(
        tuple(c.rename(lambda x: rectified_name(tag, x)) for c in union.components)
    )


# -- .union file format -------------------------------------------------


def parse_union(text: str, loader=None) -> tuple[TsUnion, "JoinPlan | None", list[str]]:
    """Parse the ``.union`` format.

    ``component <name>`` opens an inline block of ``.ts`` body lines closed
    by ``end``; ``component <name> <path>`` loads a ``.ts`` file through
    ``loader(path)``.  ``terminal <component> <state>`` lines assemble a
    join plan (None when no terminal lines appear).  Returns the union, the
    plan, and the component names.
    """
    lines = list(_content_lines(text))
    if not lines or lines[0][1] != ".union":
        raise ParseError("expected '.union' header", lines[0][0] if lines else None)
    names: list[str] = []
    components: list[TransitionSystem] = []
    terminals: dict[str, str] = {}
    i = 1
    while i < len(lines):
        number, line = lines[i]
        fields = line.split()
        if fields[0] == "component":
            if len(fields) == 2:
                name = fields[1]
                body = [".ts"]
                i += 1
                while i < len(lines) and lines[i][1] != "end":
                    body.append(lines[i][1])
                    i += 1
                if i == len(lines):
                    raise ParseError(f"unterminated component {name!r}", number)
                components.append(parse_ts("\n".join(body)))
            elif len(fields) == 3:
                name = fields[1]
                if loader is None:
                    raise ParseError("no loader for component file references", number)
                components.append(parse_ts(loader(fields[2])))
            else:
                raise ParseError("component takes a name and optional path", number)
            if name in names:
                raise ParseError(f"duplicate component name {name!r}", number)
            names.append(name)
        elif fields[0] == "terminal":
            if len(fields) != 3:
                raise ParseError("terminal takes component and state", number)
            terminals[fields[1]] = fields[2]
        else:
            raise ParseError(f"unknown directive {fields[0]!r}", number)
        i += 1
    union = TsUnion(components)
    plan = None
    if terminals:
        unknown = set(terminals) - set(names)
        if unknown:
            raise ParseError(f"terminal for unknown component {sorted(unknown)}")
        plan = JoinPlan(tuple(terminals.get(n) for n in names))
    return union, plan, names


def serialize_union(
    union: TsUnion,
    plan: JoinPlan | None = None,
    names: Sequence[str] | None = None,
) -> str:
    """Canonical inline ``.union`` text."""
    from .ts import serialize_ts

    if names is None:
        names = [f"C{i}" for i in range(len(union.components))]
    out = [".union"]
    for name, comp in zip(names, union.components):
        out.append(f"component {name}")
        body = serialize_ts(comp).splitlines()[1:]  # drop the .ts header
        out.extend(body)
        out.append("end")
    if plan is not None:
        for name, terminal in zip(names, plan.terminals):
            if terminal is not None:
                out.append(f"terminal {name} {terminal}")
    return "\n".join(out) + "\n"
