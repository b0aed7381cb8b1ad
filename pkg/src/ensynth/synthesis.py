"""Region-restricted net synthesis, marking semantics, reachability graphs.

A witness set of regions becomes an elementary net system: one boolean
place per region, one transition per event, flow arcs from the signature
(exit events consume the place, enter events produce it), and the initial
marking collects the regions containing the initial state.  Firing swaps
input places for output places; the reachability graph explores markings
breadth-first.  Degenerate witness sets yield graphs with loops or
multi-edges, so the graph is returned raw together with its validation
report instead of being rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .regions import Region
from .ts import (
    Edge,
    ParseError,
    TransitionSystem,
    ValidationReport,
    _content_lines,
    validate,
)

__all__ = [
    "ElementaryNetSystem",
    "synthesize",
    "fire",
    "ReachabilityGraph",
    "reachability_graph",
    "check_morphism",
    "ts_isomorphic",
    "language_equal",
    "parse_ens",
    "serialize_ens",
]


@dataclass(frozen=True)
class ElementaryNetSystem:
    """Places, transitions, flow arcs, initial marking."""

    places: tuple[str, ...]
    transitions: tuple[str, ...]
    flows: frozenset[tuple[str, str]]
    initial_marking: frozenset[str]

    def inputs(self, transition: str) -> frozenset[str]:
        return frozenset(p for p, t in self.flows if t == transition and p in self.places)

    def outputs(self, transition: str) -> frozenset[str]:
        return frozenset(p for t, p in self.flows if t == transition and p in self.places)


def synthesize(ts: TransitionSystem, regions: Sequence[Region]) -> ElementaryNetSystem:
    """Net whose places are the given witness regions of ``ts``.

    Place ``p<i>`` corresponds to the i-th region; (p, e) is a flow arc iff
    e exits the region, (e, p) iff e enters it; p is initially marked iff
    the region contains the initial state.
    """
    for region in regions:
        if not isinstance(region, Region):
            raise ValueError("synthesize expects Region witnesses")
        if region.system is not ts and region.system != ts:
            raise ValueError("witness region does not belong to the input TS")
    places = tuple(f"p{i}" for i in range(len(regions)))
    flows: set[tuple[str, str]] = set()
    marked: set[str] = set()
    for name, region in zip(places, regions):
        sig = region.signature
        for e in ts.events:
            v = sig[e]
            if v == -1:
                flows.add((name, e))
            elif v == 1:
                flows.add((e, name))
        if ts.initial in region:
            marked.add(name)
    return ElementaryNetSystem(places, tuple(ts.events), frozenset(flows), frozenset(marked))


def fire(
    net: ElementaryNetSystem, marking: frozenset[str], event: str
) -> Optional[frozenset[str]]:
    """Successor marking, or None when the event is not enabled.

    Enabled iff all input places are marked and no output place is; the
    result removes the inputs and adds the outputs.  An event with no flow
    arcs fires as the identity.
    """
    if event not in net.transitions:
        raise ValueError(f"unknown transition {event!r}")
    inputs = net.inputs(event)
    outputs = net.outputs(event)
    if not inputs <= marking or outputs & marking:
        return None
    return (marking - inputs) | outputs


@dataclass(frozen=True)
class ReachabilityGraph:
    """Raw reachability graph plus its validation report and marking table."""

    ts: TransitionSystem
    report: ValidationReport
    markings: dict[str, frozenset[str]]


def reachability_graph(net: ElementaryNetSystem) -> ReachabilityGraph:
    """BFS over reachable markings; states are named M0, M1, ... in BFS order.

    The result can violate loop-freeness or simplicity (e.g. flowless
    events loop on every marking), which the attached report records.
    """
    inputs = {e: net.inputs(e) for e in net.transitions}
    outputs = {e: net.outputs(e) for e in net.transitions}
    names: dict[frozenset[str], str] = {net.initial_marking: "M0"}
    order = [net.initial_marking]
    edges: list[Edge] = []
    head = 0
    while head < len(order):
        marking = order[head]
        head += 1
        for e in net.transitions:
            if not inputs[e] <= marking or outputs[e] & marking:
                continue
            nxt = (marking - inputs[e]) | outputs[e]
            name = names.get(nxt)
            if name is None:
                name = f"M{len(names)}"
                names[nxt] = name
                order.append(nxt)
            edges.append((names[marking], e, name))
    ts = TransitionSystem(
        [names[m] for m in order], net.transitions, "M0", edges
    )
    return ReachabilityGraph(ts, validate(ts), {names[m]: m for m in order})


def check_morphism(ts: TransitionSystem, regions: Sequence[Region]) -> bool:
    """Is s -> {regions containing s} a surjective morphism onto the
    reachability graph of the synthesized net?

    Every arc s -e-> s' must map to an arc between the corresponding
    markings, and every reachable marking must be hit.  This holds exactly
    when the region set is an ESSP witness.
    """
    net = synthesize(ts, regions)
    rg = reachability_graph(net)
    marking_of_state = {}
    for s in ts.states:
        marking_of_state[s] = frozenset(
            f"p{i}" for i, r in enumerate(regions) if s in r
        )
    reachable = set(rg.markings.values())
    if set(marking_of_state.values()) != reachable:
        return False
    for src, e, dst in ts.edges:
        nxt = fire(net, marking_of_state[src], e)
        if nxt != marking_of_state[dst]:
            return False
    return True


def _require_deterministic(ts: TransitionSystem, what: str) -> None:
    seen = set()
    for src, ev, _ in ts.edges:
        if (src, ev) in seen:
            raise ValueError(f"{what} requires deterministic transition systems")
        seen.add((src, ev))


def ts_isomorphic(a: TransitionSystem, b: TransitionSystem) -> bool:
    """Label- and initial-state-preserving isomorphism of deterministic TSs.

    Deterministic reachable systems admit at most one such isomorphism, so
    a canonical BFS relabeling decides it.
    """
    _require_deterministic(a, "ts_isomorphic")
    _require_deterministic(b, "ts_isomorphic")

    def canon(ts: TransitionSystem):
        index = {ts.initial: 0}
        order = [ts.initial]
        head = 0
        edges = []
        while head < len(order):
            s = order[head]
            head += 1
            for ev in sorted(ts.successors(s)):
                t = ts.successors(s)[ev]
                if t not in index:
                    index[t] = len(index)
                    order.append(t)
                edges.append((index[s], ev, index[t]))
        return (len(ts.states), len(index), sorted(set(ts.events)), edges)

    return canon(a) == canon(b)


def language_equal(a: TransitionSystem, b: TransitionSystem) -> bool:
    """Equality of the prefix-closed label languages of two deterministic TSs.

    Synchronized product traversal: the languages differ iff some reachable
    state pair enables an event on exactly one side.
    """
    _require_deterministic(a, "language_equal")
    _require_deterministic(b, "language_equal")
    seen = {(a.initial, b.initial)}
    frontier = [(a.initial, b.initial)]
    while frontier:
        sa, sb = frontier.pop()
        succ_a = a.successors(sa)
        succ_b = b.successors(sb)
        if set(succ_a) != set(succ_b):
            return False
        for ev, ta in succ_a.items():
            pair = (ta, succ_b[ev])
            if pair not in seen:
                seen.add(pair)
                frontier.append(pair)
    return True


# -- .ens file format -----------------------------------------------------


def parse_ens(text: str) -> ElementaryNetSystem:
    lines = list(_content_lines(text))
    if not lines or lines[0][1] != ".ens":
        raise ParseError("expected '.ens' header", lines[0][0] if lines else None)
    places: dict[str, None] = {}
    transitions: dict[str, None] = {}
    flows: set[tuple[str, str]] = set()
    marked: list[str] = []
    for number, line in lines[1:]:
        fields = line.split()
        if fields[0] == "place" and len(fields) == 2:
            places.setdefault(fields[1], None)
        elif fields[0] == "transition" and len(fields) == 2:
            transitions.setdefault(fields[1], None)
        elif fields[0] == "flow" and len(fields) == 4 and fields[2] == "->":
            src, dst = fields[1], fields[3]
            if src in places and dst in transitions:
                flows.add((src, dst))
            elif src in transitions and dst in places:
                flows.add((src, dst))
            else:
                raise ParseError(
                    "flow must connect a declared place and transition", number
                )
        elif fields[0] == "initial":
            for p in fields[1:]:
                if p not in places:
                    raise ParseError(f"initial references unknown place {p!r}", number)
                marked.append(p)
        else:
            raise ParseError(f"unknown directive {fields[0]!r}", number)
    return ElementaryNetSystem(
        tuple(places), tuple(transitions), frozenset(flows), frozenset(marked)
    )


def serialize_ens(net: ElementaryNetSystem) -> str:
    out = [".ens"]
    out.extend(f"place {p}" for p in net.places)
    out.extend(f"transition {t}" for t in net.transitions)
    place_set = set(net.places)
    for p in net.places:
        for t in net.transitions:
            if (p, t) in net.flows:
                out.append(f"flow {p} -> {t}")
    for t in net.transitions:
        for p in net.places:
            if (t, p) in net.flows:
                out.append(f"flow {t} -> {p}")
    marked = [p for p in net.places if p in net.initial_marking]
    if marked:
        out.append("initial " + " ".join(marked))
    return "\n".join(out) + "\n"
