"""SSP / ESSP / feasibility deciders with witness regions.

State separation asks for a region containing one state and not the other;
event/state separation asks for a region that inhibits an event at a state
not firing it.  Both searches are polarity-normalized (membership 1/0 for
the first state, signature -1 plus membership 0 for inhibition), since the
complement region covers the opposite polarity.

The deciders reuse witnesses aggressively: every region found is applied
to all still-open queries in bulk via membership bit-vectors before the
solver is consulted again.  Queries are scanned in declaration order
(events outer, states inner), so counterexamples and witnesses are
deterministic.
"""

from __future__ import annotations

import time
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Optional

from .regions import Region, RegionConstraint, _indexed, solve_region

__all__ = [
    "SeparationQuery",
    "Verdict",
    "WitnessMap",
    "TimeoutExceeded",
    "separable",
    "inhibitable",
    "has_ssp",
    "has_essp",
    "is_feasible",
    "is_ssp_witness",
    "is_essp_witness",
]


@dataclass(frozen=True)
class SeparationQuery:
    """Either a state pair (kind 'ssp') or an event-state pair (kind 'essp')."""

    kind: str
    a: str
    b: str

    @classmethod
    def states(cls, s: str, s2: str) -> "SeparationQuery":
        return cls("ssp", s, s2)

    @classmethod
    def event_state(cls, e: str, s: str) -> "SeparationQuery":
        return cls("essp", e, s)

    def __str__(self):
        if self.kind == "ssp":
            return f"states ({self.a}, {self.b})"
        return f"event {self.a} at state {self.b}"


class TimeoutExceeded(Exception):
    def __init__(self, checked: int, total: int):
        self.checked = checked
        self.total = total
        super().__init__(f"timeout after {checked} of {total} queries")


def _answers(region: Region, query: SeparationQuery) -> bool:
    if query.kind == "ssp":
        return (query.a in region) != (query.b in region)
    v = region.signature.get(query.a, 0)
    if v == -1:
        return query.b not in region
    if v == 1:
        return query.b in region
    return False


def _has_edge(sys, state: str, event: str) -> bool:
    has_edge = getattr(sys, "has_edge", None)
    if has_edge is not None:
        return has_edge(state, event)
    return any(src == state and ev == event for src, ev, _ in sys.edges)


def _ssp_queries(sys):
    states = sys.states
    component_of = getattr(sys, "component_of", None)
    for i, s in enumerate(states):
        for s2 in states[i + 1:]:
            if component_of is None or component_of[s] == component_of[s2]:
                yield SeparationQuery.states(s, s2)


def _essp_queries(sys):
    for e in sys.events:
        for s in sys.states:
            if not _has_edge(sys, s, e):
                yield SeparationQuery.event_state(e, s)


class WitnessMap(Mapping):
    """Lazy query -> Region view backed by the found witness list.

    Lookups scan the regions for one that answers the query, so the map
    costs one region per solver call instead of one entry per query; the
    deciders guarantee that, on a holding verdict, every mandatory query is
    answered by some stored region.
    """

    def __init__(self, sys, kinds: tuple[str, ...], regions: list[Region]):
        self._sys = sys
        self._kinds = kinds
        self.regions = regions

    def _queries(self):
        if "ssp" in self._kinds:
            yield from _ssp_queries(self._sys)
        if "essp" in self._kinds:
            yield from _essp_queries(self._sys)

    def __getitem__(self, query: SeparationQuery) -> Region:
        for region in self.regions:
            if _answers(region, query):
                return region
        raise KeyError(query)

    def __iter__(self):
        return self._queries()

    def __len__(self):
        return sum(1 for _ in self._queries())


@dataclass
class Verdict:
    """Outcome of a property check with witnesses or a counterexample."""

    holds: bool
    witnesses: WitnessMap
    counterexample: Optional[SeparationQuery] = None
    failures: tuple[SeparationQuery, ...] = ()


def separable(sys, s: str, s2: str) -> Optional[Region]:
    """Region with R(s)=1, R(s2)=0, or None; polarity covers the complement."""
    if s == s2:
        raise ValueError("separable needs two distinct states")
    component_of = getattr(sys, "component_of", None)
    if component_of is not None and component_of[s] != component_of[s2]:
        raise ValueError(
            "states from different union components are separable by definition"
        )
    return solve_region(sys, RegionConstraint(membership={s: 1, s2: 0}))


def inhibitable(sys, e: str, s: str) -> Optional[Region]:
    """Region with sig(e)=-1 and R(s)=0, or None.

    Only this polarity is searched; the complement yields sig(e)=+1 with
    R(s)=1, so existence coincides.
    """
    if _has_edge(sys, s, e):
        raise ValueError(f"event {e!r} occurs at state {s!r}; the query is vacuous")
    return solve_region(
        sys, RegionConstraint(membership={s: 0}, signature={e: -1})
    )


class _Deadline:
    def __init__(self, timeout: float | None):
        self.at = None if timeout is None else time.monotonic() + timeout
        self.checked = 0
        self.total = 0

    def check(self):
        if self.at is not None and time.monotonic() > self.at:
            raise TimeoutExceeded(self.checked, self.total)


def _run_ssp(sys, deadline: _Deadline, regions: list[Region]):
    """Cover all intra-component pairs; returns a counterexample or None."""
    idx = _indexed(sys)
    n = len(idx.states)
    component_of = getattr(sys, "component_of", None)
    if component_of is None:
        comp_ids = [0] * n
    else:
        comp_ids = [component_of[s] for s in idx.states]
    comp_masks: dict[int, int] = {}
    for i, c in enumerate(comp_ids):
        comp_masks[c] = comp_masks.get(c, 0) | (1 << i)
    full = (1 << n) - 1

    sep = [0] * n

    def absorb(region: Region):
        m = region.mask
        inv = full & ~m
        for i in range(n):
            sep[i] |= inv if (m >> i) & 1 else m

    for region in regions:
        absorb(region)

    deadline.total += sum(
        bin(mask).count("1") * (bin(mask).count("1") - 1) // 2
        for mask in comp_masks.values()
    )
    for i in range(n):
        above = comp_masks[comp_ids[i]] & ~((1 << (i + 1)) - 1)
        while True:
            rem = above & ~sep[i]
            if rem == 0:
                break
            j = (rem & -rem).bit_length() - 1
            deadline.check()
            witness = solve_region(
                sys,
                RegionConstraint(membership={idx.states[i]: 1, idx.states[j]: 0}),
            )
            if witness is None:
                return SeparationQuery.states(idx.states[i], idx.states[j])
            regions.append(witness)
            absorb(witness)
        deadline.checked += bin(above).count("1")
    return None


def _run_essp(sys, deadline: _Deadline, regions: list[Region], exhaustive: bool):
    """Cover all non-vacuous (event, state) queries; returns failing queries."""
    idx = _indexed(sys)
    n = len(idx.states)
    pending: list[int] = []
    for e in idx.events:
        mask = 0
        for i, s in enumerate(idx.states):
            if not _has_edge(sys, s, e):
                mask |= 1 << i
        pending.append(mask)
    deadline.total += sum(bin(m).count("1") for m in pending)

    def absorb(region: Region):
        m = region.mask
        sig = region.signature
        for k, ev in enumerate(idx.events):
            v = sig.get(ev, 0)
            if v == -1:
                pending[k] &= m
            elif v == 1:
                pending[k] &= ~m

    for region in regions:
        absorb(region)

    failures: list[SeparationQuery] = []
    for k, e in enumerate(idx.events):
        while pending[k]:
            low = pending[k] & -pending[k]
            i = low.bit_length() - 1
            deadline.check()
            witness = solve_region(
                sys,
                RegionConstraint(membership={idx.states[i]: 0}, signature={e: -1}),
            )
            if witness is None:
                failures.append(SeparationQuery.event_state(e, idx.states[i]))
                if not exhaustive:
                    return failures
                pending[k] &= ~low
                deadline.checked += 1
                continue
            regions.append(witness)
            absorb(witness)
            deadline.checked += 1
    return failures


def has_ssp(sys, timeout: float | None = None) -> Verdict:
    """Decide the state separation property with attached witnesses."""
    deadline = _Deadline(timeout)
    regions: list[Region] = []
    counterexample = _run_ssp(sys, deadline, regions)
    witnesses = WitnessMap(sys, ("ssp",), regions)
    return Verdict(
        holds=counterexample is None,
        witnesses=witnesses,
        counterexample=counterexample,
        failures=(counterexample,) if counterexample else (),
    )


def has_essp(
    sys,
    timeout: float | None = None,
    exhaustive: bool = False,
    seed_regions: Iterable[Region] = (),
) -> Verdict:
    """Decide the event/state separation property.

    With ``exhaustive`` the verdict collects every failing query instead of
    stopping at the first.  ``seed_regions`` primes the witness cache, e.g.
    with regions found by a preceding SSP run.
    """
    deadline = _Deadline(timeout)
    regions = []
    for region in seed_regions:
        if region.system is not sys and region.system != sys:
            raise ValueError("seed region does not belong to the checked system")
        regions.append(region)
    failures = _run_essp(sys, deadline, regions, exhaustive)
    witnesses = WitnessMap(sys, ("essp",), regions)
    return Verdict(
        holds=not failures,
        witnesses=witnesses,
        counterexample=failures[0] if failures else None,
        failures=tuple(failures),
    )


def is_feasible(sys, timeout: float | None = None) -> Verdict:
    """SSP and ESSP conjoined; witnesses are shared between the two runs."""
    deadline = _Deadline(timeout)
    regions: list[Region] = []
    counterexample = _run_ssp(sys, deadline, regions)
    if counterexample is not None:
        return Verdict(
            holds=False,
            witnesses=WitnessMap(sys, ("ssp", "essp"), regions),
            counterexample=counterexample,
            failures=(counterexample,),
        )
    failures = _run_essp(sys, deadline, regions, exhaustive=False)
    return Verdict(
        holds=not failures,
        witnesses=WitnessMap(sys, ("ssp", "essp"), regions),
        counterexample=failures[0] if failures else None,
        failures=tuple(failures),
    )


def _check_witness_set(sys, regions) -> list[Region]:
    checked = []
    for region in regions:
        if not isinstance(region, Region):
            raise ValueError("witness sets contain Region values")
        if region.system is not sys and region.system != sys:
            raise ValueError("region does not belong to the checked system")
        region.signature  # raises through from_members if inconsistent
        checked.append(region)
    return checked


def is_ssp_witness(sys, regions: Iterable[Region]) -> bool:
    """True iff every intra-component state pair is separated by the set."""
    regions = _check_witness_set(sys, regions)
    idx = _indexed(sys)
    n = len(idx.states)
    full = (1 << n) - 1
    sep = [0] * n
    for region in regions:
        m = region.mask
        inv = full & ~m
        for i in range(n):
            sep[i] |= inv if (m >> i) & 1 else m
    for query in _ssp_queries(sys):
        i = idx.state_pos[query.a]
        j = idx.state_pos[query.b]
        if not (sep[i] >> j) & 1:
            return False
    return True


def is_essp_witness(sys, regions: Iterable[Region]) -> bool:
    """True iff every non-vacuous (event, state) query is answered by the set."""
    regions = _check_witness_set(sys, regions)
    idx = _indexed(sys)
    covered: dict[str, int] = {e: 0 for e in idx.events}
    full = (1 << len(idx.states)) - 1
    for region in regions:
        m = region.mask
        for ev, v in region.signature.items():
            if v == -1:
                covered[ev] |= full & ~m
            elif v == 1:
                covered[ev] |= m
    for query in _essp_queries(sys):
        if not (covered[query.a] >> idx.state_pos[query.b]) & 1:
            return False
    return True
