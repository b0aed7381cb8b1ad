"""Regions of transition systems and unions, and the region solver.

A region is a state subset R whose characteristic function extends to a
signature sig: E -> {-1,0,+1} with R(s') = R(s) + sig(e) on every edge
s -e-> s'.  The signature is unique, so regions are canonicalized by their
membership bit-vector and the signature is always derived, never stored.

Two engines are provided:

* :func:`enumerate_regions` -- brute force over all 2^|S| subsets, the
  independent oracle used by the test suite (capped, default 22 states).
* :func:`solve_region` / :func:`solve_all_regions` -- constraint
  propagation over the edge equations with backtracking, which scales to
  the generated reduction instances.  Propagation maintains domains for
  every membership bit and every signature value and runs the edge
  equation as an arc-consistency rule; branching is restricted to events
  in the constraint's cone of influence first, so gadget chains collapse
  deterministically and search is confined to genuine choices (for the
  generated instances: the translator trichotomy).  Worst-case behavior
  on arbitrary inputs remains exponential.

Any object with ``states``, ``events`` and ``edges`` attributes is
accepted as a system, so unions are handled exactly like single
transition systems (a union is just a disconnected graph).
"""

from __future__ import annotations

import weakref
from collections import deque
from heapq import heappop, heappush
from typing import Iterable, Mapping, Optional

__all__ = [
    "Region",
    "RegionConstraint",
    "check_region",
    "complement",
    "enumerate_regions",
    "solve_region",
    "solve_all_regions",
    "aggregate_signature",
    "format_region",
]

# Domain encodings: membership bit0 = "0 allowed", bit1 = "1 allowed";
# signature bit0 = -1, bit1 = 0, bit2 = +1.
_MEM_ALL = 0b11
_SIG_ALL = 0b111
_SIG_BIT = {-1: 0b001, 0: 0b010, 1: 0b100}


class _Index:
    """Integer-indexed view of a system, cached on the system object."""

    __slots__ = (
        "states", "events", "state_pos", "event_pos",
        "esrc", "eev", "edst", "event_edges", "state_edges", "event_count",
    )

    def __init__(self, sys):
        self.states = tuple(sys.states)
        self.events = tuple(sys.events)
        self.state_pos = {s: i for i, s in enumerate(self.states)}
        self.event_pos = {e: i for i, e in enumerate(self.events)}
        esrc, eev, edst = [], [], []
        self.event_edges = [[] for _ in self.events]
        self.state_edges = [[] for _ in self.states]
        for src, ev, dst in sys.edges:
            eid = len(esrc)
            s, e, t = self.state_pos[src], self.event_pos[ev], self.state_pos[dst]
            esrc.append(s)
            eev.append(e)
            edst.append(t)
            self.event_edges[e].append(eid)
            self.state_edges[s].append(eid)
            self.state_edges[t].append(eid)
        self.esrc, self.eev, self.edst = tuple(esrc), tuple(eev), tuple(edst)
        self.event_count = tuple(len(es) for es in self.event_edges)


_INDEX_CACHE = weakref.WeakKeyDictionary()


def _indexed(sys) -> _Index:
    try:
        return _INDEX_CACHE[sys]
    except (KeyError, TypeError):
        pass
    idx = _Index(sys)
    try:
        _INDEX_CACHE[sys] = idx
    except TypeError:
        pass
    return idx


class Region:
    """A valid region: a system, a membership bit-vector, a derived signature."""

    __slots__ = ("system", "mask", "_signature")

    def __init__(self, system, mask: int, _signature=None):
        self.system = system
        self.mask = mask
        self._signature = _signature

    @classmethod
    def from_members(cls, system, members: Iterable[str]) -> "Region":
        """Build and validate a region from a set of state names."""
        idx = _indexed(system)
        mask = 0
        for s in members:
            mask |= 1 << idx.state_pos[s]
        sig = _signature_of_mask(idx, mask)
        if sig is None:
            raise ValueError("membership set is not a region of the system")
        region = cls(system, mask)
        region._signature = sig
        return region

    @property
    def members(self) -> tuple[str, ...]:
        idx = _indexed(self.system)
        mask = self.mask
        return tuple(s for i, s in enumerate(idx.states) if (mask >> i) & 1)

    def __contains__(self, state: str) -> bool:
        idx = _indexed(self.system)
        return (self.mask >> idx.state_pos[state]) & 1 == 1

    def membership(self, state: str) -> int:
        return 1 if state in self else 0

    @property
    def signature(self) -> dict[str, int]:
        if self._signature is None:
            idx = _indexed(self.system)
            sig = _signature_of_mask(idx, self.mask)
            assert sig is not None, "Region invariant violated"
            self._signature = sig
        return self._signature

    def sig(self, event: str) -> int:
        return self.signature[event]

    @property
    def exit_events(self) -> tuple[str, ...]:
        return tuple(e for e, v in self.signature.items() if v == -1)

    @property
    def enter_events(self) -> tuple[str, ...]:
        return tuple(e for e, v in self.signature.items() if v == 1)

    @property
    def obey_events(self) -> tuple[str, ...]:
        return tuple(e for e, v in self.signature.items() if v == 0)

    def complement(self) -> "Region":
        idx = _indexed(self.system)
        full = (1 << len(idx.states)) - 1
        other = Region(self.system, full & ~self.mask)
        if self._signature is not None:
            other._signature = {e: -v for e, v in self._signature.items()}
        return other

    def restrict(self, system) -> "Region":
        """Project onto a sub-system (component of a union) by state names."""
        return Region.from_members(system, [s for s in system.states if s in self])

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.mask == other.mask and (
            self.system is other.system or self.system == other.system
        )

    def __hash__(self):
        return hash(self.mask)

    def __repr__(self):
        return f"Region({{{', '.join(self.members)}}})"


def _signature_of_mask(idx: _Index, mask: int) -> Optional[dict[str, int]]:
    sig_list = [None] * len(idx.events)
    for eid in range(len(idx.esrc)):
        d = ((mask >> idx.edst[eid]) & 1) - ((mask >> idx.esrc[eid]) & 1)
        e = idx.eev[eid]
        prev = sig_list[e]
        if prev is None:
            sig_list[e] = d
        elif prev != d:
            return None
    return {ev: (sig_list[i] if sig_list[i] is not None else 0)
            for i, ev in enumerate(idx.events)}


def check_region(sys, members: Iterable[str]) -> Optional[dict[str, int]]:
    """Signature of the membership set if it is a region, else ``None``.

    Events without any edge get signature 0.
    """
    idx = _indexed(sys)
    mask = 0
    for s in members:
        mask |= 1 << idx.state_pos[s]
    return _signature_of_mask(idx, mask)


def complement(region: Region) -> Region:
    return region.complement()


class RegionConstraint:
    """Partial membership/signature requirements for the solver.

    Accepts mappings or iterables of pairs; conflicting duplicate entries
    are rejected at construction, unknown names at solve time.
    """

    __slots__ = ("membership", "signature")

    def __init__(self, membership=(), signature=()):
        self.membership = self._collect("membership", membership, (0, 1))
        self.signature = self._collect("signature", signature, (-1, 0, 1))

    @staticmethod
    def _collect(label, pairs, allowed) -> dict[str, int]:
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        out: dict[str, int] = {}
        for key, value in items:
            if value not in allowed:
                raise ValueError(f"{label} value {value!r} for {key!r} not in {allowed}")
            if key in out and out[key] != value:
                raise ValueError(
                    f"conflicting {label} constraint for {key!r}: "
                    f"{out[key]} vs {value}"
                )
            out[key] = value
        return out

    def __repr__(self):
        return f"RegionConstraint(membership={self.membership}, signature={self.signature})"


class _Unsatisfiable(Exception):
    pass


class _Solver:
    """Backtracking search over membership/signature domains.

    Edges of globally-unique events are excluded from propagation unless
    the constraint pins their signature: a single-occurrence event absorbs
    any membership difference, so such edges never constrain anything and
    their signature is derived from the solution afterwards.
    """

    def __init__(self, sys, constraint: RegionConstraint):
        idx = _indexed(sys)
        self.idx = idx
        self.n_states = len(idx.states)
        self.n_events = len(idx.events)
        self.mem = bytearray([_MEM_ALL] * self.n_states)
        self.sig = bytearray([_SIG_ALL] * self.n_events)
        self.queue: deque[int] = deque()

        for name in constraint.membership:
            if name not in idx.state_pos:
                raise KeyError(f"unknown state {name!r} in constraint")
        for name in constraint.signature:
            if name not in idx.event_pos:
                raise KeyError(f"unknown event {name!r} in constraint")

        pinned = {idx.event_pos[ev] for ev in constraint.signature}
        self.active_edge = [
            idx.event_count[idx.eev[eid]] > 1 or idx.eev[eid] in pinned
            for eid in range(len(idx.esrc))
        ]
        # Events eligible for branching, in declaration order.  `touched`
        # tracks the constraint's cone of influence; touched events are
        # branched first, ordered by declaration (a min-heap with lazy
        # deletion).  Generated gadget unions declare events in chain
        # order, so this keeps conflicting choices chronologically close
        # and stops local conflicts from being re-proved under unrelated
        # assignments.
        self.branch_events = [
            e
            for e in range(self.n_events)
            if idx.event_count[e] > 1 or e in pinned
        ]
        self.branchable = bytearray(self.n_events)
        for e in self.branch_events:
            self.branchable[e] = 1
        self.touched = bytearray(self.n_events)
        self.touch_heap: list[int] = []

        self.failed = False
        try:
            for st, val in constraint.membership.items():
                self._set_mem(idx.state_pos[st], 0b01 if val == 0 else 0b10)
            for ev, val in constraint.signature.items():
                self._set_sig(idx.event_pos[ev], _SIG_BIT[val])
            self.queue.extend(
                eid for eid in range(len(idx.esrc)) if self.active_edge[eid]
            )
            self._drain()
        except _Unsatisfiable:
            self.failed = True

    # -- propagation ----------------------------------------------------

    def _touch(self, e: int):
        self.touched[e] = 1
        if self.branchable[e]:
            d = self.sig[e]
            if d & (d - 1):
                heappush(self.touch_heap, e)

    def _set_mem(self, s: int, bits: int):
        new = self.mem[s] & bits
        if new == self.mem[s]:
            return
        if new == 0:
            raise _Unsatisfiable
        self.mem[s] = new
        for eid in self.idx.state_edges[s]:
            if self.active_edge[eid]:
                self.queue.append(eid)
                self._touch(self.idx.eev[eid])

    def _set_sig(self, e: int, bits: int):
        new = self.sig[e] & bits
        if new == self.sig[e]:
            return
        if new == 0:
            raise _Unsatisfiable
        self.sig[e] = new
        self._touch(e)
        self.queue.extend(
            eid for eid in self.idx.event_edges[e] if self.active_edge[eid]
        )

    def _drain(self):
        """Arc-consistency over the edge equations R(t) = R(s) + sig(e)."""
        idx = self.idx
        queue = self.queue
        mem, sig = self.mem, self.sig
        while queue:
            eid = queue.popleft()
            s, e, t = idx.esrc[eid], idx.eev[eid], idx.edst[eid]
            ms, mg, mt = mem[s], sig[e], mem[t]
            ns = ng = nt = 0
            if ms & 1:  # R(s) = 0
                if (mg & 0b010) and (mt & 1):
                    ns |= 1; ng |= 0b010; nt |= 1
                if (mg & 0b100) and (mt & 2):
                    ns |= 1; ng |= 0b100; nt |= 2
            if ms & 2:  # R(s) = 1
                if (mg & 0b001) and (mt & 1):
                    ns |= 2; ng |= 0b001; nt |= 1
                if (mg & 0b010) and (mt & 2):
                    ns |= 2; ng |= 0b010; nt |= 2
            if ns == 0:
                raise _Unsatisfiable
            if ns != ms:
                self._set_mem(s, ns)
            if ng != mg:
                self._set_sig(e, ng)
            if nt != mt:
                self._set_mem(t, nt)

    def _assign(self, kind: str, var: int, bits: int):
        self.queue.clear()
        if kind == "event":
            self._set_sig(var, bits)
        else:
            self._set_mem(var, bits)
        self._drain()

    # -- search ---------------------------------------------------------

    def _pick(self):
        """Next branch variable: touched events, then free events, then states.

        An event is touched when its own domain is restricted or an incident
        state got decided; branching those first keeps search inside the
        constraint's cone of influence.
        """
        heap = self.touch_heap
        while heap:
            e = heap[0]
            d = self.sig[e]
            if d & (d - 1) == 0:
                heappop(heap)
                continue
            return ("event", e, True)
        for e in self.branch_events:
            d = self.sig[e]
            if d & (d - 1):
                return ("event", e, False)
        for s in range(self.n_states):
            if self.mem[s] == _MEM_ALL:
                return ("state", s, False)
        return None

    def _solution_mask(self) -> int:
        mask = 0
        for s in range(self.n_states):
            if self.mem[s] == 0b10:
                mask |= 1 << s
        return mask

    def _zero_complete(self):
        """Extend by the all-zero completion (valid whenever remaining
        undecided events have fully-free domains and endpoints)."""
        for s in range(self.n_states):
            if self.mem[s] == _MEM_ALL:
                self.mem[s] = 0b01
        for e in range(self.n_events):
            d = self.sig[e]
            if d & (d - 1) and d & 0b010:
                self.sig[e] = 0b010

    def solutions(self, limit=None, first_only=False):
        """DFS over branch choices; yields membership masks deterministically."""
        if self.failed:
            return
        count = 0
        # Frame: [mem, sig, touched, heap snapshots, kind, var, values, next]
        stack: list[list] = []
        descend = True
        while True:
            if descend:
                pick = self._pick()
                if pick is None:
                    yield self._solution_mask()
                    count += 1
                    if limit is not None and count >= limit:
                        return
                    descend = False
                    continue
                kind, var, touched = pick
                if first_only and not touched:
                    # Everything outside the cone of influence is free; the
                    # all-zero extension is a solution.
                    self._zero_complete()
                    yield self._solution_mask()
                    return
                if kind == "event":
                    values = [b for b in (0b010, 0b001, 0b100) if self.sig[var] & b]
                else:
                    values = [b for b in (0b01, 0b10) if self.mem[var] & b]
                stack.append(
                    [bytes(self.mem), bytes(self.sig), bytes(self.touched),
                     list(self.touch_heap), kind, var, values, 0]
                )
            # Take the next untried value of the deepest frame.
            while stack:
                frame = stack[-1]
                if frame[7] >= len(frame[6]):
                    stack.pop()
                    continue
                i = frame[7]
                frame[7] = i + 1
                self.mem = bytearray(frame[0])
                self.sig = bytearray(frame[1])
                self.touched = bytearray(frame[2])
                self.touch_heap = list(frame[3])
                try:
                    self._assign(frame[4], frame[5], frame[6][i])
                except _Unsatisfiable:
                    continue
                descend = True
                break
            else:
                return


def _as_constraint(constraint) -> RegionConstraint:
    if constraint is None:
        return RegionConstraint()
    if isinstance(constraint, RegionConstraint):
        return constraint
    raise TypeError("expected a RegionConstraint or None")


def solve_region(sys, constraint: RegionConstraint | None = None) -> Optional[Region]:
    """First region satisfying the constraint, or ``None`` if none exists."""
    solver = _Solver(sys, _as_constraint(constraint))
    for mask in solver.solutions(first_only=True):
        return Region(sys, mask)
    return None


def solve_all_regions(
    sys, constraint: RegionConstraint | None = None, limit: int | None = None
) -> list[Region]:
    """All regions satisfying the constraint, deterministically ordered."""
    solver = _Solver(sys, _as_constraint(constraint))
    return [Region(sys, mask) for mask in solver.solutions(limit=limit)]


def enumerate_regions(sys, cap: int = 22) -> list[Region]:
    """Brute-force region enumeration over all state subsets.

    Refuses systems with more than ``cap`` states; use the solver beyond
    that.  The result is ordered by membership bit-vector value and is the
    oracle the solver is tested against.
    """
    idx = _indexed(sys)
    n = len(idx.states)
    if n > cap:
        raise ValueError(
            f"{n} states exceeds the enumeration cap {cap}; use solve_all_regions"
        )
    esrc, eev, edst = idx.esrc, idx.eev, idx.edst
    n_edges = len(esrc)
    sig_val = [0] * len(idx.events)
    sig_gen = [-1] * len(idx.events)
    out = []
    for mask in range(1 << n):
        ok = True
        for eid in range(n_edges):
            d = ((mask >> edst[eid]) & 1) - ((mask >> esrc[eid]) & 1)
            e = eev[eid]
            if sig_gen[e] == mask:
                if sig_val[e] != d:
                    ok = False
                    break
            else:
                sig_gen[e] = mask
                sig_val[e] = d
        if ok:
            out.append(Region(sys, mask))
    return out


def aggregate_signature(region: Region, ts, i: int, j: int) -> int:
    """R(s_j) - R(s_i) along a linear TS, i.e. the signature sum over e_{i+1}..e_j."""
    from .ts import classify  # regions stays otherwise TS-agnostic

    if not classify(ts).linear:
        raise ValueError("aggregate_signature requires a linear transition system")
    t = len(ts.edges)
    if not (0 <= i < j <= t):
        raise IndexError(f"indices ({i}, {j}) out of range for a chain of length {t}")
    # Walk the chain to the i-th and j-th states.
    state = ts.initial
    chain = [state]
    for _ in range(t):
        (_, state), = ts.successors(chain[-1]).items()
        chain.append(state)
    return region.membership(chain[j]) - region.membership(chain[i])


def format_region(region: Region) -> str:
    """Witness format: membership line plus the non-obeying signature entries."""
    members = ", ".join(region.members)
    parts = []
    for ev in region.system.events:
        v = region.signature[ev]
        if v == -1:
            parts.append(f"{ev}=-1")
        elif v == 1:
            parts.append(f"{ev}=+1")
    sig_line = "sig: " + ", ".join(parts) if parts else "sig:"
    return f"region: {{{members}}}\n{sig_line}"
