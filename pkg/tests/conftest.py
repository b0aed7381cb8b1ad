from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from ensynth.regions import enumerate_regions
from corpus import master as _master

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture
def master():
    return _master()


def brute_ssp(sys_obj) -> bool:
    """Exhaustive SSP check over all enumerated regions."""
    regions = enumerate_regions(sys_obj)
    states = sys_obj.states
    component_of = getattr(sys_obj, "component_of", None)
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            if component_of is not None and component_of[states[i]] != component_of[states[j]]:
                continue
            if not any((states[i] in r) != (states[j] in r) for r in regions):
                return False
    return True


def brute_essp(sys_obj) -> bool:
    """Exhaustive ESSP check over all enumerated regions."""
    regions = enumerate_regions(sys_obj)
    edges = sys_obj.edges
    has_edge = lambda s, e: any(src == s and ev == e for src, ev, _ in edges)
    for e in sys_obj.events:
        for s in sys_obj.states:
            if has_edge(s, e):
                continue
            ok = False
            for r in regions:
                v = r.signature.get(e, 0)
                if (v == -1 and s not in r) or (v == 1 and s in r):
                    ok = True
                    break
            if not ok:
                return False
    return True


def brute_feasible(sys_obj) -> bool:
    return brute_ssp(sys_obj) and brute_essp(sys_obj)
