import pytest

from ensynth.properties import has_essp, is_feasible
from ensynth.regions import Region, enumerate_regions
from ensynth.synthesis import (
    ElementaryNetSystem,
    check_morphism,
    fire,
    language_equal,
    parse_ens,
    reachability_graph,
    serialize_ens,
    synthesize,
    ts_isomorphic,
)
from ensynth.ts import TransitionSystem

from corpus import random_linear_ts, small_ts_corpus


def single_edge():
    return TransitionSystem.chain(["a"])


def test_synthesize_single_edge():
    ts = single_edge()
    regions = [Region.from_members(ts, ["s0"]), Region.from_members(ts, ["s1"])]
    net = synthesize(ts, regions)
    assert net.places == ("p0", "p1")
    assert net.flows == frozenset({("p0", "a"), ("a", "p1")})
    assert net.initial_marking == frozenset({"p0"})


def test_synthesize_empty_and_obeying():
    ts = single_edge()
    empty = synthesize(ts, [])
    assert empty.places == () and empty.initial_marking == frozenset()
    full = synthesize(ts, [Region.from_members(ts, ts.states)])
    assert full.flows == frozenset()  # all events obey the full-set region


def test_synthesize_rejects_foreign_regions():
    ts = single_edge()
    other = TransitionSystem.chain(["b"])
    with pytest.raises(ValueError):
        synthesize(ts, [Region.from_members(other, ["s0"])])


def test_fire():
    ts = single_edge()
    net = synthesize(
        ts, [Region.from_members(ts, ["s0"]), Region.from_members(ts, ["s1"])]
    )
    assert fire(net, frozenset({"p0"}), "a") == frozenset({"p1"})
    assert fire(net, frozenset({"p1"}), "a") is None
    lonely = ElementaryNetSystem(("p0",), ("e",), frozenset(), frozenset({"p0"}))
    assert fire(lonely, frozenset({"p0"}), "e") == frozenset({"p0"})
    with pytest.raises(ValueError):
        fire(net, frozenset(), "zap")


def test_reachability_graph_single_edge():
    ts = single_edge()
    net = synthesize(
        ts, [Region.from_members(ts, ["s0"]), Region.from_members(ts, ["s1"])]
    )
    result = reachability_graph(net)
    assert result.report.ok
    assert ts_isomorphic(result.ts, ts)
    assert result.markings["M0"] == frozenset({"p0"})


def test_reachability_graph_no_places_loops():
    net = ElementaryNetSystem((), ("a", "b"), frozenset(), frozenset())
    result = reachability_graph(net)
    assert len(result.ts.states) == 1
    assert len(result.ts.edges) == 2  # one self-loop per event
    assert "loop-free" in result.report.kinds()


def test_feasible_round_trip_corpus():
    for ts in small_ts_corpus():
        if len(ts.states) > 12:
            continue
        if not is_feasible(ts).holds:
            continue
        regions = enumerate_regions(ts)
        rg = reachability_graph(synthesize(ts, regions))
        assert ts_isomorphic(ts, rg.ts), ts
        assert check_morphism(ts, regions)
        assert language_equal(ts, rg.ts)


def test_reachable_markings_equal_state_images():
    for ts in small_ts_corpus():
        if len(ts.states) > 12:
            continue
        verdict = has_essp(ts)
        if not verdict.holds:
            continue
        regions = verdict.witnesses.regions
        rg = reachability_graph(synthesize(ts, regions))
        expected = {
            frozenset(f"p{i}" for i, r in enumerate(regions) if s in r)
            for s in ts.states
        }
        assert set(rg.markings.values()) == expected, ts


def test_essp_witness_gives_morphism_and_language():
    for ts in small_ts_corpus()[:10]:
        if len(ts.states) > 12:
            continue
        verdict = has_essp(ts)
        if not verdict.holds:
            continue
        regions = verdict.witnesses.regions
        assert check_morphism(ts, regions), ts
        rg = reachability_graph(synthesize(ts, regions))
        assert language_equal(ts, rg.ts), ts


def test_linear_essp_witness_forces_isomorphism():
    """For linear inputs an ESSP witness set already separates states, so
    the reachability graph cannot merge any."""
    import random

    rng = random.Random(7)
    found = 0
    while found < 40:
        ts = random_linear_ts(rng, 9, rng.randint(1, 4))
        verdict = has_essp(ts)
        if not verdict.holds:
            continue
        found += 1
        rg = reachability_graph(synthesize(ts, verdict.witnesses.regions))
        assert ts_isomorphic(ts, rg.ts), ts


def test_degenerate_witness_breaks_morphism():
    # abab has ESSP-witnessing impossible; with all regions the graph
    # folds states and the morphism check must reject arc mismatches.
    ts = TransitionSystem.chain(["a", "b", "a", "b"])
    regions = enumerate_regions(ts)
    rg = reachability_graph(synthesize(ts, regions))
    assert not ts_isomorphic(ts, rg.ts)


def test_ts_isomorphic_basics(master):
    assert ts_isomorphic(master, master)
    renamed = master.rename(lambda x: x + "x" if x in master.states else x)
    assert ts_isomorphic(master, renamed)
    assert not ts_isomorphic(master, TransitionSystem.chain(["a"]))
    bad = TransitionSystem.from_edges(
        "q0", [("q0", "a", "q1"), ("q0", "a", "q2")]
    )
    with pytest.raises(ValueError):
        ts_isomorphic(bad, bad)


def test_language_equal_basics():
    a = TransitionSystem.chain(["x", "y"])
    b = TransitionSystem.chain(["x", "y"], prefix="t")
    assert language_equal(a, b)
    assert not language_equal(a, TransitionSystem.chain(["x", "z"]))
    # equal language, different graph: a cycle vs its unrolling is *not*
    # language-equal because one side is finite
    loop = TransitionSystem.from_edges("c0", [("c0", "x", "c1"), ("c1", "x", "c0")])
    assert not language_equal(loop, TransitionSystem.chain(["x", "x"]))


def test_ens_format_round_trip():
    ts = TransitionSystem.chain(["a", "b"])
    net = synthesize(ts, enumerate_regions(ts))
    text = serialize_ens(net)
    again = parse_ens(text)
    assert again == net
    assert serialize_ens(again) == text


def test_parse_ens_errors():
    from ensynth.ts import ParseError

    with pytest.raises(ParseError):
        parse_ens("place p0\n")
    with pytest.raises(ParseError):
        parse_ens(".ens\nflow p0 -> t0\n")
    with pytest.raises(ParseError):
        parse_ens(".ens\nplace p0\ninitial qX\n")
