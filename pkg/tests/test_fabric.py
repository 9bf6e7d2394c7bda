import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import BIG_FABRIC, SMALL_FABRIC, STRIP, TECH_FILE, junction_lattice
from trapmap.fabric import (
    INF,
    BentChannel,
    CapacityViolated,
    CellKind,
    DanglingChannel,
    DoubleRelease,
    Edge,
    OrphanTrap,
    RaggedRows,
    RoutingGraph,
    TechParams,
    UnknownCell,
    UnknownToken,
    channel_runs,
    collapse_turns,
    edge_weight,
    parse_fabric,
    parse_tech,
    render_tech,
)
from trapmap.router import find_path

TILE = "JCJ\nC.C\nJCJ\n"


def test_tile_vertex_and_edge_counts():
    g = RoutingGraph(parse_fabric(TILE))
    assert len(g.vertices) == 8
    assert len(g.edges_of("channel")) == 4
    assert len(g.edges_of("turn")) == 4
    assert {v[0] for v in g.vertices} == {"H", "V"}
    verts, edges = collapse_turns(g)
    assert len(verts) == 4 and len(edges) == 4


def test_shipped_fabric_shape():
    f = parse_fabric(BIG_FABRIC.read_text())
    assert (f.rows, f.cols) == (45, 85)
    assert len(f.traps) == 462
    assert f.render() == BIG_FABRIC.read_text()
    g = RoutingGraph(f)
    assert not g.audit()
    # every trap reaches every other trap on the empty graph
    traps = f.traps
    for a, b in [(traps[0], traps[-1]), (traps[10], traps[300])]:
        assert find_path(g, g.trap_vertex[a], g.trap_vertex[b])


def test_small_fabric_parses():
    f = parse_fabric(SMALL_FABRIC.read_text())
    assert f.traps and f.junctions


@pytest.mark.parametrize(
    "text, exc",
    [
        ("JCJ\nC.\n", RaggedRows),
        ("JCX\n", UnknownCell),
        ("JC.\n", DanglingChannel),
        ("T..\n.JC\n", OrphanTrap),
        ("JCC\n..C\n", BentChannel),
    ],
)
def test_fabric_errors(text, exc):
    with pytest.raises(exc):
        parse_fabric(text)


def test_strip_has_dead_ends_and_taps():
    g = RoutingGraph(parse_fabric(STRIP))
    assert len(g.runs) == 1
    assert sum(1 for v in g.vertices if v[0] == "D") == 2
    assert g.edges_of("tap")


def test_edge_weight_formula():
    tech = TechParams()
    for length in range(1, 11):
        e = Edge(0, "channel", ("D", 0, 0), ("D", 0, length), cells=tuple((0, c) for c in range(length)), run=0)
        assert edge_weight(e, 0, tech) == length
        assert edge_weight(e, 1, tech) == 2 * length
        assert edge_weight(e, 2, tech) == INF
    turn = Edge(1, "turn", ("H", 0, 0), ("V", 0, 0), junction=(0, 0))
    assert edge_weight(turn, 0, tech) == 9
    assert edge_weight(turn, 0, TechParams(t_move=1, t_turn=1)) == 0


def test_tech_config_round_trip():
    t = parse_tech(TECH_FILE.read_text())
    assert t == TechParams()
    assert parse_tech(render_tech(t)) == t
    t2 = TechParams(t_move=2, t_turn=30, channel_capacity=3)
    assert parse_tech(render_tech(t2)) == t2


@pytest.mark.parametrize(
    "text",
    ["bogus = 1\n", "t_move_us 1\n", "t_move_us = fast\n", "channel_capacity = 1.5\n", "t_turn_us = 0.5\n"],
)
def test_tech_config_errors(text):
    with pytest.raises(ValueError):
        parse_tech(text)


def test_tech_zero_cost_routing_is_allowed():
    t = TechParams(t_move=0, t_turn=0, channel_capacity=10**9, junction_capacity=10**9)
    assert t.turn_extra == 0


def test_reservation_staged_release():
    g = RoutingGraph(parse_fabric(junction_lattice(3, 2)))
    path = find_path(g, ("V", 6, 0), ("H", 0, 6))
    before = g.state()
    tok = g.reserve_path(path)
    assert g.state() != before
    assert not g.audit()
    for res in list(tok.pending()):
        g.release(tok, res)
        assert not g.audit()
    assert g.state() == before
    assert not g.active_tokens()
    with pytest.raises(UnknownToken):
        g.release(tok, tok.resources[0])


def test_double_release_and_capacity():
    g = RoutingGraph(parse_fabric(junction_lattice(2, 3)))
    path = find_path(g, ("H", 0, 0), ("H", 0, 4))
    t1 = g.reserve_path(path)
    t2 = g.reserve_path(path)
    with pytest.raises(CapacityViolated):
        g.reserve_path(path)
    assert g.weight(path[0].edge) == INF
    res = t1.resources[0]
    g.release(t1, res)
    with pytest.raises(DoubleRelease):
        g.release(t1, res)
    g.release_all(t1)
    g.release_all(t2)
    assert not g.audit() and not g.active_tokens()


@given(st.integers(0, 2**32 - 1))
def test_random_reservations_keep_counters_consistent(seed):
    rng = random.Random(seed)
    g = RoutingGraph(parse_fabric(junction_lattice(3, 1, traps=True)))
    verts = sorted(g.vertices)
    live = []
    for _ in range(30):
        if live and rng.random() < 0.4:
            tok = live.pop(rng.randrange(len(live)))
            pending = tok.pending()
            for res in rng.sample(pending, rng.randint(1, len(pending))):
                g.release(tok, res)
            if tok.pending():
                live.append(tok)
        else:
            a, b = rng.sample(verts, 2)
            path = find_path(g, a, b)
            if path:
                assert all(g.weight(s.edge) < math.inf for s in path)
                try:
                    live.append(g.reserve_path(path))
                except CapacityViolated:
                    pass
        assert not g.audit()
        assert all(0 <= n <= g.tech.channel_capacity for n in g.run_occ)
    for tok in live:
        g.release_all(tok)
    assert all(n == 0 for n in g.run_occ) and all(n == 0 for n in g.junction_occ.values())


def test_channel_runs_are_straight():
    f = parse_fabric(BIG_FABRIC.read_text())
    for run in channel_runs(f):
        rows = {r for r, _ in run.cells}
        cols = {c for _, c in run.cells}
        assert len(rows) == 1 or len(cols) == 1
        assert all(f.kind_at(*c) is CellKind.CHANNEL for c in run.cells)
