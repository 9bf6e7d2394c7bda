import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import STRIP, enumerate_paths, junction_lattice
from trapmap.fabric import RoutingGraph, TechParams, parse_fabric
from trapmap.qasm import GateKind, Instruction
from trapmap.router import (
    Congested,
    find_path,
    median_cell,
    path_cost,
    route_instruction,
    select_target_trap,
    turn_count,
    walk,
    walk_delay,
)


def oracle_cost(edges, g):
    """Path cost straight from the weight rule, independent of the router."""
    tech = g.tech
    total = 0
    for e, _, _ in edges:
        if e.kind == "turn":
            total += (tech.t_turn - tech.t_move) / tech.t_move
        elif e.kind != "hop":
            total += (g.run_occ[e.run] + 1) * len(e.cells)
    return total


def test_median_rounds_half_up():
    assert median_cell((0, 1), (0, 6)) == (0, 4)
    assert median_cell((3, 3), (4, 4)) == (4, 4)
    assert median_cell((2, 2), (2, 2)) == (2, 2)


def test_target_trap_nearest_then_row_major():
    traps = [(0, 3), (0, 5), (2, 4)]
    assert select_target_trap((0, 0), (0, 8), traps, set()) == (0, 3)
    assert select_target_trap((0, 0), (0, 8), traps, {(0, 3)}) == (0, 5)
    with pytest.raises(Exception):
        select_target_trap((0, 0), (0, 8), traps, set(traps))


def test_one_qubit_route_is_empty():
    g = RoutingGraph(parse_fabric(STRIP))
    r = route_instruction(Instruction(0, GateKind.H, ("a",)), {"a": (0, 3)}, g, g.fabric.traps, set())
    assert r.target == (0, 3) and r.routing_delay == 0 and r.paths == {"a": []}
    assert g.state() == RoutingGraph(parse_fabric(STRIP)).state()


def test_straight_strip_route():
    g = RoutingGraph(parse_fabric(STRIP))
    locs = {"a": (0, 1), "b": (0, 6)}
    r = route_instruction(Instruction(0, GateKind.CX, ("a", "b")), locs, g, g.fabric.traps, {(0, 1), (0, 6)})
    assert r.target == (0, 4)
    # down into the channel, along it, up into the trap: moves only
    assert r.delays == {"a": 5, "b": 4}
    assert r.routing_delay == 5
    assert all(step[0] == "move" for w in r.walks.values() for step in w)
    assert [s[2] for s in r.walks["a"]] == [(1, 1), (1, 2), (1, 3), (1, 4), (0, 4)]


def test_congested_route_is_atomic():
    text = "TTTT.TTTT\nCCCCJCCCC\n"
    g = RoutingGraph(parse_fabric(text))
    # fill the right-hand run with two unrelated reservations
    filler = find_path(g, g.trap_vertex[(0, 5)], g.trap_vertex[(0, 8)])
    g.reserve_path(filler)
    g.reserve_path(filler)
    before = g.state()
    ins = Instruction(0, GateKind.CZ, ("a", "b"))
    locs = {"a": (0, 1), "b": (0, 7)}
    with pytest.raises(Congested):
        route_instruction(ins, locs, g, g.fabric.traps, {(0, 1), (0, 7)})
    assert g.state() == before
    assert not g.audit()
    # the first operand alone is routable: the rollback really happened
    assert find_path(g, g.trap_vertex[(0, 1)], g.trap_vertex[(0, 3)])


def tile_graph(t_turn=10):
    return RoutingGraph(parse_fabric(junction_lattice(3, 1)), TechParams(t_move=1, t_turn=t_turn))


def test_single_turn_path_beats_every_alternative():
    g = tile_graph()
    src, dst = ("V", 4, 0), ("H", 0, 4)
    path = find_path(g, src, dst)
    assert turn_count(path) == 1
    costs = sorted(oracle_cost(p, g) for p in enumerate_paths(g, src, dst))
    assert path_cost(g, path) == costs[0] < costs[1]
    assert walk_delay(walk(path), g.tech) == 4 * 2 + 9  # four cells, four junction steps, one turn


def test_turn_tie_reappears_without_turn_penalty():
    g = tile_graph(t_turn=1)
    src, dst = ("V", 4, 0), ("H", 0, 4)
    costs = [oracle_cost(p, g) for p in enumerate_paths(g, src, dst)]
    best = min(costs)
    assert path_cost(g, find_path(g, src, dst)) == best
    assert costs.count(best) > 1


@given(st.integers(2, 4), st.integers(1, 2), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_dijkstra_matches_brute_force(k, length, t_turn, seed):
    rng = random.Random(seed)
    g = RoutingGraph(parse_fabric(junction_lattice(k, length)), TechParams(t_move=1, t_turn=t_turn))
    verts = sorted(v for v in g.vertices if v[0] in "HV")
    src, dst = rng.sample(verts, 2)
    path = find_path(g, src, dst)
    paths = enumerate_paths(g, src, dst)
    best = min(oracle_cost(p, g) for p in paths)
    assert path_cost(g, path) == best
    # on a uniform lattice the cheapest path is also the fastest to walk
    assert walk_delay(walk(path), g.tech) == min(
        walk_delay(walk([type(path[0])(*s) for s in p]), g.tech) if p else 0 for p in paths
    )


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_free_turns_give_manhattan_paths(k, seed):
    rng = random.Random(seed)
    g = RoutingGraph(parse_fabric(junction_lattice(k, 2)), TechParams(t_move=1, t_turn=1))
    src, dst = rng.sample(sorted(g.vertices), 2)
    path = find_path(g, src, dst)
    moves = sum(1 for s in walk(path) if s[0] == "move")
    (r0, c0), (r1, c1) = src[1:], dst[1:]
    assert moves == abs(r0 - r1) + abs(c0 - c1)


@given(st.integers(0, 2**32 - 1))
def test_router_skips_full_channels(seed):
    rng = random.Random(seed)
    g = RoutingGraph(parse_fabric(junction_lattice(3, 1, traps=True)))
    traps = g.fabric.traps
    for _ in range(10):
        a, b = rng.sample(traps, 2)
        path = find_path(g, g.trap_vertex[a], g.trap_vertex[b])
        if path is None:
            continue
        assert all(g.weight(s.edge) != float("inf") for s in path)
        assert all(not g.junction_full(s.dst) for s in path)
        g.reserve_path(path)
    assert not g.audit()
