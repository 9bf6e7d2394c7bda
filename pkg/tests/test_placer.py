import random

import pytest

from helpers import BIG_FABRIC, SMALL_FABRIC, benchmark, random_program
from trapmap.fabric import TechParams, parse_fabric
from trapmap.placer import (
    InsufficientTraps,
    Mapper,
    center_placement,
    center_traps,
    derive_seed,
    monte_carlo_place,
    mvfb_place,
    mvfb_seed,
    runs_until_stall,
)
from trapmap.qasm import build_qidg, invert_to_uidg, parse_qasm
from trapmap.trace import validate_trace

BIG = parse_fabric(BIG_FABRIC.read_text())
SMALL = parse_fabric(SMALL_FABRIC.read_text())
TECH = TechParams()


def five_mapper():
    prog = parse_qasm(benchmark("5_1_3").read_text())
    return Mapper(build_qidg(prog), BIG, TECH, qubits=prog.qubits)


def test_center_traps_on_shipped_fabric():
    assert center_traps(BIG, 5) == [(21, 42), (23, 42), (19, 42), (25, 42), (21, 38)]
    with pytest.raises(InsufficientTraps):
        center_traps(SMALL, len(SMALL.traps) + 1)


def test_center_placement_is_a_permutation_of_center_traps():
    qs = [f"q{i}" for i in range(7)]
    p = center_placement(BIG, qs, random.Random(3))
    assert sorted(p.values()) == sorted(center_traps(BIG, 7))
    assert sorted(p) == qs
    assert center_placement(BIG, qs) == dict(zip(qs, center_traps(BIG, 7)))


def test_stall_rule_examples():
    assert runs_until_stall([700, 650, 660, 655, 652], 3) == 5
    assert runs_until_stall([500] * 10, 3) == 4  # zero-improvement seed: 1 + patience runs
    assert runs_until_stall([9, 8, 7], 3) == 3


def test_zero_cost_seed_runs_one_plus_patience():
    prog = parse_qasm("QUBIT a\nH a\n")
    m = Mapper(build_qidg(prog), SMALL, TECH, qubits=prog.qubits)
    for patience in (1, 2, 5):
        assert len(mvfb_seed(m, 0, patience)) == 1 + patience


def test_mvfb_seed_hands_off_placements():
    m = five_mapper()
    recs = mvfb_seed(m, 4, 3, rng_seed=11)
    assert [r.direction for r in recs[:3]] == ["forward", "backward", "forward"]
    for a, b in zip(recs, recs[1:]):
        assert b.initial == a.final
    assert len(recs) == runs_until_stall([r.latency for r in recs], 3)


def test_mvfb_bookkeeping_and_prefix_property():
    m = five_mapper()
    small = mvfb_place(m, 4, 3, rng_seed=5)
    big = mvfb_place(m, 8, 3, rng_seed=5)
    assert small.placement_runs == len(small.records)
    assert [r.latency for r in big.records[: small.placement_runs]] == [r.latency for r in small.records]
    assert big.best.latency <= small.best.latency
    assert small.best.latency == min(r.latency for r in small.records)


def test_mvfb_winner_trace_is_valid_forward_execution():
    m = five_mapper()
    res = mvfb_place(m, 6, 3, rng_seed=2)
    tr = res.best.trace
    assert tr.initial == res.best.initial
    assert validate_trace(tr, m.g, BIG, TECH, tr.timings or None) == []
    assert tr.total_latency <= res.best.latency == min(r.latency for r in res.records)


def test_backward_runs_execute_the_uncompute_graph():
    m = five_mapper()
    p = center_placement(BIG, m.qubits)
    tr = m.simulate(p, "backward")
    assert validate_trace(tr, invert_to_uidg(m.g), BIG, TECH, tr.timings) == []
    # the reversed schedule follows the forward priority order backwards
    assert tr.issue_order[0] in {n for n in m.g.nodes if not m.g.succs[n]}


def test_monte_carlo_budget_and_determinism():
    m = five_mapper()
    a = monte_carlo_place(m, 12, rng_seed=9)
    b = monte_carlo_place(m, 12, rng_seed=9)
    assert a.placement_runs == 12
    assert [r.latency for r in a.records] == [r.latency for r in b.records]
    assert a.best.latency == min(r.latency for r in a.records)
    assert a.best.trace.format() == b.best.trace.format()


def test_derived_seeds_are_distinct_and_stable():
    seeds = [derive_seed(0, i) for i in range(100)]
    assert len(set(seeds)) == 100
    assert derive_seed(0, 3) == derive_seed(0, 3) != derive_seed(1, 3)


def test_mvfb_on_random_programs_small_fabric():
    rng = random.Random(1)
    for _ in range(5):
        prog = random_program(rng, 8, 25)
        m = Mapper(build_qidg(prog), SMALL, TECH, qubits=prog.qubits)
        res = mvfb_place(m, 3, 2, rng_seed=rng.randrange(1000))
        tr = res.best.trace
        assert validate_trace(tr, m.g, SMALL, TECH, tr.timings or None) == []


def test_invalid_placer_arguments():
    m = five_mapper()
    with pytest.raises(ValueError):
        mvfb_place(m, 0)
    with pytest.raises(ValueError):
        monte_carlo_place(m, 0)
