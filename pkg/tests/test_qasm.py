import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import BENCHMARKS, benchmark, random_program
from trapmap.fabric import TechParams
from trapmap.qasm import (
    ArityMismatch,
    DuplicateQubit,
    GateKind,
    MalformedLine,
    UndeclaredQubit,
    UnknownGate,
    build_qidg,
    ideal_latency,
    invert_to_uidg,
    parse_qasm,
    serialize_qasm,
)

TECH = TechParams()


def five_qubit():
    return parse_qasm(benchmark("5_1_3").read_text())


def test_five_qubit_listing_shape():
    p = five_qubit()
    assert p.qubits == ("q0", "q1", "q2", "q3", "q4")
    assert p.init["q3"] is None and p.init["q0"] == "0"
    assert len(p.instructions) == 12
    assert [i.id for i in p.instructions] == list(range(12))
    assert p.instructions[0].gate is GateKind.H
    assert p.instructions[6].gate is GateKind.CY
    assert p.instructions[6].operands == ("q2", "q1")


def test_five_qubit_dependencies():
    g = build_qidg(five_qubit())
    # C-Y q2,q1 waits for the last gates on q2 (C-Z q4,q2) and q1 (H q1)
    assert g.preds[6] == {5, 1}
    # the H layer has no predecessors
    assert all(not g.preds[n] for n in range(4))
    assert g.succs[4] == {5, 7}  # C-X q3,q2 feeds C-Z q4,q2 and C-Y q3,q1


def test_five_qubit_baseline():
    # two-qubit gates on q0..q2 chain into a critical path of six 2q gates after an H
    assert ideal_latency(build_qidg(five_qubit()), TECH) == 610


def test_baseline_trivial_programs():
    assert ideal_latency(build_qidg(parse_qasm("")), TECH) == 0
    assert ideal_latency(build_qidg(parse_qasm("QUBIT a\nQUBIT b\nC-X a,b\n")), TECH) == 100
    assert ideal_latency(build_qidg(parse_qasm("QUBIT a\nH a\n")), TECH) == 10


def test_comments_blank_lines_and_case():
    p = parse_qasm("# header\n\nqubit a,0\nQUBIT b\n h a \nc-z a , b\nCX b,a\n")
    assert [i.gate for i in p.instructions] == [GateKind.H, GateKind.CZ, GateKind.CX]


@pytest.mark.parametrize(
    "text, exc, line",
    [
        ("QUBIT a\nSWAP a\n", UnknownGate, 2),
        ("QUBIT a\nH b\n", UndeclaredQubit, 2),
        ("QUBIT a\nQUBIT a\n", DuplicateQubit, 2),
        ("QUBIT a\nQUBIT b\nC-X a\n", ArityMismatch, 3),
        ("QUBIT a\nH a,a\n", ArityMismatch, 2),
        ("QUBIT a\nQUBIT b\nC-X a,,b\n", MalformedLine, 3),
        ("QUBIT a\nQUBIT b\nC-X a,a\n", MalformedLine, 3),
        ("QUBIT\n", MalformedLine, 1),
    ],
)
def test_parse_errors_are_line_anchored(text, exc, line):
    with pytest.raises(exc) as info:
        parse_qasm(text)
    assert info.value.lineno == line
    assert f"line {line}" in str(info.value)


def test_gate_inverses_are_involutions():
    for g in GateKind:
        assert g.inverse.inverse is g
        assert g.inverse.arity == g.arity


@pytest.mark.parametrize("path", BENCHMARKS, ids=lambda p: p.stem)
def test_benchmarks_parse_and_invert(path):
    g = build_qidg(parse_qasm(path.read_text()))
    assert len(g.topological_order()) == len(g)
    u = invert_to_uidg(g)
    assert invert_to_uidg(u).same_as(g)
    assert ideal_latency(u, TECH) == ideal_latency(g, TECH)


@given(st.integers(0, 2**32 - 1))
def test_random_program_properties(seed):
    p = random_program(random.Random(seed))
    assert parse_qasm(serialize_qasm(p)) == p
    g = build_qidg(p)
    order = g.topological_order()
    assert sorted(order) == g.nodes
    pos = {n: i for i, n in enumerate(order)}
    assert all(pos[a] < pos[b] and a < b for a, b in g.edges)
    u = invert_to_uidg(g)
    assert u.edges == {(b, a) for a, b in g.edges}
    assert invert_to_uidg(u).same_as(g)
    assert ideal_latency(u, TECH) == ideal_latency(g, TECH)
    # edges come exactly from consecutive uses of a qubit
    last, expected = {}, set()
    for ins in p.instructions:
        for q in ins.operands:
            if q in last:
                expected.add((last[q], ins.id))
            last[q] = ins.id
    assert g.edges == expected
