"""Shared fixtures, generators and brute-force oracles for the test-suite."""

from __future__ import annotations

import random
from pathlib import Path

from trapmap.fabric import TechParams, parse_fabric
from trapmap.qasm import GateKind, Instruction, Program

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
BENCHMARKS = sorted((DATA / "benchmarks").glob("*.qasm"))
BIG_FABRIC = DATA / "fabric_45x85.txt"
SMALL_FABRIC = DATA / "fabric_small.txt"
TECH_FILE = DATA / "tech_default.cfg"

ONE_Q = [g for g in GateKind if g.arity == 1]
TWO_Q = [g for g in GateKind if g.arity == 2]


def benchmark(name: str) -> Path:
    return DATA / "benchmarks" / f"{name}.qasm"


def random_program(rng: random.Random, max_qubits=12, max_instructions=40, min_qubits=2) -> Program:
    nq = rng.randint(min_qubits, max_qubits)
    qubits = tuple(f"q{i}" for i in range(nq))
    init = {q: (None if rng.random() < 0.2 else "0") for q in qubits}
    instructions = []
    for i in range(rng.randint(0, max_instructions)):
        if rng.random() < 0.35:
            instructions.append(Instruction(i, rng.choice(ONE_Q), (rng.choice(qubits),)))
        else:
            a, b = rng.sample(qubits, 2)
            instructions.append(Instruction(i, rng.choice(TWO_Q), (a, b)))
    return Program(qubits, init, tuple(instructions))


def junction_lattice(k: int, length: int = 1, traps: bool = False) -> str:
    """``k`` x ``k`` junctions joined by channels of ``length`` cells.

    With ``traps`` every horizontal channel gets a trap under its first cell.
    """
    pitch = length + 1
    n = (k - 1) * pitch + 1
    grid = [["."] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            if r % pitch == 0 and c % pitch == 0:
                grid[r][c] = "J"
            elif r % pitch == 0 or c % pitch == 0:
                grid[r][c] = "C"
    if traps:
        for r in range(0, n - 1, pitch):
            for c in range(1, n, pitch):
                if grid[r + 1][c] == ".":
                    grid[r + 1][c] = "T"
    return "".join("".join(row) + "\n" for row in grid)


STRIP = "TTTTTTTTT\nCCCCCCCCC\n"  # a 1x9 channel strip with a trap over every cell


def fabric_from(text: str):
    return parse_fabric(text)


def tech(**kw) -> TechParams:
    return TechParams(**kw)


def enumerate_paths(g, source, target, limit=200000):
    """Every simple vertex path from ``source`` to ``target`` as an edge list.

    Traps other than the endpoints are never entered, mirroring the router's
    rule. Independent of the router's Dijkstra.
    """
    out = []
    stack = [(source, [], {source})]
    while stack:
        v, edges, seen = stack.pop()
        if v == target:
            out.append(edges)
            if len(out) >= limit:
                raise RuntimeError("too many paths")
            continue
        if v[0] == "T" and v != source:
            continue
        for e in g.adj[v]:
            u = e.other(v)
            if u in seen or (u[0] == "T" and u != target):
                continue
            stack.append((u, edges + [(e, v, u)], seen | {u}))
    return out


ACCEPTANCE_LINES: list[str] = []
