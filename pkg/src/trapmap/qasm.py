"""QASM subset parser and the instruction dependency graph.

The accepted grammar is line oriented::

    QUBIT <name>[,<init>]
    <GATE> <q>
    <GATE> <q1>,<q2>

with GATE one of H, X, Y, Z, C-X, C-Y, C-Z (case-insensitive). Blank lines
and lines starting with ``#`` are skipped.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field


class QasmError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class UnknownGate(QasmError):
    pass


class UndeclaredQubit(QasmError):
    pass


class DuplicateQubit(QasmError):
    pass


class ArityMismatch(QasmError):
    pass


class MalformedLine(QasmError):
    pass


class NonInvertibleGate(ValueError):
    pass


class GateKind(enum.Enum):
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    CX = "C-X"
    CY = "C-Y"
    CZ = "C-Z"

    @property
    def arity(self) -> int:
        return 2 if self.name.startswith("C") else 1

    @property
    def inverse(self) -> "GateKind":
        inv = _INVERSES.get(self)
        if inv is None:
            raise NonInvertibleGate(f"gate {self.value} has no declared inverse")
        return inv

    @property
    def token(self) -> str:
        return self.value


# every gate in the supported set is self-inverse
_INVERSES = {g: g for g in GateKind}

_GATE_TOKENS = {g.value: g for g in GateKind}
_GATE_TOKENS.update({g.name: g for g in GateKind})


@dataclass(frozen=True)
class Instruction:
    id: int
    gate: GateKind
    operands: tuple[str, ...]

    def __post_init__(self):
        if len(self.operands) != self.gate.arity:
            raise ValueError(f"{self.gate.value} takes {self.gate.arity} operand(s)")
        if len(set(self.operands)) != len(self.operands):
            raise ValueError("operands must be distinct")


@dataclass(frozen=True)
class Program:
    qubits: tuple[str, ...] = ()
    init: dict = field(default_factory=dict)
    instructions: tuple[Instruction, ...] = ()


def parse_qasm(text: str) -> Program:
    qubits: list[str] = []
    init: dict[str, str] = {}
    instructions: list[Instruction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        head = parts[0].upper()
        rest = parts[1] if len(parts) > 1 else ""
        args = [a.strip() for a in rest.split(",")] if rest.strip() else []
        if any(not a or len(a.split()) != 1 for a in args):
            raise MalformedLine(lineno, f"cannot parse {raw!r}")
        if head == "QUBIT":
            if not 1 <= len(args) <= 2:
                raise MalformedLine(lineno, "QUBIT takes a name and an optional initial value")
            name = args[0]
            if name in init or name in qubits:
                raise DuplicateQubit(lineno, f"qubit {name} declared twice")
            qubits.append(name)
            init[name] = args[1] if len(args) == 2 else None
            continue
        gate = _GATE_TOKENS.get(head)
        if gate is None:
            raise UnknownGate(lineno, f"unknown gate {parts[0]!r}")
        if len(args) != gate.arity:
            raise ArityMismatch(lineno, f"{gate.value} takes {gate.arity} operand(s), got {len(args)}")
        for q in args:
            if q not in init:
                raise UndeclaredQubit(lineno, f"qubit {q} used before declaration")
        if len(set(args)) != len(args):
            raise MalformedLine(lineno, "operands must be distinct")
        instructions.append(Instruction(len(instructions), gate, tuple(args)))
    return Program(tuple(qubits), init, tuple(instructions))


def serialize_qasm(p: Program) -> str:
    lines = []
    for q in p.qubits:
        v = p.init.get(q)
        lines.append(f"QUBIT {q}" if v is None else f"QUBIT {q},{v}")
    for ins in p.instructions:
        lines.append(f"{ins.gate.token} {','.join(ins.operands)}")
    return "".join(line + "\n" for line in lines)


class Qidg:
    """Dependency DAG over instructions; node ids are instruction ids."""

    def __init__(self, instructions, preds, succs):
        self.instructions = {ins.id: ins for ins in instructions}
        self.preds = {k: frozenset(v) for k, v in preds.items()}
        self.succs = {k: frozenset(v) for k, v in succs.items()}

    @property
    def nodes(self) -> list[int]:
        return sorted(self.instructions)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {(a, b) for a, bs in self.succs.items() for b in bs}

    def __len__(self):
        return len(self.instructions)

    def gate(self, node: int) -> GateKind:
        return self.instructions[node].gate

    def topological_order(self) -> list[int]:
        indeg = {n: len(self.preds[n]) for n in self.instructions}
        ready = [n for n, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            n = heapq.heappop(ready)
            order.append(n)
            for s in self.succs[n]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    heapq.heappush(ready, s)
        if len(order) != len(self.instructions):
            raise ValueError("dependency graph has a cycle")
        return order

    def same_as(self, other: "Qidg") -> bool:
        return self.instructions == other.instructions and self.succs == other.succs


def build_qidg(p: Program) -> Qidg:
    preds: dict[int, set[int]] = {ins.id: set() for ins in p.instructions}
    succs: dict[int, set[int]] = {ins.id: set() for ins in p.instructions}
    last: dict[str, int] = {}
    for ins in p.instructions:
        for q in ins.operands:
            if q in last:
                preds[ins.id].add(last[q])
                succs[last[q]].add(ins.id)
            last[q] = ins.id
    return Qidg(p.instructions, preds, succs)


def invert_to_uidg(g: Qidg) -> Qidg:
    instructions = [
        Instruction(ins.id, ins.gate.inverse, ins.operands) for ins in g.instructions.values()
    ]
    return Qidg(instructions, g.succs, g.preds)


def gate_delay(gate: GateKind, tech) -> float:
    return tech.t_gate_2q if gate.arity == 2 else tech.t_gate_1q


def ideal_latency(g: Qidg, tech) -> float:
    """Longest gate-delay path through ``g``, i.e. latency with free routing."""
    finish: dict[int, float] = {}
    for n in g.topological_order():
        start = max((finish[p] for p in g.preds[n]), default=0)
        finish[n] = start + gate_delay(g.gate(n), tech)
    return max(finish.values(), default=0)
