"""Micro-command traces: text format, time reversal and independent validation.

Trace files hold ``PLACE`` lines with the initial placement followed by one
command per line::

    PLACE q0 (21,42)
    t=0 MOVE q0 (21,42)->(20,42)
    t=3 TURN q0 (20,40) H2V
    t=25 GATE_START 4 C-X q3,q2 @(21,42)
    t=125 GATE_END 4
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field

from .fabric import CellKind, channel_runs
from .qasm import GateKind, gate_delay


@dataclass(frozen=True)
class MicroCommand:
    t: float
    kind: str  # MOVE | TURN | GATE_START | GATE_END
    qubit: str | None = None
    src: tuple | None = None  # MOVE from-cell, TURN junction, GATE_START trap
    dst: tuple | None = None  # MOVE to-cell
    direction: str | None = None  # TURN: H2V | V2H
    ins: int | None = None
    gate: GateKind | None = None
    operands: tuple = ()

    def duration(self, tech) -> float:
        if self.kind == "MOVE":
            return tech.t_move
        if self.kind == "TURN":
            return tech.turn_extra
        return 0

    def format(self) -> str:
        t = f"t={fmt_time(self.t)}"
        if self.kind == "MOVE":
            return f"{t} MOVE {self.qubit} {_cell(self.src)}->{_cell(self.dst)}"
        if self.kind == "TURN":
            return f"{t} TURN {self.qubit} {_cell(self.src)} {self.direction}"
        if self.kind == "GATE_START":
            ops = ",".join(self.operands)
            return f"{t} GATE_START {self.ins} {self.gate.token} {ops} @{_cell(self.src)}"
        return f"{t} GATE_END {self.ins}"


@dataclass
class InstructionTiming:
    eligible: float
    issue: float
    start: float
    end: float
    routing: float
    congestion: float
    gate: float
    target: tuple

    @property
    def span(self) -> float:
        return self.end - self.eligible


@dataclass
class Trace:
    commands: list[MicroCommand]
    initial: dict  # qubit -> trap cell
    final: dict
    total_latency: float = 0
    timings: dict = field(default_factory=dict)  # ins -> InstructionTiming
    issue_order: list = field(default_factory=list)
    direction: str = "forward"

    def format(self) -> str:
        lines = [f"PLACE {q} {_cell(c)}" for q, c in self.initial.items()]
        lines += [c.format() for c in self.commands]
        return "".join(line + "\n" for line in lines)


def fmt_time(x) -> str:
    if isinstance(x, float) and x.is_integer():
        x = int(x)
    return str(x)


def _cell(c) -> str:
    return f"({c[0]},{c[1]})"


_CELL = r"\((-?\d+),(-?\d+)\)"
_PLACE_RE = re.compile(rf"^PLACE (\S+) {_CELL}$")
_MOVE_RE = re.compile(rf"^t=(\S+) MOVE (\S+) {_CELL}->{_CELL}$")
_TURN_RE = re.compile(rf"^t=(\S+) TURN (\S+) {_CELL} (H2V|V2H)$")
_START_RE = re.compile(rf"^t=(\S+) GATE_START (\d+) (\S+) (\S+) @{_CELL}$")
_END_RE = re.compile(r"^t=(\S+) GATE_END (\d+)$")
_GATES = {g.token: g for g in GateKind}


def _num(s: str):
    v = float(s)
    return int(v) if v.is_integer() else v


def parse_trace(text: str) -> Trace:
    initial, commands = {}, []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if m := _PLACE_RE.match(line):
            initial[m[1]] = (int(m[2]), int(m[3]))
        elif m := _MOVE_RE.match(line):
            commands.append(
                MicroCommand(_num(m[1]), "MOVE", m[2], (int(m[3]), int(m[4])), (int(m[5]), int(m[6])))
            )
        elif m := _TURN_RE.match(line):
            commands.append(
                MicroCommand(_num(m[1]), "TURN", m[2], (int(m[3]), int(m[4])), direction=m[5])
            )
        elif m := _START_RE.match(line):
            commands.append(
                MicroCommand(
                    _num(m[1]),
                    "GATE_START",
                    src=(int(m[5]), int(m[6])),
                    ins=int(m[2]),
                    gate=_GATES[m[3]],
                    operands=tuple(m[4].split(",")),
                )
            )
        elif m := _END_RE.match(line):
            commands.append(MicroCommand(_num(m[1]), "GATE_END", ins=int(m[2])))
        else:
            raise ValueError(f"line {lineno}: unrecognised trace line {line!r}")
    final = dict(initial)
    for c in commands:
        if c.kind == "MOVE":
            final[c.qubit] = c.dst
    ends = [c.t for c in commands if c.kind == "GATE_END"]
    return Trace(commands, initial, final, max(ends, default=0))


def reverse_trace(tr: Trace, tech) -> Trace:
    """Play a trace backwards: inverse gates, reversed moves and turns.

    Times are mirrored about the total latency and shifted to start at 0.
    Operand moves that led up to the original's first gates end up after
    the reversed trace's last gate, so its latency can be shorter.
    """
    total = tr.total_latency
    starts = {c.ins: c for c in tr.commands if c.kind == "GATE_START"}
    out = []
    for c in reversed(tr.commands):
        if c.kind == "MOVE":
            out.append(MicroCommand(total - c.t - tech.t_move, "MOVE", c.qubit, c.dst, c.src))
        elif c.kind == "TURN":
            flipped = "V2H" if c.direction == "H2V" else "H2V"
            out.append(
                MicroCommand(total - c.t - tech.turn_extra, "TURN", c.qubit, c.src, direction=flipped)
            )
        elif c.kind == "GATE_END":
            s = starts[c.ins]
            out.append(
                MicroCommand(
                    total - c.t, "GATE_START", src=s.src, ins=c.ins, gate=s.gate.inverse, operands=s.operands
                )
            )
        else:
            out.append(MicroCommand(total - c.t, "GATE_END", ins=c.ins))
    shift = min((c.t for c in out), default=0)
    if shift:
        out = [_shift(c, -shift) for c in out]
    out = [c for _, c in sorted(enumerate(out), key=lambda p: (p[1].t, p[0]))]
    direction = "backward" if tr.direction == "forward" else "forward"
    # moves that followed the first gates' routing now trail the last gate
    latency = max((c.t for c in out if c.kind == "GATE_END"), default=0)
    return Trace(out, dict(tr.final), dict(tr.initial), latency, {}, tr.issue_order[::-1], direction)


def _shift(c: MicroCommand, dt) -> MicroCommand:
    d = asdict(c)
    d["t"] = c.t + dt
    return MicroCommand(**d)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def to_dict(self):
        return {"kind": self.kind, "message": self.message}


def violations_text(vs) -> str:
    return "".join(f"{v.kind}: {v.message}\n" for v in vs)


def violations_json(vs) -> str:
    doc = {"valid": not vs, "count": len(vs), "violations": [v.to_dict() for v in vs]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _sweep(intervals, capacity, label, out):
    """Max simultaneous occupancy per resource over half-open intervals."""
    by_res = {}
    for res, a, b in intervals:
        by_res.setdefault(res, []).append((a, b))
    for res, ivs in sorted(by_res.items(), key=lambda kv: str(kv[0])):
        events = sorted([(a, 1) for a, b in ivs if b > a] + [(b, -1) for a, b in ivs if b > a])
        level = 0
        for t, d in events:
            level += d
            if level > capacity:
                out.append(Violation(f"{label}CapacityViolation", f"{res} holds {level} qubits at t={fmt_time(t)}"))
                break


def validate_trace(tr: Trace, g, fabric, tech, timings=None) -> list[Violation]:
    """Re-audit a trace using only its commands, the fabric and the program.

    ``timings`` (instruction -> :class:`InstructionTiming`) are the
    simulator's own records; when given, each instruction's gate / routing /
    congestion split is checked against what the commands show.
    """
    out: list[Violation] = []
    run_of = {cell: run.id for run in channel_runs(fabric) for cell in run.cells}
    starts, ends = {}, {}
    for c in tr.commands:
        if c.kind == "GATE_START":
            if c.ins in starts:
                out.append(Violation("DuplicateGate", f"instruction {c.ins} started twice"))
            starts[c.ins] = c
        elif c.kind == "GATE_END":
            if c.ins in ends:
                out.append(Violation("DuplicateGate", f"instruction {c.ins} ended twice"))
            ends[c.ins] = c
    for n, ins in g.instructions.items():
        if n not in starts or n not in ends:
            out.append(Violation("MissingGate", f"instruction {n} never executed"))
            continue
        s = starts[n]
        if s.gate is not ins.gate or s.operands != ins.operands:
            out.append(Violation("GateMismatch", f"instruction {n} is {s.gate.token} {s.operands}"))
        if ends[n].t - s.t != gate_delay(ins.gate, tech):
            out.append(Violation("GateDurationViolation", f"instruction {n} lasts {ends[n].t - s.t}"))
    for extra in sorted(set(starts) - set(g.instructions)):
        out.append(Violation("MissingGate", f"unknown instruction {extra}"))
    if out:
        return out

    for a, b in sorted(g.edges):
        if starts[b].t < ends[a].t:
            out.append(
                Violation(
                    "DependencyViolation",
                    f"instruction {b} starts at {fmt_time(starts[b].t)} before {a} ends at {fmt_time(ends[a].t)}",
                )
            )

    # per-qubit replay: continuity, no overlap, occupancy intervals
    pos = dict(tr.initial)
    busy_until = {q: 0 for q in pos}
    run_in, junc_in = {}, {}
    run_iv, junc_iv = [], []
    moving = {q: [] for q in pos}  # q -> [(t, duration)] since last gate
    routing = {}
    gate_of = {}
    for c in tr.commands:
        if c.kind in ("MOVE", "TURN"):
            q = c.qubit
            if q not in pos:
                out.append(Violation("ContinuityViolation", f"unplaced qubit {q}"))
                continue
            if c.t < busy_until[q]:
                out.append(Violation("ContinuityViolation", f"{q} overlaps its own commands at t={fmt_time(c.t)}"))
            if q in gate_of:
                out.append(Violation("ContinuityViolation", f"{q} moves during gate {gate_of[q]}"))
            if c.src != pos[q]:
                out.append(Violation("ContinuityViolation", f"{q} {c.kind} from {c.src}, but it is at {pos[q]}"))
            d = c.duration(tech)
            busy_until[q] = c.t + d
            moving[q].append((c.t, d))
            if c.kind == "TURN":
                if fabric.kind_at(*c.src) is not CellKind.JUNCTION:
                    out.append(Violation("ContinuityViolation", f"{q} turns outside a junction at {c.src}"))
                continue
            x, y = c.src, c.dst
            if abs(x[0] - y[0]) + abs(x[1] - y[1]) != 1 or fabric.kind_at(*y) in (None, CellKind.EMPTY):
                out.append(Violation("ContinuityViolation", f"{q} jumps {x}->{y}"))
            pos[q] = y
            rx, ry = run_of.get(x), run_of.get(y)
            if rx is not None and rx != ry:
                run_iv.append((("run", rx), run_in.pop((q, rx), c.t), c.t))
            if ry is not None and ry != rx:
                run_in[(q, ry)] = c.t
            if fabric.kind_at(*x) is CellKind.JUNCTION:
                junc_iv.append((("junction", x), junc_in.pop((q, x), c.t), c.t))
            if fabric.kind_at(*y) is CellKind.JUNCTION:
                junc_in[(q, y)] = c.t
        elif c.kind == "GATE_START":
            if fabric.kind_at(*c.src) is not CellKind.TRAP:
                out.append(Violation("GateLocationViolation", f"instruction {c.ins} at non-trap {c.src}"))
            delays = []
            for q in c.operands:
                if pos.get(q) != c.src:
                    out.append(
                        Violation("GateLocationViolation", f"instruction {c.ins}: {q} is at {pos.get(q)}, not {c.src}")
                    )
                if c.t < busy_until.get(q, 0):
                    out.append(Violation("ContinuityViolation", f"{q} still moving when {c.ins} starts"))
                delays.append(moving.get(q, []))
                moving[q] = []
                gate_of[q] = c.ins
            routing[c.ins] = delays
        else:
            for q in starts[c.ins].operands:
                gate_of.pop(q, None)
    for (q, res), t0 in run_in.items():
        run_iv.append((("run", res), t0, float("inf")))
    for (q, cell), t0 in junc_in.items():
        junc_iv.append((("junction", cell), t0, float("inf")))
    _sweep(run_iv, tech.channel_capacity, "Channel", out)
    _sweep(junc_iv, tech.junction_capacity, "Junction", out)

    # latency decomposition per instruction
    for n in sorted(g.instructions):
        eligible = max((ends[p].t for p in g.preds[n]), default=0)
        start, end = starts[n].t, ends[n].t
        per_op = routing.get(n, [])
        route_delay = max((_window(moves, eligible, start) for moves in per_op), default=0)
        gate = end - start
        congestion = end - eligible - gate - route_delay
        first_move = min((t for moves in per_op for t, _ in moves), default=start)
        if timings is not None and first_move < eligible:
            # the simulator only moves operands once an instruction is issued
            out.append(Violation("DecompositionViolation", f"instruction {n} moves operands before it is ready"))
        if congestion < 0:
            out.append(Violation("DecompositionViolation", f"instruction {n} has negative congestion wait"))
        if timings is not None:
            tm = timings.get(n)
            if tm is None:
                out.append(Violation("DecompositionViolation", f"no timing record for {n}"))
                continue
            if (tm.eligible, tm.gate, tm.routing, tm.congestion) != (eligible, gate, route_delay, congestion):
                out.append(
                    Violation(
                        "DecompositionViolation",
                        f"instruction {n}: recorded (ready={tm.eligible}, gate={tm.gate}, routing={tm.routing}, "
                        f"wait={tm.congestion}) vs trace (ready={eligible}, gate={gate}, "
                        f"routing={route_delay}, wait={congestion})",
                    )
                )
            if tm.span != tm.gate + tm.routing + tm.congestion:
                out.append(Violation("DecompositionViolation", f"instruction {n}: span does not add up"))
            for moves in per_op:
                if moves and (moves[0][0] != tm.issue or _gappy(moves)):
                    out.append(
                        Violation("DecompositionViolation", f"instruction {n}: operand does not move straight from issue")
                    )
    latency = max((c.t for c in ends.values()), default=0)
    if tr.total_latency != latency:
        out.append(Violation("LatencyViolation", f"total latency {tr.total_latency} != last gate end {latency}"))
    return out


def _window(moves, lo, hi) -> float:
    """Movement time of ``(t, duration)`` steps that falls inside ``[lo, hi]``."""
    return sum(max(0, min(t + d, hi) - max(t, lo)) for t, d in moves)


def _gappy(moves) -> bool:
    return any(t1 != t0 + d0 for (t0, d0), (t1, _) in zip(moves, moves[1:]))


def breakdown(tr: Trace, g, tech) -> dict:
    """Per-instruction latency split read off the commands of a trace.

    Returns ``ins -> dict(eligible, start, end, gate, routing, congestion,
    span, target)`` where ``routing`` is the longest operand movement inside
    the instruction's ready-to-start window and ``congestion`` the remainder
    of the span. Movement before the window (possible in time-reversed
    traces, where qubits pre-position) counts as neither.
    """
    starts = {c.ins: c for c in tr.commands if c.kind == "GATE_START"}
    ends = {c.ins: c.t for c in tr.commands if c.kind == "GATE_END"}
    moving = {q: [] for q in tr.initial}
    per_op = {}
    for c in tr.commands:
        if c.kind in ("MOVE", "TURN"):
            moving.setdefault(c.qubit, []).append((c.t, c.duration(tech)))
        elif c.kind == "GATE_START":
            per_op[c.ins] = [moving.get(q, []) for q in c.operands]
            for q in c.operands:
                moving[q] = []
    out = {}
    for n in sorted(starts):
        eligible = max((ends[p] for p in g.preds[n]), default=0)
        start, end = starts[n].t, ends[n]
        gate = end - start
        routing = max((_window(m, eligible, start) for m in per_op[n]), default=0)
        out[n] = {
            "eligible": eligible,
            "start": start,
            "end": end,
            "gate": gate,
            "routing": routing,
            "congestion": end - eligible - gate - routing,
            "span": end - eligible,
            "target": list(starts[n].src),
        }
    return out
