"""Event-driven execution of a scheduled program on the fabric."""

from __future__ import annotations

import heapq
import itertools

from .fabric import RoutingGraph
from .qasm import gate_delay
from .router import Congested, route_instruction
from .scheduler import BusyQueue, pick_next
from .trace import InstructionTiming, MicroCommand, Trace

# event kinds, in tie-break order
CHANNEL_EXITED = 0
INSTRUCTION_FINISHED = 1


class Stuck(RuntimeError):
    """Instructions remain but nothing is in flight to unblock them."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


class Simulator:
    def __init__(self, g, placement, graph: RoutingGraph, priorities, audit=False):
        self.g = g
        self.graph = graph
        self.tech = graph.tech
        self.fabric = graph.fabric
        self.priorities = priorities
        self.audit = audit
        self.traps = graph.fabric.traps
        trap_set = set(self.traps)
        per_trap = {}
        for q, cell in placement.items():
            if cell not in trap_set:
                raise ValueError(f"{q} is placed on non-trap cell {cell}")
            per_trap[cell] = per_trap.get(cell, 0) + 1
        # a hand-off placement may leave the two operands of a final gate together
        if any(k > 2 for k in per_trap.values()):
            raise ValueError("more than two qubits share a trap")
        if graph.active_tokens():
            raise ValueError("routing graph carries live reservations")
        self.initial = dict(placement)
        self.loc = dict(placement)
        self.residents: dict[tuple, set] = {}
        for q, cell in placement.items():
            self.residents.setdefault(cell, set()).add(q)
        self.holds: dict[tuple, int] = {}
        self.completed: set[int] = set()
        self.in_flight: set[int] = set()
        self.waiting = {n: len(g.preds[n]) for n in g.instructions}
        self.fresh = {n for n, k in self.waiting.items() if k == 0}
        self.eligible = {n: 0 for n in self.fresh}
        self.busy = BusyQueue()
        self.events = []
        self._seq = itertools.count()
        self.commands = []
        self.timings = {}
        self.issue_order = []

    # -- bookkeeping -------------------------------------------------------

    def _emit(self, cmd: MicroCommand):
        self.commands.append((cmd.t, next(self._seq), cmd))

    def _push(self, t, kind, key, payload):
        heapq.heappush(self.events, (t, kind, key, next(self._seq), payload))

    def _unusable_traps(self, operands) -> set:
        ops = set(operands)
        bad = set(self.holds)
        for cell, qs in self.residents.items():
            if qs - ops:
                bad.add(cell)
        return bad

    # -- main loop -----------------------------------------------------------

    def run(self) -> Trace:
        now = 0
        self._try_issue(now)
        while self.events:
            now = self.events[0][0]
            while self.events and self.events[0][0] == now:
                _, kind, _, _, payload = heapq.heappop(self.events)
                if kind == CHANNEL_EXITED:
                    token, resource = payload
                    self.graph.release(token, resource)
                else:
                    self._finish(payload, now)
                # any status change makes parked instructions worth retrying
                self.busy.mark_all_eligible()
            if self.audit:
                problems = self.graph.audit()
                if problems:
                    raise AssertionError(f"t={now}: {problems}")
            self._try_issue(now)
        if len(self.completed) != len(self.g.instructions):
            remaining = sorted(set(self.g.instructions) - self.completed)
            state = {
                "time": now,
                "remaining": remaining,
                "busy": list(self.busy),
                "ready": sorted(self.fresh),
                "locations": dict(self.loc),
                "holds": dict(self.holds),
            }
            raise Stuck(f"stuck at t={now} with {len(remaining)} instruction(s) left", state)
        ordered = [c for _, _, c in sorted(self.commands, key=lambda x: (x[0], x[1]))]
        total = max((tm.end for tm in self.timings.values()), default=0)
        return Trace(ordered, self.initial, dict(self.loc), total, self.timings, self.issue_order)

    def _try_issue(self, now):
        while True:
            n = pick_next(self.fresh, self.priorities, self.busy)
            if n is None:
                return
            queued = n in self.fresh
            ins = self.g.instructions[n]
            try:
                route = route_instruction(
                    ins, self.loc, self.graph, self.traps, self._unusable_traps(ins.operands)
                )
            except Congested:
                if queued:
                    self.fresh.discard(n)
                    self.busy.push(n, now)
                else:
                    self.busy.mark_ineligible(n)
                continue
            if queued:
                self.fresh.discard(n)
            else:
                self.busy.remove(n)
            self._issue(n, ins, route, now)

    def _issue(self, n, ins, route, now):
        tech = self.tech
        self.in_flight.add(n)
        self.issue_order.append(n)
        target = route.target
        for q in ins.operands:
            self.residents[self.loc[q]].discard(q)
            if not self.residents[self.loc[q]]:
                del self.residents[self.loc[q]]
            self.loc[q] = target
            self.residents.setdefault(target, set()).add(q)
        if len(ins.operands) == 2:
            self.holds[target] = n
        run_of = self.graph.run_of_cell
        junctions = self.graph.junction_occ
        for q in ins.operands:
            t = now
            token = route.tokens.get(q)
            for step in route.walks[q]:
                if step[0] == "turn":
                    self._emit(MicroCommand(t, "TURN", q, step[1], direction=step[2]))
                    t += tech.turn_extra
                    continue
                _, x, y = step
                self._emit(MicroCommand(t, "MOVE", q, x, y))
                rx = run_of.get(x)
                if rx is not None and rx != run_of.get(y):
                    self._push(t, CHANNEL_EXITED, token.id, (token, ("run", rx)))
                if x in junctions:
                    self._push(t, CHANNEL_EXITED, token.id, (token, ("junction", x)))
                t += tech.t_move
        start = now + route.routing_delay
        delay = gate_delay(ins.gate, tech)
        end = start + delay
        self._emit(MicroCommand(start, "GATE_START", src=target, ins=n, gate=ins.gate, operands=ins.operands))
        self._emit(MicroCommand(end, "GATE_END", ins=n))
        self._push(end, INSTRUCTION_FINISHED, n, n)
        self.timings[n] = InstructionTiming(
            eligible=self.eligible[n],
            issue=now,
            start=start,
            end=end,
            routing=route.routing_delay,
            congestion=now - self.eligible[n],
            gate=delay,
            target=target,
        )

    def _finish(self, n, now):
        self.in_flight.discard(n)
        self.completed.add(n)
        target = self.timings[n].target
        if self.holds.get(target) == n:
            del self.holds[target]
        for s in self.g.succs[n]:
            self.waiting[s] -= 1
            if self.waiting[s] == 0:
                self.fresh.add(s)
                self.eligible[s] = now


def run(g, placement, graph: RoutingGraph, priorities, audit=False) -> Trace:
    """Simulate ``g`` from ``placement``; the graph must be free of reservations."""
    return Simulator(g, placement, graph, priorities, audit=audit).run()
