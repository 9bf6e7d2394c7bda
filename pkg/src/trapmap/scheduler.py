"""Static list-scheduling priorities, the ready set and the busy queue."""

from __future__ import annotations

from dataclasses import dataclass

from .qasm import Qidg, gate_delay


@dataclass(frozen=True)
class Priority:
    descendant_count: int
    tail_delay: float
    combined: float


def compute_priorities(g: Qidg, tech, alpha=None, beta=None) -> dict[int, Priority]:
    """Priority of every node: weighted descendant count plus tail delay.

    The descendant count is scaled by the two-qubit gate delay so both terms
    are in microseconds.
    """
    alpha = tech.priority_alpha if alpha is None else alpha
    beta = tech.priority_beta if beta is None else beta
    below: dict[int, int] = {}  # node -> bitset of transitive successors
    tail: dict[int, float] = {}
    for n in reversed(g.topological_order()):
        bits = 0
        longest = 0
        for s in g.succs[n]:
            bits |= below[s] | (1 << s)
            longest = max(longest, tail[s])
        below[n] = bits
        tail[n] = gate_delay(g.gate(n), tech) + longest
    out = {}
    for n in g.nodes:
        count = bin(below[n]).count("1")
        out[n] = Priority(count, tail[n], alpha * count * tech.t_gate_2q + beta * tail[n])
    return out


def rank_priorities(order) -> dict[int, Priority]:
    """Priorities that make list scheduling follow ``order`` (first = highest)."""
    n = len(order)
    return {node: Priority(0, 0, n - i) for i, node in enumerate(order)}


def priority_order(priorities: dict[int, Priority]) -> list[int]:
    """Total order on nodes: highest combined priority first, ties by id."""
    return sorted(priorities, key=lambda n: (-priorities[n].combined, n))


def ready_set(g: Qidg, completed, in_flight) -> set[int]:
    return {
        n
        for n in g.instructions
        if n not in completed and n not in in_flight and g.preds[n] <= completed
    }


class BusyQueue:
    """FIFO of instructions that failed to route, retried on status changes."""

    def __init__(self):
        self._entries: list[list] = []  # [id, enqueue_time, eligible]

    def __len__(self):
        return len(self._entries)

    def __contains__(self, node):
        return any(e[0] == node for e in self._entries)

    def __iter__(self):
        return (e[0] for e in self._entries)

    def push(self, node: int, time) -> None:
        if node in self:
            raise ValueError(f"instruction {node} is already queued")
        self._entries.append([node, time, False])

    def enqueued_at(self, node: int):
        for e in self._entries:
            if e[0] == node:
                return e[1]
        raise KeyError(node)

    def mark_all_eligible(self) -> None:
        for e in self._entries:
            e[2] = True

    def mark_ineligible(self, node: int) -> None:
        for e in self._entries:
            if e[0] == node:
                e[2] = False

    def remove(self, node: int) -> None:
        self._entries = [e for e in self._entries if e[0] != node]

    def first_eligible(self):
        for e in self._entries:
            if e[2]:
                return e[0]
        return None


def pick_next(ready, priorities, busy: BusyQueue | None = None):
    """Next instruction to try: an eligible busy entry first, else the best fresh one.

    ``ready`` holds fresh (not queued) ready nodes. Returns ``None`` when
    there is nothing to try.
    """
    if busy is not None:
        head = busy.first_eligible()
        if head is not None:
            return head
    if not ready:
        return None
    return min(ready, key=lambda n: (-priorities[n].combined, n))
