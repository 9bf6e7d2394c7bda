"""Initial qubit placement: center, Monte Carlo and multi-start forward/backward."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .fabric import Fabric, RoutingGraph, TechParams
from .qasm import Qidg, invert_to_uidg
from .scheduler import compute_priorities, priority_order, rank_priorities
from .sim import run
from .trace import Trace, reverse_trace


class InsufficientTraps(ValueError):
    pass


def center_traps(f: Fabric, k: int) -> list[tuple[int, int]]:
    """The ``k`` traps closest to the grid center, nearest first (ties row-major)."""
    traps = f.traps
    if k > len(traps):
        raise InsufficientTraps(f"{k} qubits but only {len(traps)} traps")
    cr, cc = f.rows - 1, f.cols - 1  # doubled center, keeps distances integral
    return sorted(traps, key=lambda rc: ((2 * rc[0] - cr) ** 2 + (2 * rc[1] - cc) ** 2, rc))[:k]


def center_placement(f: Fabric, qubits, rng: random.Random | None = None) -> dict:
    qubits = list(qubits)
    sites = center_traps(f, len(qubits))
    if rng is not None:
        qubits = qubits[:]
        rng.shuffle(qubits)
    return dict(zip(qubits, sites))


@dataclass
class PlacerRunRecord:
    direction: str  # "forward" | "backward"
    initial: dict
    final: dict
    latency: float
    trace: Trace | None = None
    seed: int = 0
    index: int = 0  # position within its seed's run sequence


@dataclass
class PlacerResult:
    best: PlacerRunRecord
    records: list[PlacerRunRecord] = field(default_factory=list)

    @property
    def placement_runs(self) -> int:
        return len(self.records)


class Mapper:
    """Runs forward (dependency graph) and backward (uncompute graph) simulations.

    One routing graph is reused across runs; every run leaves it free of
    reservations.
    """

    def __init__(self, g: Qidg, f: Fabric, tech: TechParams, qubits=None, audit=False):
        self.g = g
        self.uidg = invert_to_uidg(g)
        self.fabric = f
        self.tech = tech
        self.graph = RoutingGraph(f, tech)
        self.audit = audit
        if qubits is None:
            qubits = sorted({q for ins in g.instructions.values() for q in ins.operands})
        self.qubits = list(qubits)
        self.forward_priorities = compute_priorities(g, tech)
        self.schedule = priority_order(self.forward_priorities)
        self.backward_priorities = rank_priorities(self.schedule[::-1])

    def simulate(self, placement, direction="forward") -> Trace:
        if direction == "forward":
            tr = run(self.g, placement, self.graph, self.forward_priorities, audit=self.audit)
        else:
            tr = run(self.uidg, placement, self.graph, self.backward_priorities, audit=self.audit)
            tr.direction = "backward"
        return tr

    def record(self, placement, direction, seed=0, index=0, keep_trace=True) -> PlacerRunRecord:
        tr = self.simulate(placement, direction)
        return PlacerRunRecord(
            direction, dict(placement), dict(tr.final), tr.total_latency, tr if keep_trace else None, seed, index
        )

    def report(self, rec: PlacerRunRecord) -> PlacerRunRecord:
        """Reportable solution for a run: backward runs are replayed in reverse."""
        if rec.direction == "forward":
            return rec
        trace = rec.trace if rec.trace is not None else self.simulate(rec.initial, "backward")
        rev = reverse_trace(trace, self.tech)
        # the run's latency is reported; the reversed trace can end sooner because
        # the moves that led up to the run's first gates trail its last gate
        return PlacerRunRecord("backward", dict(rec.final), dict(rec.initial), rec.latency, rev, rec.seed, rec.index)


def derive_seed(base: int, index: int) -> int:
    digest = hashlib.sha256(f"{base}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def monte_carlo_place(mapper: Mapper, runs: int, rng_seed: int = 0) -> PlacerResult:
    """Best of ``runs`` random permutations over the center traps."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rng = random.Random(rng_seed)
    records = []
    best = None
    for i in range(runs):
        p = center_placement(mapper.fabric, mapper.qubits, rng)
        rec = mapper.record(p, "forward", index=i, keep_trace=False)
        records.append(rec)
        if best is None or rec.latency < best.latency:
            best = rec
    best = mapper.record(best.initial, "forward", index=best.index)
    return PlacerResult(best, records)


def runs_until_stall(latencies, patience: int) -> int:
    """How many runs of a latency sequence a seed executes before stalling."""
    best, since = None, 0
    for i, lat in enumerate(latencies, start=1):
        if best is None or lat < best:
            best, since = lat, 0
        else:
            since += 1
        if since >= patience:
            return i
    return len(latencies)


def mvfb_seed(mapper: Mapper, seed_index: int, patience: int, rng_seed: int = 0):
    """One MVFB seed: alternate forward/backward runs until ``patience`` stalls."""
    rng = random.Random(derive_seed(rng_seed, seed_index))
    placement = center_placement(mapper.fabric, mapper.qubits, rng)
    direction = "forward"
    best, since = None, 0
    records = []
    while True:
        rec = mapper.record(placement, direction, seed=seed_index, index=len(records), keep_trace=False)
        records.append(rec)
        if best is None or rec.latency < best:
            best, since = rec.latency, 0
        else:
            since += 1
        if since >= patience:
            return records
        placement = rec.final
        direction = "backward" if direction == "forward" else "forward"


def mvfb_place(mapper: Mapper, seeds_m: int, patience: int = 3, rng_seed: int = 0) -> PlacerResult:
    """Multi-start variable-length forward/backward placement.

    Seed ``i`` draws its starting permutation from a stream derived from
    ``(rng_seed, i)`` only, so the first ``m`` seeds are identical for any
    larger ``seeds_m``.
    """
    if seeds_m < 1 or patience < 1:
        raise ValueError("seeds_m and patience must be >= 1")
    records = []
    for i in range(seeds_m):
        records.extend(mvfb_seed(mapper, i, patience, rng_seed))
    best = min(records, key=lambda r: (r.latency, r.seed, r.index))
    # re-simulate the winner to recover its trace; runs are deterministic
    winner = mapper.record(best.initial, best.direction, best.seed, best.index)
    assert winner.latency == best.latency
    return PlacerResult(mapper.report(winner), records)
