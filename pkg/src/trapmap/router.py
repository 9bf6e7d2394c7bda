"""Target-trap selection and congestion-aware shortest-path routing."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .fabric import INF, CapacityViolated, RoutingGraph, is_junction_vertex, vertex_cell


class NoFreeTrap(RuntimeError):
    pass


class Step(NamedTuple):
    edge: object
    src: tuple
    dst: tuple


@dataclass
class Route:
    target: tuple[int, int]
    paths: dict  # operand -> list[Step]
    walks: dict  # operand -> list of micro-steps, see walk()
    delays: dict  # operand -> path delay
    tokens: dict = field(default_factory=dict)  # operand -> Token (unset for empty paths)

    @property
    def routing_delay(self) -> float:
        return max(self.delays.values(), default=0)


class Congested(Exception):
    """An instruction could not be routed right now."""


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def median_cell(src, dst) -> tuple[int, int]:
    return (_round_half_up((src[0] + dst[0]) / 2), _round_half_up((src[1] + dst[1]) / 2))


def select_target_trap(src, dst, traps, occupied, nearest=None) -> tuple[int, int]:
    """Free trap nearest (Euclidean) to the rounded median of ``src``/``dst``.

    ``traps`` is every trap coordinate in row-major order; ``occupied`` the
    ones that may not be used for this instruction. ``nearest`` optionally
    maps a cell to the traps already sorted by that rule.
    """
    if nearest is not None:
        for t in nearest(median_cell(src, dst)):
            if t not in occupied:
                return t
        raise NoFreeTrap("every trap is occupied")
    mr, mc = median_cell(src, dst)
    best, best_d = None, INF
    for r, c in traps:
        if (r, c) in occupied:
            continue
        d = (r - mr) ** 2 + (c - mc) ** 2
        if d < best_d:
            best, best_d = (r, c), d
    if best is None:
        raise NoFreeTrap("every trap is occupied")
    return best


def find_path(g: RoutingGraph, source, target) -> list[Step] | None:
    """Dijkstra over the turn-aware graph using the live edge weights.

    Full channels and full junctions are impassable and traps other than the
    endpoints are never passed through. Returns ``None`` when unreachable.
    """
    if source == target:
        return []
    tech = g.tech
    turn_w, cap, jcap = tech.turn_weight, tech.channel_capacity, tech.junction_capacity
    run_occ, junction_occ = g.run_occ, g.junction_occ
    dist = {source: 0}
    prev = {}
    heap = [(0, source)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        if v == target:
            break
        done.add(v)
        if v[0] == "T" and v != source:
            continue
        for u, e, kind, run, length, jcell in g.neighbours[v]:
            if kind == "turn":
                w = turn_w
            elif kind == "hop":
                w = 0
            else:
                n = run_occ[run]
                if n >= cap:
                    continue
                w = (n + 1) * length
            if u in done:
                continue
            if jcell is not None:
                if junction_occ[jcell] >= jcap:
                    continue
            elif u[0] == "T" and u != target:
                continue
            nd = d + w
            if nd < dist.get(u, INF):
                dist[u] = nd
                prev[u] = (e, v)
                heapq.heappush(heap, (nd, u))
    if target not in prev:
        return None
    steps = []
    v = target
    while v != source:
        e, p = prev[v]
        steps.append(Step(e, p, v))
        v = p
    steps.reverse()
    return steps


def path_cost(g: RoutingGraph, path) -> float:
    return sum(g.weight(s.edge) for s in path)


def walk(path) -> list[tuple]:
    """Micro-steps of a path.

    Items are ``("move", from_cell, to_cell)`` and
    ``("turn", junction_cell, "H2V" | "V2H")``.
    """
    if not path:
        return []
    here = vertex_cell(path[0].src)
    out = []
    for s in path:
        e = s.edge
        if e.kind == "turn":
            out.append(("turn", here, f"{s.src[0]}2{s.dst[0]}"))
            continue
        cells = list(e.cells_from(s.src))
        if s.dst[0] != "D":
            cells.append(vertex_cell(s.dst))
        for c in cells:
            if c != here:
                out.append(("move", here, c))
                here = c
    return out


def walk_delay(steps, tech) -> float:
    moves = sum(1 for s in steps if s[0] == "move")
    turns = len(steps) - moves
    return moves * tech.t_move + turns * tech.turn_extra


def turn_count(path) -> int:
    return sum(1 for s in path if s.edge.kind == "turn")


def route_instruction(ins, locations, g: RoutingGraph, traps, occupied) -> Route:
    """Route the operands of ``ins`` and reserve their paths.

    ``locations`` maps qubit -> trap cell; ``occupied`` is the set of traps
    unusable as this instruction's target. Raises :class:`Congested` with
    every occupancy counter left untouched when either operand cannot be
    routed.
    """
    if len(ins.operands) == 1:
        q = ins.operands[0]
        return Route(locations[q], {q: []}, {q: []}, {q: 0})
    a, b = ins.operands
    try:
        target = select_target_trap(locations[a], locations[b], traps, occupied, g.traps_nearest)
    except NoFreeTrap as exc:
        raise Congested(str(exc)) from None
    tv = g.trap_vertex[target]
    paths, walks, delays, tokens = {}, {}, {}, {}
    try:
        for q in (a, b):
            path = find_path(g, g.trap_vertex[locations[q]], tv)
            if path is None:
                raise Congested(f"no path for {q} to {target}")
            paths[q] = path
            if path:
                tokens[q] = g.reserve_path(path)
            walks[q] = walk(path)
            delays[q] = walk_delay(walks[q], g.tech)
    except (Congested, CapacityViolated) as exc:
        for tok in tokens.values():
            g.release_all(tok)
        raise Congested(str(exc)) from None
    return Route(target, paths, walks, delays, tokens)


def junction_visits(path) -> list:
    cells = []
    for s in path:
        for v in (s.src, s.dst):
            if is_junction_vertex(v) and (not cells or cells[-1] != vertex_cell(v)):
                cells.append(vertex_cell(v))
    return cells
