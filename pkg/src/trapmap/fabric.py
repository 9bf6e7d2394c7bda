"""Ion-trap fabric grid, technology parameters and the turn-aware routing graph.

Grid files hold one character per cell: ``J`` junction, ``C`` channel,
``T`` trap, ``.`` empty. Coordinates are ``(row, col)``.

Routing-graph vertices are tuples ``(kind, row, col)``: every junction
contributes an ``"H"`` and a ``"V"`` vertex, every trap a ``"T"`` vertex, and
a channel that ends at the grid boundary a ``"D"`` (dead-end) vertex placed
on its last cell.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, fields

INF = math.inf


class FabricError(ValueError):
    pass


class RaggedRows(FabricError):
    pass


class UnknownCell(FabricError):
    def __init__(self, char, row, col):
        super().__init__(f"unknown cell {char!r} at ({row},{col})")
        self.char, self.row, self.col = char, row, col


class BentChannel(FabricError):
    def __init__(self, coords):
        super().__init__(f"channel cell {coords} connects both horizontally and vertically")
        self.coords = coords


class DanglingChannel(FabricError):
    def __init__(self, coords):
        super().__init__(f"channel run ending at {coords} runs into an empty cell")
        self.coords = coords


class OrphanTrap(FabricError):
    def __init__(self, coords):
        super().__init__(f"trap at {coords} touches no channel or junction")
        self.coords = coords


class CapacityViolated(RuntimeError):
    pass


class DoubleRelease(RuntimeError):
    pass


class UnknownToken(KeyError):
    pass


class CellKind(enum.Enum):
    JUNCTION = "J"
    CHANNEL = "C"
    TRAP = "T"
    EMPTY = "."


_CHARS = {k.value: k for k in CellKind}


@dataclass(frozen=True)
class Fabric:
    rows: int
    cols: int
    cells: tuple[tuple[CellKind, ...], ...]

    def __getitem__(self, rc) -> CellKind:
        return self.cells[rc[0]][rc[1]]

    def inside(self, r, c) -> bool:
        return 0 <= r < self.rows and 0 <= c < self.cols

    def kind_at(self, r, c):
        return self.cells[r][c] if self.inside(r, c) else None

    def coords(self, kind: CellKind) -> list[tuple[int, int]]:
        return [
            (r, c) for r in range(self.rows) for c in range(self.cols) if self.cells[r][c] is kind
        ]

    @property
    def traps(self) -> list[tuple[int, int]]:
        return self.coords(CellKind.TRAP)

    @property
    def junctions(self) -> list[tuple[int, int]]:
        return self.coords(CellKind.JUNCTION)

    def render(self) -> str:
        return "".join("".join(k.value for k in row) + "\n" for row in self.cells)


def parse_fabric(text: str) -> Fabric:
    lines = [ln.rstrip("\r") for ln in text.split("\n")]
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise FabricError("empty fabric")
    width = len(lines[0])
    for r, ln in enumerate(lines):
        if len(ln) != width:
            raise RaggedRows(f"row {r} has {len(ln)} cells, expected {width}")
    cells = []
    for r, ln in enumerate(lines):
        row = []
        for c, ch in enumerate(ln):
            if ch not in _CHARS:
                raise UnknownCell(ch, r, c)
            row.append(_CHARS[ch])
        cells.append(tuple(row))
    fabric = Fabric(len(lines), width, tuple(cells))
    channel_runs(fabric)
    for r, c in fabric.traps:
        if not any(
            fabric.kind_at(r + dr, c + dc) in (CellKind.CHANNEL, CellKind.JUNCTION)
            for dr, dc in _NEIGHBOURS
        ):
            raise OrphanTrap((r, c))
    return fabric


_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))
_WIRES = (CellKind.CHANNEL, CellKind.JUNCTION)


def _channel_orientation(f: Fabric, r: int, c: int) -> str:
    horiz = any(f.kind_at(r, c + d) in _WIRES for d in (-1, 1))
    vert = any(f.kind_at(r + d, c) in _WIRES for d in (-1, 1))
    if horiz and vert:
        raise BentChannel((r, c))
    if horiz:
        return "H"
    if vert:
        return "V"
    # isolated cell: follow an in-line trap if there is one on a single axis
    trap_v = any(f.kind_at(r + d, c) is CellKind.TRAP for d in (-1, 1))
    trap_h = any(f.kind_at(r, c + d) is CellKind.TRAP for d in (-1, 1))
    return "V" if trap_v and not trap_h else "H"


@dataclass(frozen=True)
class ChannelRun:
    id: int
    orientation: str  # "H" or "V"
    cells: tuple[tuple[int, int], ...]  # ordered left-to-right / top-to-bottom

    def __len__(self):
        return len(self.cells)


def channel_runs(f: Fabric) -> list[ChannelRun]:
    """Maximal straight channel runs, validated."""
    orient = {}
    for r, c in f.coords(CellKind.CHANNEL):
        orient[(r, c)] = _channel_orientation(f, r, c)
    runs = []
    seen = set()
    for (r, c), o in sorted(orient.items()):
        if (r, c) in seen:
            continue
        dr, dc = (0, 1) if o == "H" else (1, 0)
        cells = []
        rr, cc = r, c
        while orient.get((rr, cc)) == o:
            cells.append((rr, cc))
            seen.add((rr, cc))
            rr, cc = rr + dr, cc + dc
        # a run glued to a differently-oriented channel would have been
        # reported as bent already
        for end, (er, ec) in ((cells[0], (r - dr, c - dc)), (cells[-1], (rr, cc))):
            k = f.kind_at(er, ec)
            if k is CellKind.EMPTY:
                raise DanglingChannel(end)
        runs.append(ChannelRun(len(runs), o, tuple(cells)))
    return runs


# ---------------------------------------------------------------------------
# technology parameters


@dataclass(frozen=True)
class TechParams:
    t_move: float = 1
    t_turn: float = 10
    t_gate_1q: float = 10
    t_gate_2q: float = 100
    channel_capacity: int = 2
    junction_capacity: int = 2
    priority_alpha: float = 1
    priority_beta: float = 1

    def __post_init__(self):
        if self.t_gate_1q <= 0 or self.t_gate_2q <= 0:
            raise ValueError("gate delays must be positive")
        if self.t_move < 0 or self.t_turn < self.t_move:
            raise ValueError("need 0 <= t_move <= t_turn")
        if self.channel_capacity < 1 or self.junction_capacity < 1:
            raise ValueError("capacities must be at least 1")

    @property
    def turn_extra(self) -> float:
        """Time a turning relocation takes beyond a plain move."""
        return self.t_turn - self.t_move

    @property
    def turn_weight(self) -> float:
        """Turn-edge weight in cell units."""
        if self.t_move > 0:
            return self.turn_extra / self.t_move
        return self.t_turn


_CONFIG_KEYS = {
    "t_move_us": "t_move",
    "t_turn_us": "t_turn",
    "t_gate_1q_us": "t_gate_1q",
    "t_gate_2q_us": "t_gate_2q",
    "channel_capacity": "channel_capacity",
    "junction_capacity": "junction_capacity",
    "priority_alpha": "priority_alpha",
    "priority_beta": "priority_beta",
}
_INT_KEYS = {"channel_capacity", "junction_capacity"}


def _number(text: str):
    v = float(text)
    return int(v) if v.is_integer() else v


def parse_tech(text: str) -> TechParams:
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            num = _number(value)
        except ValueError:
            raise ValueError(f"line {lineno}: {value!r} is not a number") from None
        if key in _INT_KEYS and not isinstance(num, int):
            raise ValueError(f"line {lineno}: {key} must be an integer")
        kwargs[_CONFIG_KEYS[key]] = num
    return TechParams(**kwargs)


def render_tech(t: TechParams) -> str:
    inv = {v: k for k, v in _CONFIG_KEYS.items()}
    return "".join(f"{inv[f.name]} = {getattr(t, f.name)}\n" for f in fields(t))


# ---------------------------------------------------------------------------
# routing graph


@dataclass(frozen=True)
class Edge:
    id: int
    kind: str  # "channel" | "turn" | "hop" | "tap"
    u: tuple
    v: tuple
    cells: tuple = ()  # channel cells crossed, in u -> v order
    run: int | None = None  # channel run whose occupancy this edge uses
    junction: tuple | None = None  # turn edges only

    @property
    def length(self) -> int:
        return len(self.cells)

    def other(self, x):
        return self.v if x == self.u else self.u

    def cells_from(self, x) -> tuple:
        return self.cells if x == self.u else self.cells[::-1]


def vertex_cell(v) -> tuple[int, int]:
    return (v[1], v[2])


def is_junction_vertex(v) -> bool:
    return v[0] in ("H", "V")


@dataclass
class Token:
    id: int
    resources: list  # [("run", id) | ("junction", cell)], with repeats
    released: list = field(default_factory=list)

    def pending(self) -> list:
        return [r for r, done in zip(self.resources, self.released) if not done]


class RoutingGraph:
    def __init__(self, fabric: Fabric, tech: TechParams | None = None):
        self.fabric = fabric
        self.tech = tech or TechParams()
        self.vertices: set = set()
        self.edges: list[Edge] = []
        self.adj: dict = {}
        self.runs = channel_runs(fabric)
        self.run_of_cell = {cell: run.id for run in self.runs for cell in run.cells}
        self.run_occ = [0] * len(self.runs)
        self.junction_occ = {cell: 0 for cell in fabric.junctions}
        self.trap_vertex = {}
        self._tokens: dict[int, Token] = {}
        self._token_ids = itertools.count()
        self._build()
        # per-vertex (neighbour, edge, kind, run, length, junction cell | None),
        # the static part of every edge relaxation
        self.neighbours = {
            v: tuple(
                (u := e.other(v), e, e.kind, e.run, e.length, vertex_cell(u) if is_junction_vertex(u) else None)
                for e in es
            )
            for v, es in self.adj.items()
        }
        self._trap_order: dict = {}

    # -- construction --------------------------------------------------

    def _add_vertex(self, v):
        if v not in self.vertices:
            self.vertices.add(v)
            self.adj[v] = []

    def _add_edge(self, kind, u, v, **kw):
        e = Edge(len(self.edges), kind, u, v, **kw)
        self.edges.append(e)
        self.adj[u].append(e)
        self.adj[v].append(e)
        return e

    def _end_vertex(self, run: ChannelRun, cell, beyond):
        k = self.fabric.kind_at(*beyond)
        if k is CellKind.JUNCTION:
            return (run.orientation,) + beyond
        if k is CellKind.TRAP:
            return ("T",) + beyond
        return ("D",) + cell

    def _build(self):
        f = self.fabric
        for r, c in f.junctions:
            self._add_vertex(("H", r, c))
            self._add_vertex(("V", r, c))
        for r, c in f.traps:
            self._add_vertex(("T", r, c))
            self.trap_vertex[(r, c)] = ("T", r, c)

        self.run_ends = {}
        for run in self.runs:
            dr, dc = (0, 1) if run.orientation == "H" else (1, 0)
            (r0, c0), (r1, c1) = run.cells[0], run.cells[-1]
            u = self._end_vertex(run, run.cells[0], (r0 - dr, c0 - dc))
            v = self._end_vertex(run, run.cells[-1], (r1 + dr, c1 + dc))
            self._add_vertex(u)
            self._add_vertex(v)
            self.run_ends[run.id] = (u, v)
            self._add_edge("channel", u, v, cells=run.cells, run=run.id)

        for r, c in f.junctions:
            self._add_edge("turn", ("H", r, c), ("V", r, c), junction=(r, c))

        for r, c in f.traps:
            t = ("T", r, c)
            lateral = []
            for dr, dc in _NEIGHBOURS:
                nb = (r + dr, c + dc)
                k = f.kind_at(*nb)
                if k is CellKind.JUNCTION:
                    self._add_edge("hop", t, ("H" if dr == 0 else "V",) + nb)
                elif k is CellKind.CHANNEL:
                    run = self.runs[self.run_of_cell[nb]]
                    inline = (dr == 0) == (run.orientation == "H")
                    if not inline:
                        lateral.append((run, run.cells.index(nb)))
            for run, k in lateral:
                u, v = self.run_ends[run.id]
                self._add_edge("tap", t, u, cells=run.cells[k::-1], run=run.id)
                self._add_edge("tap", t, v, cells=run.cells[k:], run=run.id)
        # trap-to-trap edges along a shared run, without touching either end
        by_run = {}
        for e in self.edges:
            if e.kind == "tap" and e.v == self.run_ends[e.run][1]:
                by_run.setdefault(e.run, []).append((len(self.runs[e.run]) - e.length, e.u))
        for rid, items in by_run.items():
            cells = self.runs[rid].cells
            for (ka, ta), (kb, tb) in itertools.combinations(sorted(items), 2):
                if ta != tb:
                    self._add_edge("tap", ta, tb, cells=cells[ka : kb + 1], run=rid)

    # -- inspection ------------------------------------------------------

    def edges_of(self, kind: str) -> list[Edge]:
        return [e for e in self.edges if e.kind == kind]

    def occupancy(self, e: Edge) -> int:
        return self.run_occ[e.run] if e.run is not None else 0

    def weight(self, e: Edge) -> float:
        return edge_weight(e, self.occupancy(e), self.tech)

    def junction_full(self, v) -> bool:
        return (
            is_junction_vertex(v)
            and self.junction_occ[vertex_cell(v)] >= self.tech.junction_capacity
        )

    def traps_nearest(self, cell) -> list:
        """Every trap ordered by Euclidean distance to ``cell``, ties row-major."""
        order = self._trap_order.get(cell)
        if order is None:
            r, c = cell
            order = sorted(self.fabric.traps, key=lambda t: ((t[0] - r) ** 2 + (t[1] - c) ** 2, t))
            self._trap_order[cell] = order
        return order

    def state(self):
        return (tuple(self.run_occ), tuple(sorted(self.junction_occ.items())))

    # -- reservations ----------------------------------------------------

    def path_resources(self, path) -> list:
        """Channel runs and junction visits a path holds, in traversal order."""
        out = []
        if not path:
            return out
        visited = [path[0][1]] + [dst for _, _, dst in path]
        steps = [None] + list(path)
        last_junction = None
        for vtx, step in zip(visited, steps):
            if step is not None and step[0].run is not None:
                out.append(("run", step[0].run))
            if is_junction_vertex(vtx):
                cell = vertex_cell(vtx)
                if cell != last_junction:
                    out.append(("junction", cell))
                last_junction = cell
            else:
                last_junction = None
        return out

    def reserve_path(self, path) -> Token:
        resources = self.path_resources(path)
        need_runs: dict[int, int] = {}
        need_junc: dict = {}
        for kind, key in resources:
            if kind == "run":
                need_runs[key] = need_runs.get(key, 0) + 1
            else:
                need_junc[key] = need_junc.get(key, 0) + 1
        cap, jcap = self.tech.channel_capacity, self.tech.junction_capacity
        for rid, k in need_runs.items():
            if self.run_occ[rid] + k > cap:
                raise CapacityViolated(f"channel run {rid} is full")
        for cell, k in need_junc.items():
            if self.junction_occ[cell] + k > jcap:
                raise CapacityViolated(f"junction {cell} is full")
        for rid, k in need_runs.items():
            self.run_occ[rid] += k
        for cell, k in need_junc.items():
            self.junction_occ[cell] += k
        tok = Token(next(self._token_ids), resources, [False] * len(resources))
        self._tokens[tok.id] = tok
        return tok

    def release(self, token: Token, resource) -> None:
        if self._tokens.get(token.id) is not token:
            raise UnknownToken(f"token {token.id} is not active")
        hits = [i for i, r in enumerate(token.resources) if r == resource]
        if not hits:
            raise UnknownToken(f"{resource} is not held by token {token.id}")
        for i in hits:
            if not token.released[i]:
                token.released[i] = True
                break
        else:
            raise DoubleRelease(f"{resource} already released from token {token.id}")
        kind, key = resource
        if kind == "run":
            self.run_occ[key] -= 1
        else:
            self.junction_occ[key] -= 1
        if all(token.released):
            del self._tokens[token.id]

    def release_edge(self, token: Token, e: Edge) -> None:
        if e.run is not None:
            self.release(token, ("run", e.run))
        elif e.kind == "turn":
            self.release(token, ("junction", e.junction))
        else:
            raise UnknownToken(f"edge {e.id} holds no capacity")

    def release_all(self, token: Token) -> None:
        for res in token.pending():
            self.release(token, res)

    def active_tokens(self) -> list[Token]:
        return list(self._tokens.values())

    def audit(self) -> list[str]:
        """Cross-check occupancy counters against live reservations."""
        runs = [0] * len(self.runs)
        junc = {cell: 0 for cell in self.junction_occ}
        for tok in self._tokens.values():
            for kind, key in tok.pending():
                if kind == "run":
                    runs[key] += 1
                else:
                    junc[key] += 1
        problems = []
        if runs != self.run_occ:
            problems.append("channel occupancy does not match reservations")
        if junc != self.junction_occ:
            problems.append("junction occupancy does not match reservations")
        if any(n < 0 or n > self.tech.channel_capacity for n in self.run_occ):
            problems.append("channel occupancy out of range")
        if any(n < 0 or n > self.tech.junction_capacity for n in self.junction_occ.values()):
            problems.append("junction occupancy out of range")
        return problems


def edge_weight(e: Edge, n: int, tech: TechParams) -> float:
    """Routing cost of an edge in cell units.

    Channel-type edges cost ``(n + 1) * length`` while fewer than
    ``channel_capacity`` qubits hold them and are impassable once full.
    """
    if e.kind == "turn":
        return tech.turn_weight
    if e.kind == "hop":
        return 0
    if n >= tech.channel_capacity:
        return INF
    return (n + 1) * e.length


def build_routing_graph(f: Fabric, tech: TechParams | None = None) -> RoutingGraph:
    return RoutingGraph(f, tech)


def collapse_turns(g: RoutingGraph):
    """Merge each junction's H/V pair: the turn-blind junction/channel graph.

    Returns ``(vertices, edges)`` with edges as ``(u, v, run_id)`` over
    junction cells and non-junction vertices.
    """

    def merged(v):
        return vertex_cell(v) if is_junction_vertex(v) else v

    verts = {merged(v) for v in g.vertices}
    edges = [(merged(e.u), merged(e.v), e.run) for e in g.edges if e.kind == "channel"]
    return verts, edges
