"""SVG rendering of a fabric with qubit positions and optional route overlays."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .fabric import CellKind, Fabric
from .trace import Trace

CELL = 10
_FILL = {
    CellKind.JUNCTION: "#d9822b",
    CellKind.CHANNEL: "#b8c4d6",
    CellKind.TRAP: "#3f7f3f",
}
_ROUTE_COLOURS = ("#c0392b", "#2c3e90", "#8e44ad", "#16a085")


def route_polylines(tr: Trace, ins: int) -> dict:
    """Cells each operand of ``ins`` crosses on its way to the gate's trap."""
    start = next((c for c in tr.commands if c.kind == "GATE_START" and c.ins == ins), None)
    if start is None:
        raise KeyError(f"instruction {ins} is not in the trace")
    lines = {}
    for q in start.operands:
        cells = []
        for c in tr.commands:
            if c is start:
                break
            if c.kind == "GATE_START" and q in c.operands:
                cells = []  # an earlier gate: only the final leg matters
            elif c.kind == "MOVE" and c.qubit == q:
                if not cells:
                    cells.append(c.src)
                cells.append(c.dst)
        lines[q] = cells
    return lines


def render_svg(f: Fabric, placement: dict, tr: Trace | None = None, route_ins: int | None = None) -> str:
    w, h = f.cols * CELL, f.rows * CELL
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    for r in range(f.rows):
        for c in range(f.cols):
            fill = _FILL.get(f.kind_at(r, c))
            if fill:
                out.append(
                    f'<rect x="{c * CELL}" y="{r * CELL}" width="{CELL}" height="{CELL}" '
                    f'fill="{fill}" stroke="#ffffff" stroke-width="0.5"/>'
                )
    if tr is not None and route_ins is not None:
        for i, (q, cells) in enumerate(sorted(route_polylines(tr, route_ins).items())):
            if len(cells) < 2:
                continue
            pts = " ".join(f"{c * CELL + CELL / 2:g},{r * CELL + CELL / 2:g}" for r, c in cells)
            colour = _ROUTE_COLOURS[i % len(_ROUTE_COLOURS)]
            out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="2"/>')
    by_cell = {}
    for q in sorted(placement):
        by_cell.setdefault(placement[q], []).append(q)
    for (r, c), qs in sorted(by_cell.items()):
        cx, cy = c * CELL + CELL / 2, r * CELL + CELL / 2
        out.append(f'<circle cx="{cx:g}" cy="{cy:g}" r="{CELL * 0.4:g}" fill="#f1c40f" stroke="#000000"/>')
        out.append(
            f'<text x="{cx:g}" y="{cy - CELL * 0.6:g}" font-size="{CELL:g}" text-anchor="middle" '
            f'font-family="monospace">{escape(",".join(qs))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
