"""SVG renderings of gate-level and cell-level layouts."""
from __future__ import annotations

from pathlib import Path
from typing import Union
from xml.sax.saxutils import escape

from .layout import Direction, GateLayout
from .techmap import CellKind, CellLayout

TILE = 40
CELL = 10
_SHADES = ("#ffffff", "#e0e0e0", "#c0c0c0", "#a0a0a0", "#808080", "#606060")
_CELL_COLORS = {
    CellKind.NORMAL: "#4caf50",
    CellKind.INPUT: "#2196f3",
    CellKind.OUTPUT: "#ffc107",
    CellKind.CONST0: "#ff9800",
    CellKind.CONST1: "#ff5722",
}


def _shade(zone, phases: int) -> str:
    if zone is None:
        return "#ffffff"
    # spread the available shades over the phases, lightest first
    return _SHADES[min(len(_SHADES) - 1, zone * (len(_SHADES) - 1) // max(1, phases - 1))]


def _port(x: float, y: float, d: Direction) -> tuple[float, float]:
    dx, dy = d.delta
    return x + dx * TILE / 2, y + dy * TILE / 2


def gate_layout_svg(layout: GateLayout) -> str:
    w, h = layout.width * TILE, layout.height * TILE
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f"<title>{escape(layout.name)}</title>",
    ]
    used = layout.occupied_tiles()
    for t in layout.tiles():
        zone = layout.clock(t) if (layout.scheme.regular or t in used) else None
        out.append(
            f'<rect class="tile" x="{t[0] * TILE}" y="{t[1] * TILE}" width="{TILE}" height="{TILE}" '
            f'fill="{_shade(zone, layout.scheme.phases)}" stroke="#999" stroke-width="0.5"/>'
        )
    net = layout.network
    for t in sorted(used, key=lambda t: (t[1], t[0])):
        cx, cy = t[0] * TILE + TILE / 2, t[1] * TILE + TILE / 2
        v = layout.vertex_at[t]
        if v is not None:
            op = net.op(v).value
            text = net.vertices[v].label or op
            out.append(
                f'<g class="gate" data-op="{op}"><circle cx="{cx}" cy="{cy}" r="{TILE * 0.3}" '
                f'fill="#fff" stroke="#000"/><text x="{cx}" y="{cy + 3}" font-size="8" '
                f'text-anchor="middle">{escape(text)}</text></g>'
            )
        for seg in layout.wires_at[t]:
            x1, y1 = _port(cx, cy, seg.entry)
            x2, y2 = _port(cx, cy, seg.exit)
            dash = ' stroke-dasharray="3,2"' if seg.layer else ""
            out.append(
                f'<path class="wire" data-edge="{seg.edge}" d="M{x1},{y1} L{cx},{cy} L{x2},{y2}" '
                f'fill="none" stroke="#000" stroke-width="2"{dash}/>'
            )
        zone = layout.clock(t)
        if zone is not None:
            out.append(
                f'<text class="clock" x="{(t[0] + 1) * TILE - 3}" y="{(t[1] + 1) * TILE - 3}" '
                f'font-size="8" text-anchor="end">{zone}</text>'
            )
        if layout.latch_at[t]:
            out.append(
                f'<rect class="latch" x="{t[0] * TILE + 2}" y="{t[1] * TILE + 2}" width="{TILE - 4}" '
                f'height="{TILE - 4}" fill="none" stroke="#d00" stroke-width="1.5"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cell_layout_svg(cells: CellLayout) -> str:
    w, h = max(1, cells.width) * CELL, max(1, cells.height) * CELL
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f"<title>{escape(cells.name)}</title>",
    ]
    for (x, y, layer), cell in sorted(cells.cell_at.items(), key=lambda kv: (kv[0][2], kv[0][1], kv[0][0])):
        opacity = "1" if layer == 0 else "0.5"
        out.append(
            f'<rect class="cell" data-kind="{cell.kind.value}" data-clock="{cell.clock}" '
            f'data-layer="{layer}" x="{x * CELL + 1}" y="{y * CELL + 1}" width="{CELL - 2}" '
            f'height="{CELL - 2}" fill="{_CELL_COLORS[cell.kind]}" fill-opacity="{opacity}" '
            f'stroke="{_shade(cell.clock, cells.phases)}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(layout: Union[GateLayout, CellLayout], path: Union[str, Path]) -> None:
    text = gate_layout_svg(layout) if isinstance(layout, GateLayout) else cell_layout_svg(layout)
    Path(path).write_text(text, encoding="utf-8")
