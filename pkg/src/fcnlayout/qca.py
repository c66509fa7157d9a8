"""QCADesigner 2.x design files (text format) for cell layouts."""
from __future__ import annotations

from pathlib import Path
from typing import Union

from .techmap import Cell, CellKind, CellLayout

VERSION = "2.000000"
PITCH = 20.0
CELL_SIZE = 18.0
DOT_DIAMETER = 5.0
DOT_OFFSET = 4.5
DOT_CHARGE = 8.010883e-20

_FUNCTION = {
    CellKind.NORMAL: "QCAD_CELL_NORMAL",
    CellKind.INPUT: "QCAD_CELL_INPUT",
    CellKind.OUTPUT: "QCAD_CELL_OUTPUT",
    CellKind.CONST0: "QCAD_CELL_FIXED",
    CellKind.CONST1: "QCAD_CELL_FIXED",
}
_COLOR = {
    CellKind.NORMAL: (0, 65535, 0),
    CellKind.INPUT: (0, 0, 65535),
    CellKind.OUTPUT: (65535, 65535, 0),
    CellKind.CONST0: (65535, 32768, 0),
    CellKind.CONST1: (65535, 32768, 0),
}
# dot order: top-right, bottom-right, bottom-left, top-left
_DOTS = ((1, -1), (1, 1), (-1, 1), (-1, -1))


class QcaFormatError(ValueError):
    pass


def _center(x: int, y: int) -> tuple[float, float]:
    return x * PITCH + PITCH / 2, y * PITCH + PITCH / 2


def _dot_charges(cell: Cell) -> list[float]:
    half = DOT_CHARGE / 2
    if cell.kind is CellKind.CONST1:
        return [DOT_CHARGE, 0.0, DOT_CHARGE, 0.0]
    if cell.kind is CellKind.CONST0:
        return [0.0, DOT_CHARGE, 0.0, DOT_CHARGE]
    return [half] * 4


def _design_object(lines: list[str], x: float, y: float, w: float, h: float, color) -> None:
    lines += [
        "[TYPE:QCADDesignObject]",
        f"x={x:.6f}",
        f"y={y:.6f}",
        "bSelected=FALSE",
        f"clr.red={color[0]}",
        f"clr.green={color[1]}",
        f"clr.blue={color[2]}",
        f"bounding_box.xWorld={x - w / 2:.6f}",
        f"bounding_box.yWorld={y - h / 2:.6f}",
        f"bounding_box.cxWorld={w:.6f}",
        f"bounding_box.cyWorld={h:.6f}",
        "[#TYPE:QCADDesignObject]",
    ]


def _cell_lines(x: int, y: int, cell: Cell) -> list[str]:
    cx, cy = _center(x, y)
    lines = ["[TYPE:QCADCell]"]
    _design_object(lines, cx, cy, CELL_SIZE, CELL_SIZE, _COLOR[cell.kind])
    lines += [
        f"cell_options.cxCell={CELL_SIZE:.6f}",
        f"cell_options.cyCell={CELL_SIZE:.6f}",
        f"cell_options.dot_diameter={DOT_DIAMETER:.6f}",
        f"cell_options.clock={cell.clock}",
        "cell_options.mode=QCAD_CELL_MODE_NORMAL",
        f"cell_function={_FUNCTION[cell.kind]}",
        "number_of_dots=4",
    ]
    for (dx, dy), q in zip(_DOTS, _dot_charges(cell)):
        lines += [
            "[TYPE:CELL_DOT]",
            f"x={cx + dx * DOT_OFFSET:.6f}",
            f"y={cy + dy * DOT_OFFSET:.6f}",
            f"diameter={DOT_DIAMETER:.6f}",
            f"charge={q:e}",
            "spin=0.000000",
            "potential=0.000000",
            "[#TYPE:CELL_DOT]",
        ]
    if cell.label is not None:
        lines += ["[TYPE:QCADLabel]", "[TYPE:QCADStretchyObject]"]
        _design_object(lines, cx, cy - PITCH, 8.0 * max(1, len(cell.label)), 16.0, (0, 0, 65535))
        lines += ["[#TYPE:QCADStretchyObject]", f"psz={cell.label}", "[#TYPE:QCADLabel]"]
    lines.append("[#TYPE:QCADCell]")
    return lines


def qca_text(cells: CellLayout) -> str:
    if not cells.cell_at:
        raise QcaFormatError("refusing to write an empty cell layout")
    lines = [
        "[VERSION]",
        f"qcadesigner_version={VERSION}",
        "[#VERSION]",
        "[TYPE:DESIGN]",
        "[TYPE:QCADLayer]",
        "type=0",
        "status=1",
        "pszDescription=Substrate",
        "[#TYPE:QCADLayer]",
    ]
    for layer in sorted(cells.layers()):
        lines += [
            "[TYPE:QCADLayer]",
            "type=1",
            "status=0",
            f"pszDescription={'Main Cell Layer' if layer == 0 else f'Crossover Layer {layer}'}",
        ]
        for (x, y, lz), cell in sorted(cells.cell_at.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            if lz == layer:
                lines += _cell_lines(x, y, cell)
        lines.append("[#TYPE:QCADLayer]")
    lines.append("[#TYPE:DESIGN]")
    return "\n".join(lines) + "\n"


def write_qca(cells: CellLayout, path: Union[str, Path]) -> None:
    Path(path).write_text(qca_text(cells), encoding="utf-8")


def parse_qca(text: str, name: str = "cells") -> CellLayout:
    """Read back cells, kinds, clocks and labels from a QCADesigner design file."""
    stack: list[str] = []
    layer_index = -1
    cells: dict[tuple[int, int, int], Cell] = {}
    current: dict = {}
    phases = 4
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[#"):
            tag = line[2:-1]
            if not stack or stack[-1] != tag:
                raise QcaFormatError(f"line {lineno}: unbalanced closing tag {line}")
            stack.pop()
            if tag == "TYPE:QCADCell":
                cells[_cell_from(current, layer_index, lineno)] = _make_cell(current)
                current = {}
            continue
        if line.startswith("["):
            tag = line[1:-1]
            stack.append(tag)
            if tag == "TYPE:QCADCell":
                current = {"charges": []}
            continue
        key, _, value = line.partition("=")
        top = stack[-1] if stack else ""
        if top == "TYPE:QCADLayer" and key == "type":
            if value == "1":
                layer_index += 1
        elif "TYPE:QCADCell" in stack:
            if top == "TYPE:QCADDesignObject" and "TYPE:QCADLabel" not in stack and key in ("x", "y"):
                current[key] = float(value)
            elif top == "TYPE:QCADCell":
                current[key] = value
            elif top == "TYPE:CELL_DOT" and key == "charge":
                current["charges"].append(float(value))
            elif top == "TYPE:QCADLabel" and key == "psz":
                current["label"] = value
    if stack:
        raise QcaFormatError(f"unterminated block {stack[-1]}")
    if not cells:
        return CellLayout(0, 0, phases, name)
    width = max(k[0] for k in cells) + 1
    height = max(k[1] for k in cells) + 1
    return CellLayout(width, height, phases, name, cells)


def _cell_from(cur: dict, layer: int, lineno: int) -> tuple[int, int, int]:
    try:
        x = round((cur["x"] - PITCH / 2) / PITCH)
        y = round((cur["y"] - PITCH / 2) / PITCH)
    except KeyError:
        raise QcaFormatError(f"line {lineno}: cell without coordinates") from None
    return x, y, max(layer, 0)


def _make_cell(cur: dict) -> Cell:
    func = cur.get("cell_function", "QCAD_CELL_NORMAL")
    if func == "QCAD_CELL_FIXED":
        q = cur["charges"]
        pol = (q[0] + q[2]) - (q[1] + q[3])
        kind = CellKind.CONST1 if pol > 0 else CellKind.CONST0
    else:
        kind = {v: k for k, v in _FUNCTION.items() if k not in (CellKind.CONST0, CellKind.CONST1)}[func]
    return Cell(kind, int(cur.get("cell_options.clock", 0)), cur.get("label"))


def read_qca(path: Union[str, Path]) -> CellLayout:
    p = Path(path)
    return parse_qca(p.read_text(encoding="utf-8"), p.stem)
