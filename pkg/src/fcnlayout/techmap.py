"""Gate libraries and the tile-to-cell technology mapping."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .analysis import LayoutAnalysis
from .layout import DIRECTIONS, Direction, GateLayout, Layer
from .network import Op


class LibraryError(ValueError):
    pass


class UncoveredConfigurationError(LibraryError):
    def __init__(self, tile, config):
        self.tile = tile
        self.config = config
        kind, ins, outs = config
        super().__init__(
            f"uncovered configuration at tile {tile}: {kind} in={''.join(sorted(ins)) or '-'} "
            f"out={''.join(sorted(outs)) or '-'}"
        )


class CellKind(str, enum.Enum):
    NORMAL = "NORMAL"
    INPUT = "INPUT"
    OUTPUT = "OUTPUT"
    CONST0 = "CONST0"
    CONST1 = "CONST1"


@dataclass(frozen=True)
class Cell:
    kind: CellKind
    clock: int
    label: Optional[str] = None


Config = tuple[str, frozenset, frozenset]
Matrix = tuple[tuple[Optional[CellKind], ...], ...]


def _midpoints(rows: int, cols: int) -> dict[Direction, tuple[int, int]]:
    return {
        Direction.N: (0, cols // 2),
        Direction.E: (rows // 2, cols - 1),
        Direction.S: (rows - 1, cols // 2),
        Direction.W: (rows // 2, 0),
    }


def _rotate(m: Matrix) -> Matrix:
    """Quarter turn clockwise."""
    rows, cols = len(m), len(m[0])
    return tuple(tuple(m[rows - 1 - c][r] for c in range(rows)) for r in range(cols))


@dataclass
class BlockSpec:
    """A block as written in a library file, before rotations are expanded."""

    name: str
    kind: str
    ins: tuple[Direction, ...]
    outs: tuple[Direction, ...]
    layers: tuple[Matrix, ...]
    rotatable: bool = False
    reversible: bool = False


@dataclass
class GateLibrary:
    name: str
    block_size: tuple[int, int]
    alphabet: dict[str, CellKind | None]
    specs: list[BlockSpec]
    crossing_mode: str = "layer"
    blocks: dict[Config, tuple[Matrix, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.blocks:
            self._expand()

    def _expand(self) -> None:
        rows, cols = self.block_size
        for spec in self.specs:
            layers = spec.layers
            ins, outs = spec.ins, spec.outs
            for _ in range(4 if spec.rotatable else 1):
                self._add(spec, ins, outs, layers)
                if spec.reversible:
                    self._add(spec, outs, ins, layers)
                if rows != cols:
                    break
                layers = tuple(_rotate(m) for m in layers)
                ins = tuple(d.rotated_cw() for d in ins)
                outs = tuple(d.rotated_cw() for d in outs)
            if spec.kind == "crossing":
                # the cells do not depend on which way each signal runs
                h = [d for d in spec.ins + spec.outs if d.horizontal]
                v = [d for d in spec.ins + spec.outs if not d.horizontal]
                for hi in h:
                    for vi in v:
                        self._add(spec, (hi, vi), (hi.opposite, vi.opposite), spec.layers)

    def _add(self, spec: BlockSpec, ins, outs, layers) -> None:
        key = (spec.kind, frozenset(d.value for d in ins), frozenset(d.value for d in outs))
        self.blocks.setdefault(key, layers)

    def block(self, kind: str, ins=(), outs=()) -> tuple[Matrix, ...]:
        key = (kind, frozenset(Direction(d).value for d in ins), frozenset(Direction(d).value for d in outs))
        if key not in self.blocks:
            raise UncoveredConfigurationError(None, key)
        return self.blocks[key]

    def covers(self, config: Config) -> bool:
        return config in self.blocks


def _parse_matrix(rows: list[str], alphabet: dict[str, CellKind | None], size, where: str) -> Matrix:
    r, c = size
    if len(rows) != r or any(len(row) != c for row in rows):
        raise LibraryError(f"block size mismatch in {where}: expected {r}x{c}")
    try:
        return tuple(tuple(alphabet[ch] for ch in row) for row in rows)
    except KeyError as err:
        raise LibraryError(f"unknown cell character {err.args[0]!r} in {where}") from None


def _check_ports(spec: BlockSpec, size) -> None:
    mids = _midpoints(*size)
    ports = set(spec.ins) | set(spec.outs)
    for d, (r, c) in mids.items():
        occupied = any(m[r][c] is not None for m in spec.layers)
        if d in ports and not occupied:
            raise LibraryError(f"misplaced port in block {spec.name!r}: no cell at the {d.value} midpoint")
        if d not in ports and occupied:
            raise LibraryError(f"misplaced port in block {spec.name!r}: stray cell at the {d.value} midpoint")


def library_from_dict(data: dict) -> GateLibrary:
    try:
        size = tuple(int(x) for x in data["block_size"])
        alphabet = {k: (None if v == "EMPTY" else CellKind(v)) for k, v in data["alphabet"].items()}
        specs = []
        for b in data["blocks"]:
            layer_rows = b["layers"] if "layers" in b else [b["rows"]]
            layers = tuple(_parse_matrix(rows, alphabet, size, b["name"]) for rows in layer_rows)
            spec = BlockSpec(
                name=b["name"],
                kind=b["kind"],
                ins=tuple(Direction(d) for d in b.get("in", [])),
                outs=tuple(Direction(d) for d in b.get("out", [])),
                layers=layers,
                rotatable=bool(b.get("rotatable", False)),
                reversible=bool(b.get("reversible", False)),
            )
            _check_ports(spec, size)
            specs.append(spec)
        return GateLibrary(
            name=data["name"],
            block_size=size,
            alphabet=alphabet,
            specs=specs,
            crossing_mode=data.get("crossing_mode", "layer"),
        )
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, LibraryError):
            raise
        raise LibraryError(f"malformed library data: {err}") from None


BUILTIN = {"qca-one": "qca_one.json", "qcaone": "qca_one.json"}


def load_library(name_or_path: Union[str, Path] = "qca-one") -> GateLibrary:
    key = str(name_or_path).strip().lower()
    if key in BUILTIN:
        text = resources.files("fcnlayout.data").joinpath(BUILTIN[key]).read_text("utf-8")
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise LibraryError(f"unknown gate library {name_or_path!r}")
        text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise LibraryError(f"malformed library data: {err}") from None
    return library_from_dict(data)


def library_to_dict(lib: GateLibrary) -> dict:
    chars = {kind: ch for ch, kind in lib.alphabet.items()}

    def rows(m: Matrix) -> list[str]:
        return ["".join(chars[k] for k in row) for row in m]

    blocks = []
    for s in lib.specs:
        entry = {"name": s.name, "kind": s.kind, "in": [d.value for d in s.ins], "out": [d.value for d in s.outs]}
        if len(s.layers) == 1:
            entry["rows"] = rows(s.layers[0])
        else:
            entry["layers"] = [rows(m) for m in s.layers]
        if s.rotatable:
            entry["rotatable"] = True
        if s.reversible:
            entry["reversible"] = True
        blocks.append(entry)
    return {
        "format": 1,
        "name": lib.name,
        "block_size": list(lib.block_size),
        "alphabet": {ch: (k.value if k is not None else "EMPTY") for ch, k in lib.alphabet.items()},
        "crossing_mode": lib.crossing_mode,
        "blocks": blocks,
    }


def write_library(lib: GateLibrary, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(library_to_dict(lib), indent=2) + "\n", encoding="utf-8")


# -- cell layouts -----------------------------------------------------------------

@dataclass
class CellLayout:
    width: int
    height: int
    phases: int
    name: str = "cells"
    cell_at: dict[tuple[int, int, int], Cell] = field(default_factory=dict)
    block_size: tuple[int, int] = (5, 5)

    def count(self, kind: CellKind) -> int:
        return sum(1 for c in self.cell_at.values() if c.kind is kind)

    def layers(self) -> set[int]:
        return {k[2] for k in self.cell_at}

    def __len__(self) -> int:
        return len(self.cell_at)


def tile_config(layout: GateLayout, analysis: LayoutAnalysis, t) -> Config:
    v = layout.vertex_at[t]
    if v is not None:
        ins = frozenset(d.value for d in analysis.in_ports[v])
        outs = frozenset(d.value for d in analysis.out_ports[v])
        return layout.network.op(v).value.lower(), ins, outs
    segs = layout.wires_at[t]
    if not segs:
        return "empty", frozenset(), frozenset()
    kind = "crossing" if len(segs) == 2 else "wire"
    return (
        kind,
        frozenset(s.entry.value for s in segs),
        frozenset(s.exit.value for s in segs),
    )


def apply_library(layout: GateLayout, lib: Optional[GateLibrary] = None) -> CellLayout:
    """Replace every tile by its library block; cells inherit the tile's clock zone."""
    lib = lib or load_library("qca-one")
    analysis = LayoutAnalysis(layout)
    analysis.require_valid()
    rows, cols = lib.block_size
    cells = CellLayout(layout.width * cols, layout.height * rows, layout.scheme.phases, layout.name,
                       block_size=lib.block_size)
    net = layout.network
    mids = _midpoints(rows, cols)
    for t in sorted(layout.occupied_tiles(), key=lambda t: (t[1], t[0])):
        config = tile_config(layout, analysis, t)
        if not lib.covers(config):
            raise UncoveredConfigurationError(t, config)
        clock = layout.clock(t)
        v = layout.vertex_at[t]
        label = net.vertices[v].label or None if v is not None and net.op(v) in (Op.PI, Op.PO) else None
        ox, oy = t[0] * cols, t[1] * rows
        for layer, m in enumerate(lib.blocks[config]):
            for r in range(rows):
                for c in range(cols):
                    kind = m[r][c]
                    if kind is None:
                        continue
                    cell_label = label if kind in (CellKind.INPUT, CellKind.OUTPUT) else None
                    cells.cell_at[ox + c, oy + r, layer] = Cell(kind, clock, cell_label)
        if v is not None:
            # ports of untiled primary inputs/outputs become pin cells in place
            for side, src in analysis.in_ports[v].items():
                if isinstance(src, tuple):
                    _mark_pin(cells, ox, oy, mids[side], net.vertices[src[1]], clock, CellKind.INPUT)
            for side, dst in analysis.out_ports[v].items():
                if isinstance(dst, tuple):
                    _mark_pin(cells, ox, oy, mids[side], net.vertices[dst[1]], clock, CellKind.OUTPUT)
    return cells


def _mark_pin(cells: CellLayout, ox: int, oy: int, mid, vertex, clock: int, kind: CellKind) -> None:
    r, c = mid
    if vertex.op is Op.CONST0:
        kind, label = CellKind.CONST0, None
    elif vertex.op is Op.CONST1:
        kind, label = CellKind.CONST1, None
    else:
        label = vertex.label or None
    cells.cell_at[ox + c, oy + r, int(Layer.GROUND)] = Cell(kind, clock, label)
