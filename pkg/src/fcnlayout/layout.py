"""Gate-level layouts: logic vertices and wire segments assigned to clocked tiles.

The grid topology is implicit (``width`` x ``height`` tiles, 4-neighbourhood);
everything placed on it lives in sparse maps that answer "free" for tiles
nobody has touched.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from .clocking import ClockingScheme
from .network import LogicNetwork, Op, SOURCE_OPS

Tile = tuple[int, int]


class Direction(str, enum.Enum):
    N = "N"
    E = "E"
    S = "S"
    W = "W"

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTA[self]

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]

    @property
    def horizontal(self) -> bool:
        return self in (Direction.E, Direction.W)

    def rotated_cw(self) -> "Direction":
        return _CW[self]

    @staticmethod
    def between(a: Tile, b: Tile) -> "Direction":
        """Side of ``a`` that faces the adjacent tile ``b``."""
        d = (b[0] - a[0], b[1] - a[1])
        for k, v in _DELTA.items():
            if v == d:
                return k
        raise ValueError(f"tiles {a} and {b} are not adjacent")


_DELTA = {Direction.N: (0, -1), Direction.E: (1, 0), Direction.S: (0, 1), Direction.W: (-1, 0)}
_OPPOSITE = {Direction.N: Direction.S, Direction.S: Direction.N, Direction.E: Direction.W, Direction.W: Direction.E}
_CW = {Direction.N: Direction.E, Direction.E: Direction.S, Direction.S: Direction.W, Direction.W: Direction.N}
DIRECTIONS = (Direction.N, Direction.E, Direction.S, Direction.W)


def step(t: Tile, d: Direction) -> Tile:
    dx, dy = d.delta
    return (t[0] + dx, t[1] + dy)


class Layer(enum.IntEnum):
    GROUND = 0
    CROSSING = 1


@dataclass(frozen=True)
class WireSegment:
    """Part of the route of network edge ``edge`` through one tile.

    ``entry`` is the side the signal comes in through, ``exit`` the side it
    leaves through.
    """

    edge: int
    layer: Layer
    entry: Direction
    exit: Direction

    @property
    def straight(self) -> bool:
        return self.entry.opposite is self.exit


class LayoutError(ValueError):
    pass


class DefaultedMap(dict):
    """dict that answers a default for missing keys without storing it."""

    def __init__(self, default: Callable[[], object], *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._default = default

    def __missing__(self, key):
        return self._default()


class GateLayout:
    def __init__(
        self,
        width: int,
        height: int,
        scheme: ClockingScheme,
        network: LogicNetwork,
        *,
        allow_crossings: bool = True,
        name: Optional[str] = None,
    ):
        if width < 0 or height < 0:
            raise LayoutError("negative layout dimensions")
        self.width = width
        self.height = height
        self.scheme = scheme
        self.network = network
        self.allow_crossings = allow_crossings
        self.name = name or network.name
        self.vertex_at: DefaultedMap = DefaultedMap(lambda: None)
        self.tile_of: dict[int, Tile] = {}
        self.wires_at: DefaultedMap = DefaultedMap(tuple)
        self.clock_at: DefaultedMap = DefaultedMap(lambda: None)
        self.latch_at: DefaultedMap = DefaultedMap(int)
        self.pi_tiles: set[Tile] = set()
        self.po_tiles: set[Tile] = set()
        # untiled PI -> whole clock cycles its value is applied after the vector it belongs to
        self.input_delay: dict[int, int] = {}
        self._edge_tiles: dict[int, dict[Tile, WireSegment]] = {}

    def __repr__(self) -> str:
        return (
            f"GateLayout({self.name!r}, {self.width}x{self.height}, {self.scheme.name}, "
            f"{len(self.vertex_at)} gates, {sum(len(w) for w in self.wires_at.values())} wires)"
        )

    # -- geometry -----------------------------------------------------------
    @property
    def area(self) -> int:
        return self.width * self.height

    def in_bounds(self, t: Tile) -> bool:
        return 0 <= t[0] < self.width and 0 <= t[1] < self.height

    def tiles(self) -> Iterator[Tile]:
        for y in range(self.height):
            for x in range(self.width):
                yield (x, y)

    def neighbors(self, t: Tile) -> Iterator[tuple[Direction, Tile]]:
        for d in DIRECTIONS:
            n = step(t, d)
            if self.in_bounds(n):
                yield d, n

    def outward_sides(self, t: Tile) -> list[Direction]:
        """Sides of ``t`` that face the outside of the grid."""
        return [d for d in DIRECTIONS if not self.in_bounds(step(t, d))]

    def is_border_tile(self, t: Tile) -> bool:
        return bool(self.outward_sides(t))

    def _check_bounds(self, t: Tile) -> None:
        if not self.in_bounds(t):
            raise LayoutError(f"tile {t} is out of bounds for a {self.width}x{self.height} layout")

    # -- clocking -----------------------------------------------------------
    def clock(self, t: Tile) -> Optional[int]:
        if self.scheme.regular:
            return self.scheme.clock_number(*t)
        return self.clock_at[t]

    def set_clock(self, t: Tile, zone: int) -> "GateLayout":
        self._check_bounds(t)
        if self.scheme.regular:
            raise LayoutError(f"scheme {self.scheme.name!r} fixes all clock zones")
        if not 0 <= zone < self.scheme.phases:
            raise LayoutError(f"clock zone {zone} outside [0, {self.scheme.phases})")
        self.clock_at[t] = zone
        return self

    def set_latch(self, t: Tile, delay: int) -> "GateLayout":
        self._check_bounds(t)
        if delay < 0:
            raise LayoutError("latch delay must be non-negative")
        if delay:
            self.latch_at[t] = delay
        else:
            self.latch_at.pop(t, None)
        return self

    # -- occupancy ----------------------------------------------------------
    def set_input_delay(self, v: int, cycles: int) -> "GateLayout":
        """Skew an untiled primary input: vector ``i`` reaches it in cycle ``i + cycles``."""
        if self.network.op(v) is not Op.PI or v in self.tile_of:
            raise LayoutError(f"vertex {v} is not an untiled primary input")
        if cycles < 0:
            raise LayoutError("input delay must be non-negative")
        if cycles:
            self.input_delay[v] = cycles
        else:
            self.input_delay.pop(v, None)
        return self

    def is_free_tile(self, t: Tile) -> bool:
        return self.vertex_at[t] is None and not self.wires_at[t]

    def random_tile(self, layer: Layer = Layer.GROUND, rng: Union[random.Random, int, None] = None) -> Tile:
        """Uniformly drawn tile; pass a seeded :class:`random.Random` for a reproducible stream.

        Both layers span the same grid, so ``layer`` only documents intent.
        """
        if self.area == 0:
            raise LayoutError("cannot sample a tile of an empty layout")
        if not isinstance(rng, random.Random):
            rng = random.Random(rng)
        i = rng.randrange(self.area)
        return (i % self.width, i // self.width)

    def assign_logic_vertex(
        self, t: Tile, v: int, is_pi: Optional[bool] = None, is_po: Optional[bool] = None
    ) -> "GateLayout":
        self._check_bounds(t)
        if self.vertex_at[t] is not None or self.wires_at[t]:
            raise LayoutError(f"tile {t} is occupied")
        if v in self.tile_of:
            raise LayoutError(f"vertex {v} is already placed on {self.tile_of[v]}")
        if not 0 <= v < len(self.network.vertices):
            raise LayoutError(f"vertex {v} is not part of network {self.network.name!r}")
        op = self.network.op(v)
        is_pi = op is Op.PI if is_pi is None else is_pi
        is_po = op is Op.PO if is_po is None else is_po
        self.vertex_at[t] = v
        self.tile_of[v] = t
        if is_pi:
            self.pi_tiles.add(t)
        if is_po:
            self.po_tiles.add(t)
        return self

    def assign_wire(
        self,
        t: Tile,
        edge: int,
        layer: Layer,
        entry: Direction,
        exit: Direction,
    ) -> "GateLayout":
        self._check_bounds(t)
        entry, exit, layer = Direction(entry), Direction(exit), Layer(layer)
        if entry is exit:
            raise LayoutError("wire entry and exit must differ")
        if not 0 <= edge < len(self.network.edges):
            raise LayoutError(f"edge {edge} is not part of network {self.network.name!r}")
        if self.vertex_at[t] is not None:
            raise LayoutError(f"tile {t} holds vertex {self.vertex_at[t]}")
        current = self.wires_at[t]
        seg = WireSegment(edge, layer, entry, exit)
        if current:
            if len(current) >= 2:
                raise LayoutError(f"tile {t} already holds two wire segments")
            other = current[0]
            if other.layer is layer:
                raise LayoutError(f"layer {layer.name} of tile {t} is occupied")
            if other.edge == edge:
                raise LayoutError(f"edge {edge} already passes tile {t}")
            if not (seg.straight and other.straight and seg.entry.horizontal != other.entry.horizontal):
                raise LayoutError(f"wire segments on tile {t} do not cross perpendicularly")
            if not self.allow_crossings:
                raise LayoutError("crossings are disabled for this layout")
        self.wires_at[t] = current + (seg,)
        self._edge_tiles.setdefault(edge, {})[t] = seg
        return self

    def remove_wires(self, t: Tile) -> None:
        for seg in self.wires_at.pop(t, ()):
            self._edge_tiles.get(seg.edge, {}).pop(t, None)

    def edge_segments(self, edge: int) -> dict[Tile, WireSegment]:
        return self._edge_tiles.get(edge, {})

    def placed(self, v: int) -> bool:
        return v in self.tile_of

    # -- convenience --------------------------------------------------------
    def occupied_tiles(self) -> set[Tile]:
        return set(self.vertex_at) | {t for t, w in self.wires_at.items() if w}

    def route_edge(self, edge: int, path: list[Tile], layers: Optional[list[Layer]] = None) -> "GateLayout":
        """Lay wire segments for ``edge`` along the intermediate tiles of ``path``.

        ``path`` runs from the source vertex tile to the target vertex tile.
        """
        for i in range(1, len(path) - 1):
            prev, cur, nxt = path[i - 1], path[i], path[i + 1]
            layer = layers[i - 1] if layers else (Layer.CROSSING if self.wires_at[cur] else Layer.GROUND)
            self.assign_wire(cur, edge, layer, Direction.between(cur, prev), Direction.between(cur, nxt))
        return self

    def copy(self) -> "GateLayout":
        return self.resized(self.width, self.height)

    def resized(self, width: int, height: int) -> "GateLayout":
        """Same contents in a grid of another size; contents must still fit."""
        other = GateLayout(
            width, height, self.scheme, self.network, allow_crossings=self.allow_crossings, name=self.name
        )
        for t in self.occupied_tiles() | set(self.clock_at) | set(self.latch_at):
            if not other.in_bounds(t):
                raise LayoutError(f"tile {t} does not fit into {width}x{height}")
        for t, v in self.vertex_at.items():
            other.vertex_at[t] = v
            other.tile_of[v] = t
        for t, segs in self.wires_at.items():
            if segs:
                other.wires_at[t] = tuple(segs)
                for s in segs:
                    other._edge_tiles.setdefault(s.edge, {})[t] = s
        other.clock_at.update(self.clock_at)
        other.latch_at.update(self.latch_at)
        other.pi_tiles = set(self.pi_tiles)
        other.po_tiles = set(self.po_tiles)
        other.input_delay = dict(self.input_delay)
        return other

    def virtual_inputs(self, v: int) -> list[int]:
        """Fan-in vertices of ``v`` that are sources without a tile of their own."""
        net = self.network
        return [u for u in net.vertices[v].fanins if net.op(u) in SOURCE_OPS and u not in self.tile_of]

    def virtual_outputs(self, v: int) -> list[int]:
        net = self.network
        return [w for w in net.readers(v) if net.op(w) is Op.PO and w not in self.tile_of]


def naive_random_placement(
    network: LogicNetwork, scheme: ClockingScheme, seed: int = 0
) -> GateLayout:
    """Place every vertex on a random free tile of an n x n layout; no routing."""
    n = len(network.vertices)
    layout = GateLayout(n, n, scheme, network)
    rng = random.Random(seed)
    for v in range(n):
        while True:
            t = layout.random_tile(Layer.GROUND, rng)
            if layout.is_free_tile(t):
                layout.assign_logic_vertex(t, v)
                break
    return layout
