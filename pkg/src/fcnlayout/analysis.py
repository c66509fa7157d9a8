"""Validity rules, timing, statistics and functional simulation of gate layouts.

Timing model: data sits in a tile during that tile's clock phase and hops to
a neighbour whose zone is one phase later (``1 + delay`` phases later when
leaving a latch tile). A primary input pin in zone ``z`` receives its value
in phase ``z`` of the first clock cycle; inputs that have no tile of their
own sit inside the reading gate's tile and are available in its phase.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .layout import DIRECTIONS, Direction, GateLayout, Layer, Tile, step
from .network import Op, SOURCE_OPS, evaluate_op, simulate


class InvalidLayoutError(ValueError):
    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        head = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"invalid layout: {head}{more}")


@dataclass(frozen=True)
class Violation:
    rule: str
    tile: Optional[Tile]
    message: str

    def __str__(self) -> str:
        where = f" at {self.tile}" if self.tile is not None else ""
        return f"{self.rule}{where}: {self.message}"


class _RouteError(Exception):
    def __init__(self, tile: Optional[Tile], message: str):
        self.tile = tile
        self.message = message


def trace_route(layout: GateLayout, edge: int) -> Optional[list[Tile]]:
    """Tiles from source to target of ``edge``, or None for an edge to/from an untiled I/O."""
    net = layout.network
    e = net.edges[edge]
    segs = layout.edge_segments(edge)
    src_placed, dst_placed = e.source in layout.tile_of, e.target in layout.tile_of
    if not src_placed or not dst_placed:
        virtual_src = not src_placed and net.op(e.source) in SOURCE_OPS
        virtual_dst = not dst_placed and net.op(e.target) is Op.PO
        if (src_placed or virtual_src) and (dst_placed or virtual_dst):
            if segs:
                raise _RouteError(next(iter(segs)), f"edge {edge} to/from an untiled I/O carries wires")
            return None
        missing = e.source if not src_placed and not virtual_src else e.target
        raise _RouteError(None, f"vertex {missing} ({net.op(missing).value}) is not placed")

    start, goal = layout.tile_of[e.source], layout.tile_of[e.target]
    path = [start]
    used: set[Tile] = set()
    cur = start
    if not segs:
        if abs(start[0] - goal[0]) + abs(start[1] - goal[1]) != 1:
            raise _RouteError(start, f"edge {edge} has no wires and its endpoints are not adjacent")
        return [start, goal]
    first = [
        n for d, n in layout.neighbors(start)
        if n in segs and segs[n].entry is d.opposite
    ]
    if len(first) != 1:
        raise _RouteError(start, f"edge {edge} does not leave its source tile through exactly one wire")
    cur = first[0]
    while True:
        if cur in used:
            raise _RouteError(cur, f"edge {edge} revisits a tile")
        used.add(cur)
        path.append(cur)
        nxt = step(cur, segs[cur].exit)
        if nxt == goal:
            path.append(goal)
            break
        if not layout.in_bounds(nxt):
            raise _RouteError(cur, f"edge {edge} leaves the grid")
        if nxt not in segs:
            raise _RouteError(cur, f"edge {edge} is interrupted after this tile")
        if segs[nxt].entry is not Direction.between(nxt, cur):
            raise _RouteError(nxt, f"edge {edge} enters through the wrong side")
        cur = nxt
    if len(used) != len(segs):
        stray = next(t for t in segs if t not in used)
        raise _RouteError(stray, f"edge {edge} has wire segments off its route")
    return path


@dataclass
class _Node:
    tile: Tile
    vertex: Optional[int] = None
    edge: Optional[int] = None
    preds: list = field(default_factory=list)  # node index, or ("virtual", vertex id)
    succs: list = field(default_factory=list)


class LayoutAnalysis:
    """Validates a layout once and keeps the tile-level data-flow graph around."""

    def __init__(self, layout: GateLayout):
        self.layout = layout
        self.violations: list[Violation] = []
        self.routes: dict[int, Optional[list[Tile]]] = {}
        self.in_ports: dict[int, dict[Direction, object]] = {}
        self.out_ports: dict[int, dict[Direction, object]] = {}
        self._check()
        self.nodes: list[_Node] = []
        self.node_of_vertex: dict[int, int] = {}
        self.order: list[int] = []
        if not self.violations:
            self._build_graph()
            self._timing()

    @property
    def valid(self) -> bool:
        return not self.violations

    def require_valid(self) -> None:
        if self.violations:
            raise InvalidLayoutError(self.violations)

    def _flag(self, rule: str, tile: Optional[Tile], message: str) -> None:
        self.violations.append(Violation(rule, tile, message))

    # -- rules ----------------------------------------------------------------
    def _check(self) -> None:
        lay = self.layout
        net = lay.network
        phases = lay.scheme.phases

        for v in net.vertices:
            if v.id not in lay.tile_of and v.op not in SOURCE_OPS and v.op is not Op.PO:
                self._flag("R1", None, f"vertex {v.id} ({v.op.value}) is not placed")
        for t, v in lay.vertex_at.items():
            if not lay.in_bounds(t):
                self._flag("R1", t, "vertex outside the grid")

        expected_pi = {lay.tile_of[v] for v in net.pis() if v in lay.tile_of}
        expected_po = {lay.tile_of[v] for v in net.pos() if v in lay.tile_of}
        for t in lay.pi_tiles ^ expected_pi:
            self._flag("R5", t, "PI marking does not match the hosted vertex")
        for t in lay.po_tiles ^ expected_po:
            self._flag("R5", t, "PO marking does not match the hosted vertex")

        for t, segs in lay.wires_at.items():
            if not segs:
                continue
            if not lay.in_bounds(t):
                self._flag("R1", t, "wire outside the grid")
            if lay.vertex_at[t] is not None:
                self._flag("R3", t, "tile holds a vertex and wire segments")
            if len(segs) > 2:
                self._flag("R4", t, "more than two wire segments")
            elif len(segs) == 2:
                a, b = segs
                if a.layer == b.layer:
                    self._flag("R4", t, "both segments on the same layer")
                if not (a.straight and b.straight and a.entry.horizontal != b.entry.horizontal):
                    self._flag("R4", t, "segments do not cross perpendicularly")
                if not lay.allow_crossings:
                    self._flag("R4", t, "crossing while crossings are disabled")
                if a.edge == b.edge:
                    self._flag("R1", t, f"edge {a.edge} passes the tile twice")
            elif segs[0].layer is Layer.CROSSING:
                self._flag("R4", t, "lone segment on the crossing layer")

        for e in net.edges:
            try:
                self.routes[e.index] = trace_route(lay, e.index)
            except _RouteError as err:
                self._flag("R1", err.tile, err.message)
                self.routes[e.index] = None

        # ports of vertex tiles
        for v, t in lay.tile_of.items():
            ins: dict[Direction, object] = {}
            outs: dict[Direction, object] = {}
            clash = False
            for e in net.in_edges(v):
                route = self.routes.get(e)
                if route is None:
                    continue
                d = Direction.between(t, route[-2])
                clash |= d in ins
                ins[d] = e
            for e in net.out_edges(v):
                route = self.routes.get(e)
                if route is None:
                    continue
                d = Direction.between(t, route[1])
                clash |= d in ins or d in outs
                outs[d] = e
            if clash:
                self._flag("R3", t, f"two connections of vertex {v} share a tile side")
            v_in, v_out = lay.virtual_inputs(v), lay.virtual_outputs(v)
            if v_in or v_out:
                free = [d for d in DIRECTIONS if d not in ins and d not in outs]
                if len(free) < len(v_in) + len(v_out):
                    self._flag("R5", t, f"vertex {v} has untiled I/O but too few free ports")
                else:
                    for d, u in zip(free, v_in):
                        ins[d] = ("virtual", u)
                    for d, w in zip(free[len(v_in):], v_out):
                        outs[d] = ("virtual", w)
            self.in_ports[v] = ins
            self.out_ports[v] = outs

        # clocking
        used = lay.occupied_tiles()
        if not lay.scheme.regular:
            for t in sorted(used):
                if lay.clock_at[t] is None:
                    self._flag("R6", t, "tile has no clock zone")
        for t, delay in lay.latch_at.items():
            if delay <= 0:
                continue
            if lay.vertex_at[t] is not None or len(lay.wires_at[t]) != 1:
                self._flag("R2", t, "latches may only sit on single-wire tiles")
            elif delay >= phases:
                self._flag("R2", t, f"latch delay {delay} must be below {phases}")
        for e, route in self.routes.items():
            if route is None:
                continue
            for a, b in zip(route, route[1:]):
                za, zb = lay.clock(a), lay.clock(b)
                if za is None or zb is None:
                    continue
                want = (za + 1 + lay.latch_at[a]) % phases
                if zb != want:
                    self._flag("R2", b, f"edge {e} hops from zone {za} to {zb}, expected {want}")

    # -- data-flow graph ----------------------------------------------------
    def _build_graph(self) -> None:
        lay, net = self.layout, self.layout.network
        nodes = self.nodes
        for v, t in sorted(lay.tile_of.items()):
            self.node_of_vertex[v] = len(nodes)
            nodes.append(_Node(t, vertex=v))
        tails: dict[int, int] = {}
        for e, route in self.routes.items():
            if route is None:
                continue
            prev = self.node_of_vertex[net.edges[e].source]
            for t in route[1:-1]:
                idx = len(nodes)
                nodes.append(_Node(t, edge=e, preds=[prev]))
                nodes[prev].succs.append(idx)
                prev = idx
            tails[e] = prev
        for v, idx in self.node_of_vertex.items():
            preds = []
            for e in net.in_edges(v):
                if self.routes[e] is None:
                    preds.append(("virtual", net.edges[e].source))
                else:
                    tail = tails[e]
                    preds.append(tail)
                    nodes[tail].succs.append(idx)
            nodes[idx].preds = preds
        indeg = [sum(1 for p in n.preds if isinstance(p, int)) for n in nodes]
        stack = [i for i, d in enumerate(indeg) if d == 0]
        order = []
        while stack:
            i = stack.pop()
            order.append(i)
            for s in nodes[i].succs:
                indeg[s] -= 1
                if indeg[s] == 0:
                    stack.append(s)
        self.order = order

    def zone(self, i: int) -> int:
        return self.layout.clock(self.nodes[i].tile)

    def hop_delay(self, i: int) -> int:
        return 1 + self.layout.latch_at[self.nodes[i].tile]

    def _timing(self) -> None:
        lay, net = self.layout, self.layout.network
        n = lay.scheme.phases
        late: list[Optional[int]] = [None] * len(self.nodes)
        early: list[Optional[int]] = [None] * len(self.nodes)
        tiles_from_pi: list[Optional[int]] = [None] * len(self.nodes)
        for i in self.order:
            node = self.nodes[i]
            arrivals = []
            lengths = []
            if node.vertex is not None and net.op(node.vertex) is Op.PI:
                arrivals.append((self.zone(i), self.zone(i)))
                lengths.append(1)
            for p in node.preds:
                if isinstance(p, tuple):
                    if net.op(p[1]) is Op.PI:
                        t = self.zone(i) + n * lay.input_delay.get(p[1], 0)
                        arrivals.append((t, t))
                        lengths.append(1)
                    continue
                if late[p] is not None:
                    d = self.hop_delay(p)
                    arrivals.append((late[p] + d, early[p] + d))
                if tiles_from_pi[p] is not None:
                    lengths.append(tiles_from_pi[p] + 1)
            if arrivals:
                late[i] = max(a for a, _ in arrivals)
                early[i] = min(b for _, b in arrivals)
            if lengths:
                tiles_from_pi[i] = max(lengths)
        self.late, self.early, self.tiles_from_pi = late, early, tiles_from_pi

    def sink_nodes(self) -> list[int]:
        net = self.layout.network
        sinks = []
        for v, i in self.node_of_vertex.items():
            if net.op(v) is Op.PO or self.layout.virtual_outputs(v):
                sinks.append(i)
        return sinks

    def critical_path(self) -> int:
        self.require_valid()
        lengths = [self.tiles_from_pi[i] for i in self.sink_nodes() if self.tiles_from_pi[i] is not None]
        return max(lengths, default=0)

    def delay_imbalance(self) -> int:
        """Largest spread, in whole clock cycles, of the arrival times converging anywhere."""
        self.require_valid()
        n = self.layout.scheme.phases
        spread = 0
        for i in range(len(self.nodes)):
            if self.late[i] is not None:
                spread = max(spread, self.late[i] - self.early[i])
        return math.ceil(spread / n)

    def throughput(self) -> Fraction:
        return Fraction(1, 1 + self.delay_imbalance())

    # -- tile classification ---------------------------------------------------
    def tile_kind(self, t: Tile) -> str:
        lay = self.layout
        v = lay.vertex_at[t]
        if v is not None:
            op = lay.network.op(v)
            if op is Op.NOT:
                (din,), (dout,) = self.in_ports[v], self.out_ports[v]
                return "inverter_straight" if din.opposite is dout else "inverter_bent"
            return op.value.lower()
        segs = lay.wires_at[t]
        if len(segs) == 2:
            return "crossing"
        if len(segs) == 1:
            return "wire_straight" if segs[0].straight else "wire_bent"
        return "empty"


def check_validity(layout: GateLayout) -> list[Violation]:
    return LayoutAnalysis(layout).violations


def critical_path(layout: GateLayout) -> int:
    return LayoutAnalysis(layout).critical_path()


def throughput(layout: GateLayout) -> Fraction:
    return LayoutAnalysis(layout).throughput()


# -- energy ---------------------------------------------------------------------

class MissingCoefficientError(KeyError):
    pass


def default_energy_table() -> dict[str, tuple[float, float]]:
    text = resources.files("fcnlayout.data").joinpath("qca_energy.json").read_text("utf-8")
    return load_energy_table_text(text)


def load_energy_table_text(text: str) -> dict[str, tuple[float, float]]:
    data = json.loads(text)
    return {k: (float(v["slow"]), float(v["fast"])) for k, v in data["tiles"].items()}


def load_energy_table(path: str | Path) -> dict[str, tuple[float, float]]:
    return load_energy_table_text(Path(path).read_text(encoding="utf-8"))


def tile_kind_counts(layout: GateLayout, analysis: Optional[LayoutAnalysis] = None) -> dict[str, int]:
    analysis = analysis or LayoutAnalysis(layout)
    analysis.require_valid()
    counts: dict[str, int] = {}
    for t in sorted(layout.occupied_tiles()):
        k = analysis.tile_kind(t)
        counts[k] = counts.get(k, 0) + 1
    return counts


def energy_estimate(
    layout: GateLayout,
    coefficients: Optional[Mapping[str, tuple[float, float]]] = None,
    analysis: Optional[LayoutAnalysis] = None,
) -> tuple[float, float]:
    """(slow, fast) energy dissipation in meV summed over all occupied tiles."""
    table = default_energy_table() if coefficients is None else coefficients
    slow = fast = 0.0
    for kind, count in tile_kind_counts(layout, analysis).items():
        if kind not in table:
            raise MissingCoefficientError(f"no energy coefficient for tile kind {kind!r}")
        s, f = table[kind]
        slow += count * s
        fast += count * f
    return round(slow, 6), round(fast, 6)


# -- statistics -----------------------------------------------------------------

@dataclass
class LayoutStats:
    name: str
    width: int
    height: int
    gate_tiles: int
    wire_tiles: int
    crossings: int
    latches: int
    critical_path: int
    throughput: Fraction
    bounding_box: tuple[int, int]
    energy: Optional[tuple[float, float]]

    @property
    def tp_denominator(self) -> int:
        return self.throughput.denominator

    def line(self) -> str:
        return (
            f"{self.name}: {self.width} x {self.height}, #G: {self.gate_tiles}, #W: {self.wire_tiles}, "
            f"#C: {self.crossings}, #L: {self.latches}, CP: {self.critical_path}, TP: 1/{self.tp_denominator}"
        )

    def record(self) -> dict:
        slow, fast = self.energy if self.energy is not None else (None, None)
        return {
            "w": self.width,
            "h": self.height,
            "gates": self.gate_tiles,
            "wires": self.wire_tiles,
            "crossings": self.crossings,
            "latches": self.latches,
            "cp": self.critical_path,
            "tp_denominator": self.tp_denominator,
            "bbox_w": self.bounding_box[0],
            "bbox_h": self.bounding_box[1],
            "energy_slow_mev": slow,
            "energy_fast_mev": fast,
        }


def bounding_box(layout: GateLayout) -> tuple[int, int]:
    used = layout.occupied_tiles()
    if not used:
        return (0, 0)
    xs = [t[0] for t in used]
    ys = [t[1] for t in used]
    return (max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)


def statistics(layout: GateLayout, coefficients=None) -> LayoutStats:
    analysis = LayoutAnalysis(layout)
    analysis.require_valid()
    try:
        energy = energy_estimate(layout, coefficients, analysis)
    except MissingCoefficientError:
        energy = None
    wires = [segs for segs in layout.wires_at.values() if segs]
    return LayoutStats(
        name=layout.name,
        width=layout.width,
        height=layout.height,
        gate_tiles=len(layout.vertex_at),
        wire_tiles=sum(len(s) for s in wires),
        crossings=sum(1 for s in wires if len(s) == 2),
        latches=sum(1 for d in layout.latch_at.values() if d > 0),
        critical_path=analysis.critical_path(),
        throughput=analysis.throughput(),
        bounding_box=bounding_box(layout),
        energy=energy,
    )


# -- simulation -----------------------------------------------------------------

def simulate_layout_vectors(layout: GateLayout, vectors: Sequence[Mapping[str, int]]) -> list[dict[str, int]]:
    """Evaluate the layout tile by tile for many input vectors at once (bit-parallel)."""
    analysis = LayoutAnalysis(layout)
    analysis.require_valid()
    net = layout.network
    mask = (1 << len(vectors)) - 1
    pi_bits: dict[int, int] = {}
    for v in net.pis():
        label = net.vertices[v].label
        word = 0
        for k, vec in enumerate(vectors):
            if label not in vec:
                raise KeyError(f"no value for primary input {label!r}")
            if vec[label]:
                word |= 1 << k
        pi_bits[v] = word

    def source_word(u: int) -> int:
        op = net.op(u)
        if op is Op.PI:
            return pi_bits[u]
        return mask if op is Op.CONST1 else 0

    values: list[int] = [0] * len(analysis.nodes)
    for i in analysis.order:
        node = analysis.nodes[i]
        args = [source_word(p[1]) if isinstance(p, tuple) else values[p] for p in node.preds]
        if node.vertex is None:
            values[i] = args[0]
            continue
        op = net.op(node.vertex)
        if op in SOURCE_OPS:
            values[i] = source_word(node.vertex)
        else:
            values[i] = _word_op(op, args, mask)

    # vertices without a tile of their own: untiled POs read their driver directly
    outputs: dict[str, int] = {}
    for po in net.pos():
        v = net.vertices[po]
        if po in analysis.node_of_vertex:
            outputs[v.label] = values[analysis.node_of_vertex[po]]
        else:
            u = v.fanins[0]
            outputs[v.label] = values[analysis.node_of_vertex[u]] if u in analysis.node_of_vertex else source_word(u)
    return [{k: (w >> j) & 1 for k, w in outputs.items()} for j in range(len(vectors))]


def _word_op(op: Op, args: list[int], mask: int) -> int:
    if op is Op.AND:
        return args[0] & args[1]
    if op is Op.OR:
        return args[0] | args[1]
    if op is Op.XOR:
        return args[0] ^ args[1]
    if op is Op.NAND:
        return ~(args[0] & args[1]) & mask
    if op is Op.NOR:
        return ~(args[0] | args[1]) & mask
    if op is Op.XNOR:
        return ~(args[0] ^ args[1]) & mask
    if op is Op.NOT:
        return ~args[0] & mask
    if op is Op.MAJ:
        a, b, c = args
        return (a & b) | (a & c) | (b & c)
    return args[0]


def simulate_layout(layout: GateLayout, assignment: Mapping[str, int]) -> dict[str, int]:
    return simulate_layout_vectors(layout, [assignment])[0]


def random_vectors(labels: Sequence[str], count: int, seed: int = 0) -> list[dict[str, int]]:
    rng = random.Random(seed)
    return [{label: rng.randint(0, 1) for label in labels} for _ in range(count)]


def exhaustive_vectors(labels: Sequence[str]) -> list[dict[str, int]]:
    n = len(labels)
    return [{label: (i >> (n - 1 - j)) & 1 for j, label in enumerate(labels)} for i in range(2 ** n)]


def equivalent(layout: GateLayout, vectors: Optional[Iterable[Mapping[str, int]]] = None, *, exhaustive_limit: int = 10, samples: int = 64, seed: int = 0) -> bool:
    """Compare the layout against its network, exhaustively for small input counts."""
    net = layout.network
    labels = net.pi_labels()
    if vectors is None:
        vectors = exhaustive_vectors(labels) if len(labels) <= exhaustive_limit else random_vectors(labels, samples, seed)
    vectors = list(vectors)
    got = simulate_layout_vectors(layout, vectors)
    return all(g == simulate(net, vec) for g, vec in zip(got, vectors))


def wave_pipeline_interval(layout: GateLayout, vectors: int = 12, max_cycles: int = 64, seed: int = 0) -> int:
    """Smallest input interval, in clock cycles, at which the clocked tiles still compute correctly.

    Runs a phase-accurate simulation: in phase ``tau`` every tile whose zone is
    ``tau mod N`` recomputes from the values its predecessors currently hold.
    Each value carries the range of input-vector indices it was derived from;
    an output is correct for vector ``i`` once it is seen holding exactly
    ``i`` and the right bit. Independent of the static arrival-time analysis.
    """
    analysis = LayoutAnalysis(layout)
    analysis.require_valid()
    net = layout.network
    n = layout.scheme.phases
    inputs = random_vectors(net.pi_labels(), vectors, seed)
    expected = [simulate(net, vec) for vec in inputs]
    zones = [analysis.zone(i) for i in range(len(analysis.nodes))]
    by_zone: dict[int, list[int]] = {}
    for i in analysis.order:
        by_zone.setdefault(zones[i], []).append(i)

    observed_nodes = {}
    for po in net.pos():
        label = net.vertices[po].label
        if po in analysis.node_of_vertex:
            observed_nodes[analysis.node_of_vertex[po]] = label
        else:
            u = net.vertices[po].fanins[0]
            if u in analysis.node_of_vertex:
                observed_nodes[analysis.node_of_vertex[u]] = label

    def correct_at(k: int) -> bool:
        period = k * n

        def pi_value(u: int, sample_phase: int, zone: int):
            if sample_phase < zone:
                return None
            op = net.op(u)
            if op is Op.CONST0:
                return (0, None)
            if op is Op.CONST1:
                return (1, None)
            idx = (sample_phase - zone) // period
            if idx >= vectors:
                return None
            return (inputs[idx][net.vertices[u].label], (idx, idx))

        held: list = [None] * len(analysis.nodes)
        seen: dict[str, set[int]] = {label: set() for label in observed_nodes.values()}
        horizon = vectors * period + 2 * n * (len(analysis.nodes) + 2)
        for tau in range(horizon):
            z = tau % n
            updates = []
            for i in by_zone.get(z, ()):
                node = analysis.nodes[i]
                if node.vertex is not None and net.op(node.vertex) in SOURCE_OPS:
                    updates.append((i, pi_value(node.vertex, tau, z)))
                    continue
                args = []
                for p in node.preds:
                    if isinstance(p, tuple):
                        args.append(pi_value(p[1], tau, z + n * layout.input_delay.get(p[1], 0)))
                    else:
                        args.append(held[p])
                if any(a is None for a in args):
                    updates.append((i, None))
                    continue
                bits = [a[0] for a in args]
                tags = [a[1] for a in args if a[1] is not None]
                tag = (min(t[0] for t in tags), max(t[1] for t in tags)) if tags else None
                bit = bits[0] if node.vertex is None else evaluate_op(net.op(node.vertex), bits)
                updates.append((i, (bit, tag)))
            for i, val in updates:
                held[i] = val
                label = observed_nodes.get(i)
                if label is not None and val is not None and val[1] is not None:
                    lo, hi = val[1]
                    if lo == hi and val[0] == expected[lo][label]:
                        seen[label].add(lo)
        return all(len(s) == vectors for s in seen.values())

    if not observed_nodes or not net.pis():
        return 1
    for k in range(1, max_cycles + 1):
        if correct_at(k):
            return k
    raise RuntimeError(f"no input interval up to {max_cycles} cycles yields correct outputs")
