"""Logic networks: the post-synthesis circuit that the layout engines place.

A network is a DAG of :class:`Vertex` objects. Each vertex lists its fan-in
vertex ids in port order; fan-outs are derived. Networks are immutable once
built, so they can be shared freely between layouts and threads.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class Op(str, enum.Enum):
    PI = "PI"
    PO = "PO"
    AND = "AND"
    OR = "OR"
    NOT = "NOT"
    XOR = "XOR"
    NAND = "NAND"
    NOR = "NOR"
    XNOR = "XNOR"
    MAJ = "MAJ"
    FANOUT = "FANOUT"
    CONST0 = "CONST0"
    CONST1 = "CONST1"


ARITY = {
    Op.PI: 0,
    Op.CONST0: 0,
    Op.CONST1: 0,
    Op.PO: 1,
    Op.NOT: 1,
    Op.FANOUT: 1,
    Op.AND: 2,
    Op.OR: 2,
    Op.XOR: 2,
    Op.NAND: 2,
    Op.NOR: 2,
    Op.XNOR: 2,
    Op.MAJ: 3,
}

SOURCE_OPS = frozenset({Op.PI, Op.CONST0, Op.CONST1})


def evaluate_op(op: Op, args: Sequence[int]) -> int:
    """Boolean function of a single vertex applied to its fan-in bits."""
    if op is Op.AND:
        return args[0] & args[1]
    if op is Op.OR:
        return args[0] | args[1]
    if op is Op.XOR:
        return args[0] ^ args[1]
    if op is Op.NAND:
        return 1 - (args[0] & args[1])
    if op is Op.NOR:
        return 1 - (args[0] | args[1])
    if op is Op.XNOR:
        return 1 - (args[0] ^ args[1])
    if op is Op.NOT:
        return 1 - args[0]
    if op is Op.MAJ:
        return 1 if sum(args) >= 2 else 0
    if op in (Op.PO, Op.FANOUT):
        return args[0]
    if op is Op.CONST0:
        return 0
    if op is Op.CONST1:
        return 1
    raise ValueError(f"cannot evaluate {op}")


class NetworkError(ValueError):
    pass


class CombinationalCycleError(NetworkError):
    pass


@dataclass(frozen=True)
class Vertex:
    id: int
    op: Op
    label: str = ""
    fanins: tuple[int, ...] = ()


@dataclass(frozen=True)
class Edge:
    """Connection from ``source`` to input port ``port`` of ``target``."""

    index: int
    source: int
    target: int
    port: int


class LogicNetwork:
    def __init__(self, vertices: Iterable[Vertex], name: str = "net"):
        self.name = name
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        for i, v in enumerate(self.vertices):
            if v.id != i:
                raise NetworkError(f"vertex ids must be dense, got {v.id} at {i}")
            if len(v.fanins) != ARITY[v.op]:
                raise NetworkError(
                    f"vertex {v.id} ({v.op.value}) has {len(v.fanins)} fan-ins, expected {ARITY[v.op]}"
                )
            for u in v.fanins:
                if not 0 <= u < len(self.vertices):
                    raise NetworkError(f"vertex {v.id} reads unknown vertex {u}")
                if self.vertices[u].op is Op.PO:
                    raise NetworkError(f"vertex {v.id} reads primary output {u}")
        edges = []
        fanouts: list[list[int]] = [[] for _ in self.vertices]
        fanin_edges: list[list[int]] = [[] for _ in self.vertices]
        for v in self.vertices:
            for port, u in enumerate(v.fanins):
                e = Edge(len(edges), u, v.id, port)
                edges.append(e)
                fanouts[u].append(e.index)
                fanin_edges[v.id].append(e.index)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self._out_edges = tuple(tuple(f) for f in fanouts)
        self._in_edges = tuple(tuple(f) for f in fanin_edges)
        self._topo = self._topological_order()

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"LogicNetwork({self.name!r}, {len(self.vertices)} vertices, {len(self.edges)} edges)"

    def _topological_order(self) -> tuple[int, ...]:
        indeg = [len(v.fanins) for v in self.vertices]
        queue = deque(v.id for v in self.vertices if indeg[v.id] == 0)
        order = []
        while queue:
            u = queue.popleft()
            order.append(u)
            for e in self._out_edges[u]:
                t = self.edges[e].target
                indeg[t] -= 1
                if indeg[t] == 0:
                    queue.append(t)
        if len(order) != len(self.vertices):
            stuck = sorted(v for v in range(len(self.vertices)) if indeg[v] > 0)
            raise CombinationalCycleError(f"combinational cycle through vertices {stuck}")
        return tuple(order)

    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def in_edges(self, v: int) -> tuple[int, ...]:
        return self._in_edges[v]

    def out_edges(self, v: int) -> tuple[int, ...]:
        return self._out_edges[v]

    def readers(self, v: int) -> list[int]:
        return [self.edges[e].target for e in self._out_edges[v]]

    def pis(self) -> list[int]:
        return [v.id for v in self.vertices if v.op is Op.PI]

    def pos(self) -> list[int]:
        return [v.id for v in self.vertices if v.op is Op.PO]

    def pi_labels(self) -> list[str]:
        return [self.vertices[v].label for v in self.pis()]

    def po_labels(self) -> list[str]:
        return [self.vertices[v].label for v in self.pos()]

    def op(self, v: int) -> Op:
        return self.vertices[v].op

    def is_fanout_substituted(self, max_fanout: int = 2) -> bool:
        for v in self.vertices:
            limit = max_fanout if v.op is Op.FANOUT else 1
            if len(self._out_edges[v.id]) > limit:
                return False
        return True

    def max_degree(self) -> tuple[int, int]:
        """Largest (in-degree, out-degree) over all vertices."""
        if not self.vertices:
            return 0, 0
        return (
            max(len(v.fanins) for v in self.vertices),
            max(len(o) for o in self._out_edges),
        )


class NetworkBuilder:
    """Incremental construction helper; ids are handed out in call order."""

    def __init__(self, name: str = "net"):
        self.name = name
        self._vertices: list[Vertex] = []

    def add(self, op: Op, *fanins: int, label: str = "") -> int:
        vid = len(self._vertices)
        self._vertices.append(Vertex(vid, Op(op), label, tuple(fanins)))
        return vid

    def pi(self, label: str) -> int:
        return self.add(Op.PI, label=label)

    def po(self, source: int, label: str) -> int:
        return self.add(Op.PO, source, label=label)

    def build(self) -> LogicNetwork:
        return LogicNetwork(self._vertices, self.name)


def substitute_fanouts(net: LogicNetwork, max_fanout: int = 2) -> LogicNetwork:
    """Route every multi-reader signal through a left-deep chain of FANOUT vertices.

    Existing ids are kept; new FANOUT vertices are appended in the order the
    signals are visited. A network that already satisfies the degree bound is
    returned unchanged.
    """
    if max_fanout < 2:
        raise ValueError("max_fanout must be at least 2")
    if net.is_fanout_substituted(max_fanout):
        return net

    vertices = [list((v.id, v.op, v.label, list(v.fanins))) for v in net.vertices]

    def new_fanout(source: int) -> int:
        vid = len(vertices)
        vertices.append([vid, Op.FANOUT, "", [source]])
        return vid

    for v in net.vertices:
        out = net.out_edges(v.id)
        limit = max_fanout if v.op is Op.FANOUT else 1
        if len(out) <= limit:
            continue
        targets = [(net.edges[e].target, net.edges[e].port) for e in out]
        # a FANOUT keeps its own capacity, everyone else feeds a fresh chain head
        if v.op is Op.FANOUT:
            head, capacity = v.id, max_fanout
        else:
            head = new_fanout(v.id)
            capacity = max_fanout
        remaining = list(targets)
        node = head
        while True:
            if len(remaining) <= capacity:
                for t, port in remaining:
                    vertices[t][3][port] = node
                break
            for t, port in remaining[: capacity - 1]:
                vertices[t][3][port] = node
            remaining = remaining[capacity - 1 :]
            node = new_fanout(node)

    return LogicNetwork(
        (Vertex(vid, op, label, tuple(fi)) for vid, op, label, fi in vertices), net.name
    )


def simulate(net: LogicNetwork, assignment: Mapping[str, int]) -> dict[str, int]:
    """Evaluate all primary outputs for one input assignment keyed by PI label."""
    values: dict[int, int] = {}
    for vid in net.topological_order():
        v = net.vertices[vid]
        if v.op is Op.PI:
            if v.label not in assignment:
                raise KeyError(f"no value for primary input {v.label!r}")
            values[vid] = 1 if assignment[v.label] else 0
        else:
            values[vid] = evaluate_op(v.op, [values[u] for u in v.fanins])
    return {net.vertices[p].label: values[p] for p in net.pos()}


def truth_table(net: LogicNetwork) -> list[tuple[int, ...]]:
    """Exhaustive output table, rows ordered by the binary count over PIs."""
    labels = net.pi_labels()
    outs = net.po_labels()
    rows = []
    for bits in itertools.product((0, 1), repeat=len(labels)):
        res = simulate(net, dict(zip(labels, bits)))
        rows.append(tuple(res[o] for o in outs))
    return rows


def network_stats(net: LogicNetwork) -> dict[str, int]:
    return {
        "vertex_count": len(net.vertices),
        "edge_count": len(net.edges),
        "pi_count": len(net.pis()),
        "po_count": len(net.pos()),
        "fanout_count": sum(1 for v in net.vertices if v.op is Op.FANOUT),
    }


def is_isomorphic(a: LogicNetwork, b: LogicNetwork) -> bool:
    """Structural equality up to vertex ids, anchored at labelled PIs/POs."""
    if network_stats(a) != network_stats(b):
        return False
    if a.pi_labels() != b.pi_labels() or a.po_labels() != b.po_labels():
        return False

    memo: dict[tuple[int, int], bool] = {}
    pairing: dict[int, int] = {}

    def same(u: int, w: int) -> bool:
        key = (u, w)
        if key in memo:
            return memo[key]
        vu, vw = a.vertices[u], b.vertices[w]
        ok = vu.op is vw.op and len(vu.fanins) == len(vw.fanins)
        if ok and vu.op is Op.PI:
            ok = vu.label == vw.label
        if ok:
            ok = all(same(x, y) for x, y in zip(vu.fanins, vw.fanins))
        memo[key] = ok
        return ok

    for pa, pb in zip(a.pos(), b.pos()):
        if not same(pa, pb):
            return False
    for (u, w), ok in memo.items():
        if ok:
            if pairing.setdefault(u, w) != w:
                return False
    return len(set(pairing.values())) == len(pairing)
