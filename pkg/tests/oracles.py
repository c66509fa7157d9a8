"""Independent reference implementations used only by the tests.

Nothing here imports the placement, routing or analysis code of the package;
only the network container is shared so that inputs can be built once.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from fcnlayout.network import LogicNetwork, Op

# ---------------------------------------------------------------- brute force


@dataclass(frozen=True)
class BruteResult:
    area: int | None
    width: int | None = None
    height: int | None = None


def _monotone_paths(a, b):
    """All east/south lattice paths from a to b as full tile sequences."""
    (ax, ay), (bx, by) = a, b
    dx, dy = bx - ax, by - ay
    if dx < 0 or dy < 0 or dx + dy == 0:
        return []
    out = []
    for east_steps in itertools.combinations(range(dx + dy), dx):
        x, y, path = ax, ay, [(ax, ay)]
        es = set(east_steps)
        for i in range(dx + dy):
            if i in es:
                x += 1
            else:
                y += 1
            path.append((x, y))
        out.append(path)
    return out


def _routable(edges, place, virtual) -> bool:
    """Backtracking over one path per edge.

    Wires may not touch vertex tiles or each other, every tile boundary
    carries at most one connection, and each vertex keeps enough unused
    sides for its untiled I/O.
    """
    blocked = set(place.values())
    options = []
    for s, d in edges:
        paths = [p for p in _monotone_paths(place[s], place[d]) if not blocked.intersection(p[1:-1])]
        if not paths:
            return False
        options.append(paths)
    order = sorted(range(len(options)), key=lambda i: len(options[i]))
    inner: set = set()
    sides: set = set()
    side_count = {v: 0 for v in place}
    at = {t: v for v, t in place.items()}

    def go(k: int) -> bool:
        if k == len(order):
            return True
        for p in options[order[k]]:
            mids = p[1:-1]
            bounds = {frozenset(ab) for ab in zip(p, p[1:])}
            if not inner.isdisjoint(mids) or not sides.isdisjoint(bounds):
                continue
            ends = (at[p[0]], at[p[-1]])
            if any(side_count[v] + 1 + virtual[v] > 4 for v in ends):
                continue
            inner.update(mids)
            sides.update(bounds)
            for v in ends:
                side_count[v] += 1
            if go(k + 1):
                return True
            inner.difference_update(mids)
            sides.difference_update(bounds)
            for v in ends:
                side_count[v] -= 1
        return False

    return go(0)


def brute_force_min_area(net: LogicNetwork, max_area: int = 12, *, with_io: bool = False) -> BruteResult:
    """Smallest 2DDWave grid for ``net`` without crossings, by exhaustive search.

    Under 2DDWave a hop is legal iff it goes east or south, so the candidate
    routes are exactly the monotone lattice paths and no clock bookkeeping is
    needed. Without ``with_io`` PIs and POs take no tile; each one claims a
    spare side of the vertex it connects to.
    """
    io = {Op.PI, Op.PO, Op.CONST0, Op.CONST1}
    verts = [v.id for v in net.vertices if with_io or v.op not in io]
    placed = set(verts)
    edges = [(u, v.id) for v in net.vertices for u in v.fanins if u in placed and v.id in placed]
    virtual = {v: 0 for v in verts}
    for v in net.vertices:
        for u in v.fanins:
            if (u in placed) != (v.id in placed):
                virtual[u if u in placed else v.id] += 1
    if any(k > 4 for k in virtual.values()):
        return BruteResult(None)
    if not verts:
        return BruteResult(1, 1, 1)
    for area in range(len(verts), max_area + 1):
        for w in range(1, area + 1):
            if area % w:
                continue
            h = area // w
            tiles = [(x, y) for y in range(h) for x in range(w)]
            for combo in itertools.permutations(tiles, len(verts)):
                place = dict(zip(verts, combo))
                if any(place[d][0] < place[s][0] or place[d][1] < place[s][1] for s, d in edges):
                    continue
                if _routable(edges, place, virtual):
                    return BruteResult(area, w, h)
    return BruteResult(None)


# ---------------------------------------------------------------- wave pipelining

_EVAL = {
    Op.PO: lambda a: a[0],
    Op.NOT: lambda a: 1 - a[0],
    Op.FANOUT: lambda a: a[0],
    Op.AND: lambda a: a[0] & a[1],
    Op.OR: lambda a: a[0] | a[1],
    Op.XOR: lambda a: a[0] ^ a[1],
    Op.NAND: lambda a: 1 - (a[0] & a[1]),
    Op.NOR: lambda a: 1 - (a[0] | a[1]),
    Op.XNOR: lambda a: 1 - (a[0] ^ a[1]),
    Op.MAJ: lambda a: int(a[0] + a[1] + a[2] >= 2),
}
_DELTA = {"N": (0, -1), "E": (1, 0), "S": (0, 1), "W": (-1, 0)}


def _side(t, d):
    dx, dy = _DELTA[d.value if hasattr(d, "value") else d]
    return (t[0] + dx, t[1] + dy)


def _reference_eval(net: LogicNetwork, vec: dict) -> dict:
    val: dict[int, int] = {}

    def get(v: int) -> int:
        if v not in val:
            x = net.vertices[v]
            if x.op is Op.PI:
                val[v] = vec[x.label]
            elif x.op in (Op.CONST0, Op.CONST1):
                val[v] = int(x.op is Op.CONST1)
            else:
                val[v] = _EVAL[x.op]([get(u) for u in x.fanins])
        return val[v]

    return {v.label: get(v.id) for v in net.vertices if v.op is Op.PO}


def tile_wave_interval(layout, vectors: int = 12, max_cycles: int = 32, seed: int = 0) -> int:
    """Minimal input interval in cycles, from a phase-stepped simulation of the raw tiles.

    Every vertex tile and every wire segment is a register that reloads in the
    phases matching its clock zone. Values carry the index of the input
    vector they stem from; mixing two indices marks a wave collision.
    Structure is rebuilt from ``vertex_at`` / ``wires_at`` and the input
    skews only.
    """
    net = layout.network
    n = layout.scheme.phases
    nodes: dict = {}  # key -> (zone, op or None, preds)
    seg_of = {}
    for t, segs in layout.wires_at.items():
        for s in segs:
            seg_of[(t, s.edge)] = s

    def feeder(e_idx: int, t):
        """Node key delivering edge ``e_idx`` into tile ``t``."""
        e = net.edges[e_idx]
        for d in _DELTA:
            nb = _side(t, d)
            s = seg_of.get((nb, e_idx))
            if s is not None and _side(nb, s.exit) == t:
                return ("w", nb, e_idx)
        src = layout.tile_of.get(e.source)
        if src is None:
            return ("pi", e.source)
        return ("v", e.source)

    for (t, e_idx), s in seg_of.items():
        e = net.edges[e_idx]
        nb = _side(t, s.entry)
        if (nb, e_idx) in seg_of:
            pred = ("w", nb, e_idx)
        elif layout.tile_of.get(e.source) == nb:
            pred = ("v", e.source)
        else:
            raise ValueError(f"dangling wire on {t}")
        nodes[("w", t, e_idx)] = (layout.clock(t), None, [pred])
    for v, t in layout.tile_of.items():
        op = net.vertices[v].op
        preds = [feeder(e, t) for e in net.in_edges(v)]
        nodes[("v", v)] = (layout.clock(t), op, preds)

    observe = {}
    for po in net.pos():
        label = net.vertices[po].label
        if po in layout.tile_of:
            observe[("v", po)] = label
        else:
            drv = net.vertices[po].fanins[0]
            if drv in layout.tile_of:
                observe[("v", drv)] = label
    if not observe or not net.pis():
        return 1
    rng = random.Random(seed)
    labels = [net.vertices[v].label for v in net.pis()]
    inputs = [{lab: rng.randint(0, 1) for lab in labels} for _ in range(vectors)]
    expected = [_reference_eval(net, vec) for vec in inputs]
    reader_zone = {k: z for k, (z, _, _) in nodes.items()}
    skew = dict(getattr(layout, "input_delay", {}))

    def run(k: int) -> bool:
        period = k * n

        def source(u: int, tau: int, zone: int):
            op = net.vertices[u].op
            if op in (Op.CONST0, Op.CONST1):
                return (int(op is Op.CONST1), None)
            if tau < zone:
                return None
            idx = (tau - zone) // period
            return (inputs[idx][net.vertices[u].label], {idx}) if idx < vectors else None

        held = {key: None for key in nodes}
        seen = {lab: set() for lab in observe.values()}
        horizon = vectors * period + 2 * n * (len(nodes) + 2)
        for tau in range(horizon):
            z = tau % n
            upd = {}
            for key, (zone, op, preds) in nodes.items():
                if zone != z:
                    continue
                if op in (Op.PI, Op.CONST0, Op.CONST1):
                    upd[key] = source(key[1], tau, zone)
                    continue
                args = [
                    source(p[1], tau, reader_zone[key] + n * skew.get(p[1], 0)) if p[0] == "pi" else held[p]
                    for p in preds
                ]
                if any(a is None for a in args):
                    upd[key] = None
                    continue
                tags = set().union(*(a[1] for a in args if a[1] is not None))
                bit = args[0][0] if op is None else _EVAL[op]([a[0] for a in args])
                upd[key] = (bit, tags or None)
            for key, val in upd.items():
                held[key] = val
                lab = observe.get(key)
                if lab and val and val[1] is not None and len(val[1]) == 1:
                    (i,) = val[1]
                    if val[0] == expected[i][lab]:
                        seen[lab].add(i)
        return all(len(s) == vectors for s in seen.values())

    for k in range(1, max_cycles + 1):
        if run(k):
            return k
    raise RuntimeError("no working input interval")


# ---------------------------------------------------------------- c17


def c17_reference(a: int, b: int, c: int, d: int, e: int) -> tuple[int, int]:
    """ISCAS-85 c17 written out as NAND expressions."""

    def nand(x, y):
        return 1 - (x & y)

    n10 = nand(a, c)
    n11 = nand(c, d)
    n16 = nand(b, n11)
    n19 = nand(n11, e)
    return nand(n10, n16), nand(n16, n19)
