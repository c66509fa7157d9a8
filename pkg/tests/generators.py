"""Input generators for the tests: random networks, exhaustive small DAGs and skewed layouts."""
from __future__ import annotations

import itertools
import random

from fcnlayout.clocking import scheme_from_name
from fcnlayout.layout import GateLayout, step
from fcnlayout.network import ARITY, LogicNetwork, NetworkBuilder, Op, substitute_fanouts
from fcnlayout.ortho import ortho_layout

# ---------------------------------------------------------------- networks


def random_network(
    n_pis: int,
    n_gates: int,
    n_pos: int,
    seed: int,
    ops=(Op.AND, Op.OR, Op.NOT),
    name: str = "rand",
) -> LogicNetwork:
    """Random DAG; every PI and gate feeds something, so nothing dangles."""
    rng = random.Random(seed)
    b = NetworkBuilder(name)
    signals = [b.pi(f"x{i}") for i in range(n_pis)]
    unread = set(signals)
    for _ in range(n_gates):
        op = rng.choice(ops)
        arity = ARITY[op]
        if len(signals) < arity:
            op, arity = Op.NOT, 1
        # prefer unread signals so the DAG stays connected-ish
        pool = sorted(unread) if len(unread) >= arity and rng.random() < 0.7 else signals
        fanins = rng.sample(pool, arity)
        g = b.add(op, *fanins)
        unread.difference_update(fanins)
        unread.add(g)
        signals.append(g)
    outs = sorted(unread)
    spare = [s for s in signals[n_pis:] if s not in outs]
    rng.shuffle(spare)
    outs += spare[: max(0, n_pos - len(outs))]
    for i, s in enumerate(outs):
        b.po(s, f"y{i}")
    return b.build()


_CORE_OPS = {Op.NOT: (1, 1), Op.AND: (2, 1), Op.FANOUT: (1, 2)}


def _connected(n: int, arcs) -> bool:
    adj = {i: set() for i in range(n)}
    for a, c in arcs:
        adj[a].add(c)
        adj[c].add(a)
    seen, todo = {0}, [0]
    while todo:
        for w in adj[todo.pop()] - seen:
            seen.add(w)
            todo.append(w)
    return len(seen) == n


def _canonical(ops, arcs) -> tuple:
    n = len(ops)
    best = None
    for perm in itertools.permutations(range(n)):
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        key = (tuple(ops[inv[i]].value for i in range(n)), tuple(sorted((perm[a], perm[c]) for a, c in arcs)))
        if best is None or key < best:
            best = key
    return best


def enumerate_small_networks(max_core: int = 4, *, with_io: bool = False) -> list[LogicNetwork]:
    """Connected fan-out substituted networks with at most ``max_core`` placeable vertices.

    A core of NOT / AND / FANOUT vertices is wired as a DAG (parallel arcs
    allowed, so a fan-out may drive both inputs of one gate); free inputs get
    their own PI and free outputs their own PO. With ``with_io`` the PIs and
    POs count towards ``max_core`` because they occupy tiles too, and the bare
    PI to PO wire is included. Isomorphic duplicates are dropped.
    """
    nets: list[LogicNetwork] = []
    seen: set[tuple] = set()
    if with_io:
        b = NetworkBuilder("dag0")
        b.po(b.pi("x0"), "y0")
        nets.append(b.build())
    for n in range(1, max_core + 1):
        pairs = [(a, c) for a in range(n) for c in range(a + 1, n)]
        for ops in itertools.product(_CORE_OPS, repeat=n):
            for mult in itertools.product(range(3), repeat=len(pairs)):
                arcs = [p for p, m in zip(pairs, mult) for _ in range(m)]
                if n > 1 and not _connected(n, arcs):
                    continue
                indeg = [sum(1 for _, c in arcs if c == v) for v in range(n)]
                outdeg = [sum(1 for a, _ in arcs if a == v) for v in range(n)]
                if any(indeg[v] > _CORE_OPS[ops[v]][0] or outdeg[v] > _CORE_OPS[ops[v]][1] for v in range(n)):
                    continue
                free_in = sum(_CORE_OPS[ops[v]][0] - indeg[v] for v in range(n))
                free_out = sum(_CORE_OPS[ops[v]][1] - outdeg[v] for v in range(n))
                if with_io and n + free_in + free_out > max_core:
                    continue
                key = _canonical(ops, arcs)
                if key in seen:
                    continue
                seen.add(key)
                b = NetworkBuilder(f"dag{len(nets)}")
                ids: dict[int, int] = {}
                for v in range(n):  # 0..n-1 is a topological order
                    fanins = [ids[a] for a, c in arcs if c == v]
                    while len(fanins) < _CORE_OPS[ops[v]][0]:
                        fanins.append(b.pi(f"x{v}_{len(fanins)}"))
                    ids[v] = b.add(ops[v], *fanins)
                for v in range(n):
                    for k in range(_CORE_OPS[ops[v]][1] - outdeg[v]):
                        b.po(ids[v], f"y{v}_{k}")
                nets.append(b.build())
    return nets


def staggered_layout(seed: int, max_pairs: int = 4) -> GateLayout:
    """A valid open-clocked layout whose paths are deliberately out of step.

    Starts from the orthogonal layout of a random network, copies its 2DDWave
    zones into an open scheme and then inserts latch pairs (l, N - l) on two
    consecutive single-wire tiles of one edge. Each pair delays that edge by a
    full clock cycle while every zone outside the pair stays valid.
    """
    rng = random.Random(seed)
    net = substitute_fanouts(random_network(rng.randint(2, 4), rng.randint(3, 8), rng.randint(1, 3), seed))
    base = ortho_layout(net)
    lay = base.copy()
    lay.scheme = scheme_from_name("open4")
    n = lay.scheme.phases
    for t in lay.tiles():
        lay.set_clock(t, base.clock(t))
    pairs = []
    for t in sorted(base.occupied_tiles()):
        segs = base.wires_at[t]
        if base.vertex_at[t] is None and len(segs) == 1:
            nxt = step(t, segs[0].exit)
            nsegs = base.wires_at[nxt] if base.in_bounds(nxt) else ()
            if base.vertex_at[nxt] is None and len(nsegs) == 1 and nsegs[0].edge == segs[0].edge:
                pairs.append((t, nxt))
    rng.shuffle(pairs)
    used: set = set()
    for a, b in pairs[: rng.randint(1, max_pairs)]:
        if a in used or b in used:
            continue
        used |= {a, b}
        delay = rng.randint(1, n - 1)
        lay.set_latch(a, delay)
        lay.set_latch(b, n - delay)
        lay.set_clock(b, (lay.clock(b) + delay) % n)
    return lay
