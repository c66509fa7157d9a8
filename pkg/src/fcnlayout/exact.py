"""Area-minimal placement and routing by constraint solving.

Every candidate grid size is encoded as a CP-SAT model whose solutions are
the valid layouts of that size; sizes are tried in order of increasing area
and the first satisfiable one wins.
"""
from __future__ import annotations

import enum
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ortools.sat.python import cp_model

from .analysis import check_validity
from .clocking import ClockingScheme, scheme_from_name
from .layout import DIRECTIONS, Direction, GateLayout, Layer, Tile, step
from .network import LogicNetwork, Op, SOURCE_OPS

log = logging.getLogger(__name__)


class ExactError(ValueError):
    pass


class Status(str, enum.Enum):
    FOUND = "FOUND"
    UNSAT_UP_TO_BOUND = "UNSAT_UP_TO_BOUND"
    TIMEOUT = "TIMEOUT"


@dataclass
class ExactParams:
    scheme: ClockingScheme = field(default_factory=lambda: scheme_from_name("open4"))
    crossings: bool = False
    io_pins: bool = False
    border_io: bool = False
    desync: bool = False
    latches: bool = False
    wire_limit: Optional[int] = None
    timeout: Optional[float] = None
    total_timeout: Optional[float] = None
    upper_bound: Optional[int] = None
    seed: int = 0
    solver_workers: int = 1
    concurrent: int = 1
    # with desync on, prefer the smallest path-delay spread among minimal-area layouts
    optimize_throughput: bool = True

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = scheme_from_name(self.scheme)
        if self.border_io and not self.io_pins:
            raise ExactError("border I/O requires I/O pins")
        if self.wire_limit is not None and self.wire_limit < 1:
            raise ExactError("wire_limit must be at least 1")
        if self.concurrent < 1 or self.solver_workers < 1:
            raise ExactError("worker counts must be positive")


@dataclass
class ExactResult:
    layout: Optional[GateLayout]
    status: Status
    explored: list[tuple[int, int, str]]
    runtime: float


def dimension_sequence(n_vertices: int, upper_bound: Optional[int] = None) -> Iterator[tuple[int, int]]:
    """All grid sizes that can hold ``n_vertices``, by area, then squareness, then narrow-first."""
    area = max(1, n_vertices)
    while upper_bound is None or area <= upper_bound:
        shapes = [(w, area // w) for w in range(1, area + 1) if area % w == 0]
        shapes.sort(key=lambda s: (abs(s[0] - s[1]), s[0] > s[1]))
        yield from shapes
        area += 1


def placeable_vertices(net: LogicNetwork, io_pins: bool) -> list[int]:
    if io_pins:
        return [v.id for v in net.vertices]
    return [v.id for v in net.vertices if v.op not in SOURCE_OPS and v.op is not Op.PO]


def _check_network(net: LogicNetwork) -> None:
    if not net.is_fanout_substituted():
        raise ExactError("network must be fan-out substituted before layout")


class _Encoding:
    """CP-SAT model of all valid layouts of ``net`` on a W x H grid."""

    def __init__(self, net: LogicNetwork, params: ExactParams, width: int, height: int):
        self.net, self.params = net, params
        self.width, self.height = width, height
        scheme = params.scheme
        self.n = scheme.phases
        self.frame = GateLayout(width, height, scheme, net, allow_crossings=params.crossings)
        self.model = cp_model.CpModel()
        self.placed = placeable_vertices(net, params.io_pins)
        self.placed_set = set(self.placed)
        self.tiles = list(self.frame.tiles())
        self.edges = [
            e.index for e in net.edges if e.source in self.placed_set and e.target in self.placed_set
        ]
        self.feasible = True
        self.skew: dict[int, cp_model.IntVar] = {}
        self._build()

    # -- helpers --------------------------------------------------------------
    def _hop_allowed(self, a: Tile, b: Tile) -> bool:
        if self.params.latches or not self.params.scheme.regular:
            return True
        za, zb = self.frame.clock(a), self.frame.clock(b)
        return zb == (za + 1) % self.n

    def _build(self) -> None:
        m, net, p_ = self.model, self.net, self.params
        tiles, frame, n = self.tiles, self.frame, self.n
        regular = p_.scheme.regular

        pairs = [(a, b) for a in tiles for _, b in frame.neighbors(a) if self._hop_allowed(a, b)]
        self.pairs = pairs
        succ: dict[Tile, list[Tile]] = {t: [] for t in tiles}
        pred: dict[Tile, list[Tile]] = {t: [] for t in tiles}
        for a, b in pairs:
            succ[a].append(b)
            pred[b].append(a)

        # placement with sound domain filtering
        self.p: dict[tuple[int, Tile], cp_model.IntVar] = {}
        io_ops = SOURCE_OPS | {Op.PO}
        for v in self.placed:
            op = net.op(v)
            n_in = sum(1 for u in net.vertices[v].fanins if u in self.placed_set)
            n_out = sum(1 for w in net.readers(v) if w in self.placed_set)
            domain = []
            for t in tiles:
                if p_.border_io and op in io_ops and not frame.is_border_tile(t):
                    continue
                if regular and not p_.latches:
                    if len(pred[t]) < n_in or len(succ[t]) < n_out:
                        continue
                domain.append(t)
            if not domain:
                self.feasible = False
                return
            for t in domain:
                self.p[v, t] = m.NewBoolVar(f"p{v}_{t[0]}_{t[1]}")
            m.AddExactlyOne(self.p[v, t] for t in domain)
        self.gate: dict[Tile, list] = {t: [] for t in tiles}
        for (v, t), var in self.p.items():
            self.gate[t].append(var)
        for t in tiles:
            if len(self.gate[t]) > 1:
                m.AddAtMostOne(self.gate[t])

        def p(v: int, t: Tile):
            return self.p.get((v, t), 0)

        # routing
        self.w: dict[tuple[int, Tile], cp_model.IntVar] = {}
        self.h: dict[tuple[int, Tile, Tile], cp_model.IntVar] = {}
        for e in self.edges:
            for t in tiles:
                self.w[e, t] = m.NewBoolVar(f"w{e}_{t[0]}_{t[1]}")
            for a, b in pairs:
                self.h[e, a, b] = m.NewBoolVar(f"h{e}_{a[0]}_{a[1]}_{b[0]}_{b[1]}")
            ed = net.edges[e]
            for t in tiles:
                out = [self.h[e, t, b] for b in succ[t]]
                inn = [self.h[e, a, t] for a in pred[t]]
                m.Add(sum(out) == p(ed.source, t) + self.w[e, t])
                m.Add(sum(inn) == p(ed.target, t) + self.w[e, t])
            if p_.wire_limit is not None:
                m.Add(sum(self.w[e, t] for t in tiles) <= p_.wire_limit)

        # one signal per tile side
        seen = set()
        for a, b in pairs:
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            terms = [
                self.h[k] for e in self.edges for k in ((e, a, b), (e, b, a)) if k in self.h
            ]
            if len(terms) > 1:
                m.AddAtMostOne(terms)

        # tile capacity and crossings
        self.c: dict[Tile, cp_model.IntVar] = {}
        for t in tiles:
            wires = [self.w[e, t] for e in self.edges]
            if not wires:
                continue
            g = sum(self.gate[t])
            for wv in wires:
                m.Add(wv + g <= 1)
            if not p_.crossings:
                m.Add(sum(wires) <= 1)
                continue
            c = m.NewBoolVar(f"c_{t[0]}_{t[1]}")
            self.c[t] = c
            m.Add(sum(wires) == 1 + c).OnlyEnforceIf(c)
            m.Add(sum(wires) <= 1).OnlyEnforceIf(c.Not())
            # both segments straight; distinct sides follow from side capacity
            for e in self.edges:
                for d in DIRECTIONS:
                    src = step(t, d)
                    dst = step(t, d.opposite)
                    enter = self.h.get((e, src, t), 0)
                    leave = self.h.get((e, t, dst), 0)
                    if isinstance(enter, int) and isinstance(leave, int):
                        continue
                    m.Add(enter == leave).OnlyEnforceIf(c)

        # clocking and latches
        self.lat: dict[Tile, cp_model.IntVar] = {}
        self.zone: dict[Tile, cp_model.IntVar] = {}
        if p_.latches:
            for t in tiles:
                lt = m.NewIntVar(0, n - 1, f"lat_{t[0]}_{t[1]}")
                self.lat[t] = lt
                on = m.NewBoolVar(f"lon_{t[0]}_{t[1]}")
                m.Add(lt >= 1).OnlyEnforceIf(on)
                m.Add(lt == 0).OnlyEnforceIf(on.Not())
                # latches only on tiles that carry exactly one wire
                m.Add(sum(self.gate[t]) == 0).OnlyEnforceIf(on)
                wires = [self.w[e, t] for e in self.edges]
                m.Add(sum(wires) == 1).OnlyEnforceIf(on)
        if not regular:
            for t in tiles:
                self.zone[t] = m.NewIntVar(0, n - 1, f"z_{t[0]}_{t[1]}")
            for a, b in pairs:
                used = [self.h[e, a, b] for e in self.edges]
                if not used:
                    continue
                f = m.NewBoolVar(f"f_{a[0]}_{a[1]}_{b[0]}_{b[1]}")
                m.AddMaxEquality(f, used)
                q = m.NewIntVar(0, 1, "")
                shift = self.lat[a] if p_.latches else 0
                m.Add(self.zone[b] + n * q == self.zone[a] + 1 + shift).OnlyEnforceIf(f)
        elif p_.latches:
            for (e, a, b), hv in self.h.items():
                m.Add(self.lat[a] == (frame.clock(b) - frame.clock(a) - 1) % n).OnlyEnforceIf(hv)

        # no detached wire loops
        if self._hop_graph_cyclic(succ):
            size = len(tiles)
            for e in self.edges:
                pos = {t: m.NewIntVar(0, size, "") for t in tiles}
                for a, b in pairs:
                    m.Add(pos[b] >= pos[a] + 1).OnlyEnforceIf(self.h[e, a, b])

        if not p_.desync:
            self._balance()
        elif p_.optimize_throughput:
            self._imbalance_objective()

    def _hop_graph_cyclic(self, succ: dict[Tile, list[Tile]]) -> bool:
        state: dict[Tile, int] = {}
        for root in succ:
            if root in state:
                continue
            stack = [(root, iter(succ[root]))]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state.get(nxt) == 1:
                    return True
                elif nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(succ[nxt])))
        return False

    def _zone_expr(self, v: int, offset_fn):
        """Linear expression of f(zone of v's tile) for a per-zone table ``offset_fn``."""
        terms = []
        for (u, t), var in self.p.items():
            if u == v:
                if self.params.scheme.regular:
                    terms.append(offset_fn(self.frame.clock(t)) * var)
        return sum(terms)

    def _balance(self) -> None:
        """Every placed vertex gets one absolute time; all paths into it must agree."""
        m, net, n = self.model, self.net, self.n
        horizon = n * (len(self.tiles) + 2)
        self.T = {v: m.NewIntVar(0, horizon, f"T{v}") for v in self.placed}
        for v in self.placed:
            if net.op(v) is Op.PI:
                m.Add(self.T[v] == self._pi_time(v))
                continue
            untiled = [u for u in net.vertices[v].fanins if net.op(u) is Op.PI and u not in self.placed_set]
            if untiled:
                # an untiled input may be applied whole cycles late so that it meets the other paths
                tv = self._pi_time(v)
                for u in untiled:
                    self.skew[u] = m.NewIntVar(0, horizon // n, f"k{u}")
                    m.Add(self.T[v] == tv + n * self.skew[u])
        for e in self.edges:
            ed = net.edges[e]
            m.Add(self.T[ed.target] == self.T[ed.source] + self._edge_delay(e))

    def _edge_delay(self, e: int):
        """Phases from the source tile of ``e`` to its target tile."""
        m, n = self.model, self.n
        length = 1 + sum(self.w[e, t] for t in self.tiles)
        if self.params.latches:
            delays = []
            for t in self.tiles:
                d = m.NewIntVar(0, n - 1, "")
                m.Add(d == self.lat[t]).OnlyEnforceIf(self.w[e, t])
                m.Add(d == 0).OnlyEnforceIf(self.w[e, t].Not())
                delays.append(d)
            length = length + sum(delays)
        return length

    def _pi_time(self, v: int):
        """Absolute time of input data at v: a PI pin, or a gate reading an untiled input."""
        if self.params.scheme.regular:
            return self._zone_expr(v, lambda z: z)
        tv = self.model.NewIntVar(0, self.n - 1, "")
        self._tie_to_zone(v, tv)
        return tv

    def _imbalance_objective(self) -> None:
        """Minimise the largest spread of arrival times converging on any vertex."""
        m, net = self.model, self.net
        horizon = self.n * (len(self.tiles) + 2)
        fed: set[int] = set()
        for v in net.topological_order():
            if net.op(v) is Op.PI or any(u in fed for u in net.vertices[v].fanins):
                fed.add(v)
        late, early = {}, {}
        spread = m.NewIntVar(0, horizon, "spread")
        for v in net.topological_order():
            if v not in self.placed_set or v not in fed:
                continue
            lo, hi = [], []
            if net.op(v) is Op.PI:
                t = self._pi_time(v)
                lo.append(t)
                hi.append(t)
            for u in net.vertices[v].fanins:
                if u not in self.placed_set and net.op(u) is Op.PI:
                    t = self._pi_time(v)
                    lo.append(t)
                    hi.append(t)
                    break
            for e in net.in_edges(v):
                u = net.edges[e].source
                if e in self.edges and u in fed:
                    d = self._edge_delay(e)
                    hi.append(late[u] + d)
                    lo.append(early[u] + d)
            late[v] = m.NewIntVar(0, horizon, f"L{v}")
            early[v] = m.NewIntVar(0, horizon, f"S{v}")
            m.AddMaxEquality(late[v], hi)
            m.AddMinEquality(early[v], lo)
            m.Add(spread >= late[v] - early[v])
        m.Minimize(spread)

    def _tie_to_zone(self, v: int, tv) -> None:
        for (u, t), var in self.p.items():
            if u == v:
                self.model.Add(tv == self.zone[t]).OnlyEnforceIf(var)

    # -- decoding -------------------------------------------------------------
    def decode(self, solver: cp_model.CpSolver, name: Optional[str] = None) -> GateLayout:
        net = self.net
        lay = GateLayout(
            self.width, self.height, self.params.scheme, net,
            allow_crossings=self.params.crossings, name=name or net.name,
        )
        for (v, t), var in self.p.items():
            if solver.BooleanValue(var):
                lay.assign_logic_vertex(t, v)
        nxt: dict[tuple[int, Tile], Tile] = {}
        for (e, a, b), var in self.h.items():
            if solver.BooleanValue(var):
                nxt[e, a] = b
        paths = {}
        for e in self.edges:
            ed = net.edges[e]
            cur, goal = lay.tile_of[ed.source], lay.tile_of[ed.target]
            path = [cur]
            while cur != goal:
                cur = nxt[e, cur]
                path.append(cur)
            paths[e] = path
        load: dict[Tile, int] = {}
        for path in paths.values():
            for t in path[1:-1]:
                load[t] = load.get(t, 0) + 1
        for e, path in paths.items():
            layers = []
            for i in range(1, len(path) - 1):
                t = path[i]
                vertical = not Direction.between(t, path[i - 1]).horizontal
                layers.append(Layer.CROSSING if load[t] == 2 and vertical else Layer.GROUND)
            lay.route_edge(e, path, layers)
        if not self.params.scheme.regular:
            for t in lay.occupied_tiles():
                lay.set_clock(t, solver.Value(self.zone[t]))
        for t, var in self.lat.items():
            val = solver.Value(var)
            if val:
                lay.set_latch(t, val)
        for u, var in self.skew.items():
            lay.set_input_delay(u, solver.Value(var))
        return lay


def encode_instance(net: LogicNetwork, params: ExactParams, width: int, height: int) -> _Encoding:
    _check_network(net)
    return _Encoding(net, params, width, height)


def _solve_instance(
    enc: _Encoding, limit: Optional[float], params: ExactParams, registry: Optional[list] = None
) -> tuple[str, Optional[GateLayout]]:
    if not enc.feasible:
        return "UNSAT", None
    solver = cp_model.CpSolver()
    solver.parameters.num_workers = params.solver_workers
    solver.parameters.random_seed = params.seed
    if limit is not None:
        solver.parameters.max_time_in_seconds = max(0.01, limit)
    if registry is not None:
        registry.append(solver)
    status = solver.Solve(enc.model)
    if status in (cp_model.OPTIMAL, cp_model.FEASIBLE):
        return "FOUND", enc.decode(solver)
    if status == cp_model.INFEASIBLE:
        return "UNSAT", None
    return "TIMEOUT", None


def _empty_result(net: LogicNetwork, params: ExactParams, start: float) -> ExactResult:
    lay = GateLayout(1, 1, params.scheme, net, allow_crossings=params.crossings)
    return ExactResult(lay, Status.FOUND, [(1, 1, "FOUND")], time.perf_counter() - start)


def exact_layout(net: LogicNetwork, params: Optional[ExactParams] = None) -> ExactResult:
    """Smallest-area layout of ``net`` under ``params``."""
    params = params or ExactParams()
    start = time.perf_counter()
    _check_network(net)
    count = len(placeable_vertices(net, params.io_pins))
    if params.upper_bound is not None and count > params.upper_bound:
        raise ExactError(f"{count} vertices cannot fit into an area of {params.upper_bound}")
    if count == 0:
        return _empty_result(net, params, start)
    bound = params.upper_bound
    if bound is None:
        bound = (count + len(net.edges)) ** 2
    sizes = list(dimension_sequence(count, bound))
    if params.concurrent > 1:
        return _search_concurrent(net, params, sizes, start)

    explored: list[tuple[int, int, str]] = []
    timed_out = False
    for w, h in sizes:
        limit = _instance_limit(params, start)
        if limit is not None and limit <= 0:
            return ExactResult(None, Status.TIMEOUT, explored, time.perf_counter() - start)
        enc = _Encoding(net, params, w, h)
        outcome, lay = _solve_instance(enc, limit, params)
        explored.append((w, h, outcome))
        log.info("exact %dx%d: %s", w, h, outcome)
        if outcome == "FOUND":
            _assert_valid(lay)
            return ExactResult(lay, Status.FOUND, explored, time.perf_counter() - start)
        timed_out |= outcome == "TIMEOUT"
    status = Status.TIMEOUT if timed_out else Status.UNSAT_UP_TO_BOUND
    return ExactResult(None, status, explored, time.perf_counter() - start)


def _instance_limit(params: ExactParams, start: float) -> Optional[float]:
    limits = []
    if params.timeout is not None:
        limits.append(params.timeout)
    if params.total_timeout is not None:
        limits.append(params.total_timeout - (time.perf_counter() - start))
    return min(limits) if limits else None


def _assert_valid(lay: GateLayout) -> None:
    violations = check_validity(lay)
    if violations:
        raise AssertionError(f"solver model decoded into an invalid layout: {violations[:3]}")


def _search_concurrent(
    net: LogicNetwork, params: ExactParams, sizes: list[tuple[int, int]], start: float
) -> ExactResult:
    """Solve several grid sizes at once; the smallest satisfiable one in sequence order wins."""
    outcomes: dict[int, tuple[str, Optional[GateLayout]]] = {}
    solvers: dict[int, list] = {}
    lock = threading.Lock()
    best = [len(sizes)]

    def job(i: int):
        with lock:
            if i > best[0]:
                return i, ("SKIPPED", None)
            solvers[i] = []
        limit = _instance_limit(params, start)
        if limit is not None and limit <= 0:
            return i, ("TIMEOUT", None)
        enc = _Encoding(net, params, *sizes[i])
        res = _solve_instance(enc, limit, params, solvers[i])
        if res[0] == "FOUND":
            with lock:
                if i < best[0]:
                    best[0] = i
                    for j, regs in solvers.items():
                        if j > i:
                            for s in regs:
                                s.stop_search()
        return i, res

    with ThreadPoolExecutor(max_workers=params.concurrent) as pool:
        futures = [pool.submit(job, i) for i in range(len(sizes))]
        for fut in futures:
            i, res = fut.result()
            outcomes[i] = res
            if i >= best[0]:
                for f in futures:
                    f.cancel()
                break
        for fut in futures:
            if fut.done() and not fut.cancelled():
                i, res = fut.result()
                outcomes[i] = res

    explored = []
    for i in sorted(outcomes):
        outcome, lay = outcomes[i]
        if outcome == "SKIPPED":
            continue
        explored.append((*sizes[i], outcome))
        if outcome == "FOUND":
            _assert_valid(lay)
            return ExactResult(lay, Status.FOUND, explored, time.perf_counter() - start)
    timed_out = any(o == "TIMEOUT" for o, _ in outcomes.values())
    return ExactResult(None, Status.TIMEOUT if timed_out else Status.UNSAT_UP_TO_BOUND, explored,
                       time.perf_counter() - start)
