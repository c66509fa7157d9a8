"""Orthogonal east/south embedding on 2DDWave.

Every vertex gets its own row, its own column, or both; wires only ever run
east or south, so 2DDWave's diagonal clock makes every route consistent and
every hop balanced by construction of the scheme (not of the paths).
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .clocking import scheme_from_name
from .layout import GateLayout, Tile
from .network import LogicNetwork, Op, SOURCE_OPS


class OrthoError(ValueError):
    pass


class Color(str, enum.Enum):
    EAST = "EAST"
    SOUTH = "SOUTH"


@dataclass
class EdgeColoring:
    color: dict[int, Color]

    def __getitem__(self, edge: int) -> Color:
        return self.color[edge]

    def is_valid(self, net: LogicNetwork) -> bool:
        for v in net.vertices:
            for group in (net.in_edges(v.id), net.out_edges(v.id)):
                colors = [self.color[e] for e in group]
                if len(colors) != len(set(colors)):
                    return False
        return True


def _require_degree(net: LogicNetwork) -> None:
    d_in, d_out = net.max_degree()
    if d_in > 2 or d_out > 2 or not net.is_fanout_substituted():
        raise OrthoError(
            f"ortho needs in/out degree at most 2 (got {d_in}/{d_out}); substitute fan-outs first"
            + (" and decompose MAJ gates" if d_in > 2 else "")
        )


def color_edges(net: LogicNetwork) -> EdgeColoring:
    """Two-colour the edges so siblings (same source or same target) differ.

    Each edge has at most one sibling of each kind, so the conflict graph is
    a union of paths and even cycles; a BFS from the lowest edge id of every
    component, starting with EAST, colours it.
    """
    _require_degree(net)
    conflicts: list[list[int]] = [[] for _ in net.edges]
    for v in net.vertices:
        for group in (net.in_edges(v.id), net.out_edges(v.id)):
            if len(group) == 2:
                a, b = group
                conflicts[a].append(b)
                conflicts[b].append(a)
    color: dict[int, Color] = {}
    for root in range(len(net.edges)):
        if root in color:
            continue
        color[root] = Color.EAST
        queue = deque([root])
        while queue:
            e = queue.popleft()
            other = Color.SOUTH if color[e] is Color.EAST else Color.EAST
            for f in sorted(conflicts[e]):
                if f not in color:
                    color[f] = other
                    queue.append(f)
                elif color[f] is not other:
                    raise OrthoError("edge conflict graph is not bipartite")
    return EdgeColoring(color)


def ortho_layout(net: LogicNetwork, *, border_io: bool = False, name: Optional[str] = None) -> GateLayout:
    """Lay out a fan-out-substituted network on 2DDWave with east/south routing only.

    With ``border_io`` the sources feeding south sit in the top row and those
    feeding east in the left column; primary outputs always end up in the
    last row or column.
    """
    coloring = color_edges(net)
    pos: dict[int, Tile] = {}
    routes: list[tuple[int, list[Tile]]] = []
    nxt_col = nxt_row = 1 if border_io else 0

    def fresh_col() -> int:
        nonlocal nxt_col
        nxt_col += 1
        return nxt_col - 1

    def fresh_row() -> int:
        nonlocal nxt_row
        nxt_row += 1
        return nxt_row - 1

    def straight(a: Tile, b: Tile) -> list[Tile]:
        if a[1] == b[1]:
            return [(x, a[1]) for x in range(a[0], b[0] + 1)]
        return [(a[0], y) for y in range(a[1], b[1] + 1)]

    deferred_pos = []
    for v in net.topological_order():
        vert = net.vertices[v]
        ins = net.in_edges(v)
        if vert.op is Op.PO:
            deferred_pos.append(v)
            continue
        if not ins:
            outs = net.out_edges(v)
            if border_io and vert.op in SOURCE_OPS and len(outs) == 1:
                if coloring[outs[0]] is Color.SOUTH:
                    pos[v] = (fresh_col(), 0)
                else:
                    pos[v] = (0, fresh_row())
            else:
                pos[v] = (fresh_col(), fresh_row())
        elif len(ins) == 1:
            e = ins[0]
            ux, uy = pos[net.edges[e].source]
            if coloring[e] is Color.EAST:
                pos[v] = (fresh_col(), uy)
            else:
                pos[v] = (ux, fresh_row())
            routes.append((e, straight((ux, uy), pos[v])))
        else:
            x, y = fresh_col(), fresh_row()
            pos[v] = (x, y)
            for e in ins:
                ux, uy = pos[net.edges[e].source]
                if coloring[e] is Color.EAST:
                    corner = (x, uy)
                    routes.append((e, straight((ux, uy), corner) + straight(corner, (x, y))[1:]))
                else:
                    corner = (ux, y)
                    routes.append((e, straight((ux, uy), corner) + straight(corner, (x, y))[1:]))

    last_col, last_row = nxt_col, nxt_row
    for v in deferred_pos:
        e = net.in_edges(v)[0]
        ux, uy = pos[net.edges[e].source]
        pos[v] = (last_col, uy) if coloring[e] is Color.EAST else (ux, last_row)
        routes.append((e, straight((ux, uy), pos[v])))

    width = max((t[0] for t in pos.values()), default=0) + 1
    height = max((t[1] for t in pos.values()), default=0) + 1
    lay = GateLayout(width, height, scheme_from_name("2ddwave4"), net, allow_crossings=True, name=name)
    for v, t in pos.items():
        lay.assign_logic_vertex(t, v)
    for e, path in routes:
        lay.route_edge(e, path)
    return lay
