from __future__ import annotations

import pytest

from fcnlayout.clocking import scheme_from_name
from fcnlayout.layout import (
    DefaultedMap,
    Direction,
    GateLayout,
    Layer,
    LayoutError,
    naive_random_placement,
)
from fcnlayout.network import NetworkBuilder, Op


def chain():
    b = NetworkBuilder("chain")
    a = b.pi("a")
    b.po(b.add(Op.NOT, a), "y")
    return b.build()


def test_defaulted_map_returns_defaults_without_storing():
    m = DefaultedMap(int)
    assert m[(3, 4)] == 0
    assert (3, 4) not in m


def test_directions():
    assert Direction.N.opposite is Direction.S
    assert Direction.E.rotated_cw() is Direction.S
    assert Direction.between((1, 1), (2, 1)) is Direction.E
    assert Direction.between((1, 1), (1, 0)) is Direction.N


def test_assignment_and_occupancy():
    lay = GateLayout(3, 2, scheme_from_name("2ddwave4"), chain())
    lay.assign_logic_vertex((0, 0), 0)
    assert (0, 0) in lay.pi_tiles
    with pytest.raises(LayoutError):
        lay.assign_logic_vertex((0, 0), 1)
    with pytest.raises(LayoutError):
        lay.assign_logic_vertex((1, 0), 0)
    with pytest.raises(LayoutError):
        lay.assign_logic_vertex((5, 0), 1)
    assert lay.clock((2, 1)) == 3
    assert lay.is_border_tile((0, 0)) and lay.area == 6


def test_wire_rules():
    b = NetworkBuilder("two")
    x, y = b.pi("x"), b.pi("y")
    b.po(x, "p")
    b.po(y, "q")
    net = b.build()
    lay = GateLayout(3, 3, scheme_from_name("2ddwave4"), net, allow_crossings=False)
    lay.assign_wire((1, 1), 0, Layer.GROUND, Direction.W, Direction.E)
    with pytest.raises(LayoutError):
        lay.assign_wire((1, 1), 1, Layer.CROSSING, Direction.N, Direction.S)  # crossings disabled
    lay2 = GateLayout(3, 3, scheme_from_name("2ddwave4"), net)
    lay2.assign_wire((1, 1), 0, Layer.GROUND, Direction.W, Direction.E)
    with pytest.raises(LayoutError):
        lay2.assign_wire((1, 1), 1, Layer.GROUND, Direction.N, Direction.S)  # same layer
    with pytest.raises(LayoutError):
        lay2.assign_wire((1, 1), 1, Layer.CROSSING, Direction.N, Direction.E)  # bent
    lay2.assign_wire((1, 1), 1, Layer.CROSSING, Direction.N, Direction.S)
    with pytest.raises(LayoutError):
        lay2.assign_wire((1, 1), 2, Layer.CROSSING, Direction.N, Direction.S)
    with pytest.raises(LayoutError):
        lay2.assign_wire((0, 0), 0, Layer.GROUND, Direction.W, Direction.W)


def test_clock_and_latch_setters():
    lay = GateLayout(2, 2, scheme_from_name("open4"), chain())
    lay.set_clock((1, 1), 3)
    assert lay.clock((1, 1)) == 3 and lay.clock((0, 0)) is None
    with pytest.raises(LayoutError):
        lay.set_clock((0, 0), 4)
    with pytest.raises(LayoutError):
        GateLayout(2, 2, scheme_from_name("use"), chain()).set_clock((0, 0), 1)
    lay.set_latch((0, 1), 2)
    assert lay.latch_at[(0, 1)] == 2
    lay.set_latch((0, 1), 0)
    assert (0, 1) not in lay.latch_at


def test_input_delay_only_for_untiled_inputs():
    lay = GateLayout(2, 2, scheme_from_name("open4"), chain())
    lay.set_input_delay(0, 2)
    assert lay.input_delay == {0: 2}
    lay.set_input_delay(0, 0)
    assert lay.input_delay == {}
    with pytest.raises(LayoutError):
        lay.set_input_delay(1, 1)


def test_resize_and_copy_are_independent():
    lay = GateLayout(3, 1, scheme_from_name("2ddwave4"), chain())
    lay.assign_logic_vertex((0, 0), 0).assign_logic_vertex((1, 0), 1).assign_logic_vertex((2, 0), 2)
    big = lay.resized(5, 4)
    assert big.tile_of == lay.tile_of and big.width == 5
    big.assign_wire((3, 3), 0, Layer.GROUND, Direction.W, Direction.E)
    assert not lay.wires_at[(3, 3)]
    with pytest.raises(LayoutError):
        lay.resized(2, 1)


def test_naive_random_placement_is_seeded():
    net = chain()
    a = naive_random_placement(net, scheme_from_name("2ddwave4"), seed=3)
    b = naive_random_placement(net, scheme_from_name("2ddwave4"), seed=3)
    assert a.tile_of == b.tile_of and len(a.tile_of) == 3
    assert (a.width, a.height) == (3, 3)
