from __future__ import annotations

import pytest

from fcnlayout.analysis import check_validity, equivalent, statistics, throughput
from fcnlayout.exact import (
    ExactError,
    ExactParams,
    Status,
    dimension_sequence,
    encode_instance,
    exact_layout,
    placeable_vertices,
)
from fcnlayout.network import NetworkBuilder, Op, substitute_fanouts
from generators import random_network
from oracles import brute_force_min_area


def and_net():
    b = NetworkBuilder("and2")
    x, y = b.pi("x"), b.pi("y")
    b.po(b.add(Op.AND, x, y), "z")
    return b.build()


def test_dimension_sequence_order():
    seq = list(dimension_sequence(4, upper_bound=6))
    assert seq == [(2, 2), (1, 4), (4, 1), (1, 5), (5, 1), (2, 3), (3, 2), (1, 6), (6, 1)]
    assert all(w * h >= 4 for w, h in seq)


def test_placeable_vertices():
    net = and_net()
    assert placeable_vertices(net, io_pins=False) == [2]
    assert sorted(placeable_vertices(net, io_pins=True)) == [0, 1, 2, 3]


def test_param_validation():
    with pytest.raises(ExactError):
        ExactParams(border_io=True)
    with pytest.raises(ExactError):
        ExactParams(wire_limit=0)


def test_single_gate_without_pins_fits_one_tile():
    res = exact_layout(and_net(), ExactParams(scheme="2ddwave4"))
    assert res.status is Status.FOUND
    assert (res.layout.width, res.layout.height) == (1, 1)
    assert equivalent(res.layout)


def test_io_pins_on_2ddwave():
    res = exact_layout(and_net(), ExactParams(scheme="2ddwave4", io_pins=True, border_io=True))
    lay = res.layout
    assert lay.width * lay.height == brute_force_min_area(and_net(), with_io=True).area
    assert check_validity(lay) == [] and equivalent(lay)
    assert all(lay.is_border_tile(t) for t in lay.pi_tiles | lay.po_tiles)
    assert throughput(lay) == 1


def test_upper_bound_gives_unsat():
    res = exact_layout(and_net(), ExactParams(scheme="2ddwave4", io_pins=True, upper_bound=5))
    assert res.status is Status.UNSAT_UP_TO_BOUND and res.layout is None
    assert all(r == "UNSAT" for _, _, r in res.explored)


def test_no_placeable_vertices():
    b = NetworkBuilder("wire")
    b.po(b.pi("a"), "y")
    res = exact_layout(b.build(), ExactParams())
    assert res.status is Status.FOUND and res.layout.area == 1


@pytest.mark.parametrize("scheme", ["2ddwave4", "use", "res", "open4"])
def test_small_random_networks(scheme):
    net = substitute_fanouts(random_network(2, 3, 1, seed=11))
    res = exact_layout(net, ExactParams(scheme=scheme, desync=True, timeout=30))
    assert res.status is Status.FOUND
    lay = res.layout
    assert check_validity(lay) == [] and equivalent(lay)
    assert statistics(lay).crossings == 0


def test_balanced_open_clocking_skews_untiled_inputs(c17_sub):
    res = exact_layout(c17_sub, ExactParams(timeout=60))
    assert res.status is Status.FOUND
    assert throughput(res.layout) == 1
    assert equivalent(res.layout)


def test_wire_limit_is_respected():
    net = substitute_fanouts(random_network(3, 4, 2, seed=5))
    res = exact_layout(net, ExactParams(scheme="2ddwave4", io_pins=True, desync=True, wire_limit=1, timeout=30))
    assert res.status in (Status.FOUND, Status.UNSAT_UP_TO_BOUND, Status.TIMEOUT)
    if res.layout is not None:
        lay = res.layout
        for e in range(len(net.edges)):
            assert len(lay.edge_segments(e)) <= 1


def test_latches_on_open_scheme():
    net = substitute_fanouts(random_network(2, 3, 1, seed=2))
    res = exact_layout(net, ExactParams(scheme="open4", io_pins=True, latches=True, timeout=30))
    assert res.status is Status.FOUND
    assert check_validity(res.layout) == [] and throughput(res.layout) == 1


def test_encoding_exposes_model():
    enc = encode_instance(and_net(), ExactParams(scheme="2ddwave4"), 2, 2)
    assert enc.model.Proto().variables


def test_rejects_unsubstituted(c17):
    with pytest.raises(ExactError):
        exact_layout(c17, ExactParams())
