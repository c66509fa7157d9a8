from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from fcnlayout.network import (
    CombinationalCycleError,
    LogicNetwork,
    NetworkBuilder,
    NetworkError,
    Op,
    Vertex,
    is_isomorphic,
    network_stats,
    simulate,
    substitute_fanouts,
    truth_table,
)
from fcnlayout.verilog import parse_verilog, to_verilog
from generators import random_network
from oracles import c17_reference


def test_c17_matches_reference_expressions(c17):
    labels = c17.pi_labels()
    assert labels == ["N1", "N2", "N3", "N6", "N7"]
    for bits in itertools.product((0, 1), repeat=5):
        out = simulate(c17, dict(zip(labels, bits)))
        assert (out["N22"], out["N23"]) == c17_reference(*bits)


def test_c17_substitution_counts(c17, c17_sub):
    assert network_stats(c17)["pi_count"] == 5
    assert network_stats(c17)["po_count"] == 2
    assert c17_sub.is_fanout_substituted()
    assert truth_table(c17) == truth_table(c17_sub)


def test_builder_and_arity_check():
    b = NetworkBuilder("t")
    a = b.pi("a")
    b.po(b.add(Op.NOT, a), "y")
    net = b.build()
    assert [v.op for v in net.vertices] == [Op.PI, Op.NOT, Op.PO]
    with pytest.raises(NetworkError):
        LogicNetwork([Vertex(0, Op.AND, "", (0,))])


def test_cycle_rejected():
    with pytest.raises(CombinationalCycleError):
        LogicNetwork([Vertex(0, Op.NOT, "", (1,)), Vertex(1, Op.NOT, "", (0,))])


def test_reading_a_po_is_rejected():
    with pytest.raises(NetworkError):
        LogicNetwork([Vertex(0, Op.PI, "a"), Vertex(1, Op.PO, "y", (0,)), Vertex(2, Op.NOT, "", (1,))])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 25), st.integers(1, 4), st.integers(0, 10_000), st.integers(2, 4))
def test_substitution_preserves_function_and_bounds_fanout(pis, gates, pos, seed, k):
    net = random_network(pis, gates, pos, seed)
    sub = substitute_fanouts(net, k)
    assert sub.is_fanout_substituted(k)
    for v in sub.vertices:
        if v.op is not Op.FANOUT:
            assert len(sub.readers(v.id)) <= 1
    assert truth_table(sub) == truth_table(net)
    # idempotent
    assert substitute_fanouts(sub, k) is sub


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 20), st.integers(1, 3), st.integers(0, 10_000))
def test_verilog_round_trip(pis, gates, pos, seed):
    net = random_network(pis, gates, pos, seed, ops=(Op.AND, Op.OR, Op.NOT, Op.XOR, Op.NAND, Op.MAJ))
    back = parse_verilog(to_verilog(net))
    assert back.pi_labels() == net.pi_labels()
    assert back.po_labels() == net.po_labels()
    assert truth_table(back) == truth_table(net)


def test_isomorphism_ignores_ids(c17):
    again = parse_verilog(to_verilog(c17))
    assert is_isomorphic(c17, again)
    other = parse_verilog(to_verilog(c17).replace("&", "|", 1))
    assert not is_isomorphic(c17, other)


def test_substitute_rejects_small_bound(c17):
    with pytest.raises(ValueError):
        substitute_fanouts(c17, 1)
