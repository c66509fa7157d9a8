"""Physical design for field-coupled nanocomputing: netlists to clocked tile layouts to QCA cells."""
from __future__ import annotations

from .clocking import ClockingScheme, available_schemes, clock_number, scheme_from_name
from .layout import Direction, GateLayout, Layer, LayoutError, WireSegment
from .network import LogicNetwork, NetworkBuilder, Op, network_stats, simulate, substitute_fanouts
from .verilog import parse_verilog, read_verilog, to_verilog
from .analysis import (
    LayoutStats,
    check_validity,
    critical_path,
    energy_estimate,
    simulate_layout,
    statistics,
    throughput,
)

__all__ = [
    "ClockingScheme", "available_schemes", "clock_number", "scheme_from_name",
    "Direction", "GateLayout", "Layer", "LayoutError", "WireSegment",
    "LogicNetwork", "NetworkBuilder", "Op", "network_stats", "simulate", "substitute_fanouts",
    "parse_verilog", "read_verilog", "to_verilog",
    "LayoutStats", "check_validity", "critical_path", "energy_estimate", "simulate_layout",
    "statistics", "throughput",
]
