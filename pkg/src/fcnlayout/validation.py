"""Input checks shared by the engines and the estimator wrappers."""
from __future__ import annotations

from .analysis import InvalidLayoutError, check_validity
from .layout import GateLayout
from .network import LogicNetwork


def check_network(net, *, fanout_substituted: bool = False, max_in_degree: int | None = None) -> LogicNetwork:
    if not isinstance(net, LogicNetwork):
        raise TypeError(f"expected a LogicNetwork, got {type(net).__name__}")
    if fanout_substituted and not net.is_fanout_substituted():
        raise ValueError(f"network {net.name!r} is not fan-out substituted")
    if max_in_degree is not None and net.max_degree()[0] > max_in_degree:
        raise ValueError(f"network {net.name!r} has a vertex with more than {max_in_degree} fan-ins")
    return net


def check_layout(layout, *, valid: bool = True) -> GateLayout:
    if not isinstance(layout, GateLayout):
        raise TypeError(f"expected a GateLayout, got {type(layout).__name__}")
    if valid:
        violations = check_validity(layout)
        if violations:
            raise InvalidLayoutError(violations)
    return layout
