"""scikit-learn style wrappers so the flow composes with ``Pipeline`` and ``get_params``.

Nothing is learned: ``fit`` validates its input and ``transform`` runs the
engine. Single objects and lists of objects are both accepted.
"""
from __future__ import annotations

from typing import Optional

from sklearn.base import BaseEstimator, TransformerMixin

from .clocking import scheme_from_name
from .exact import ExactParams, Status, exact_layout
from .network import substitute_fanouts
from .ortho import ortho_layout
from .techmap import apply_library, load_library
from .validation import check_layout, check_network


def _each(fn, X):
    if isinstance(X, (list, tuple)):
        return [fn(x) for x in X]
    return fn(X)


class FanoutSubstitution(TransformerMixin, BaseEstimator):
    def __init__(self, max_fanout: int = 2):
        self.max_fanout = max_fanout

    def fit(self, X, y=None):
        if self.max_fanout < 2:
            raise ValueError("max_fanout must be at least 2")
        _each(check_network, X)
        return self

    def transform(self, X):
        return _each(lambda n: substitute_fanouts(check_network(n), self.max_fanout), X)


class ExactLayout(TransformerMixin, BaseEstimator):
    """Area-minimal layouts; ``results_`` keeps the full search record of the last call."""

    def __init__(
        self,
        scheme: str = "open4",
        crossings: bool = False,
        io_pins: bool = False,
        border_io: bool = False,
        desync: bool = False,
        latches: bool = False,
        wire_limit: Optional[int] = None,
        timeout: Optional[float] = None,
        upper_bound: Optional[int] = None,
    ):
        self.scheme = scheme
        self.crossings = crossings
        self.io_pins = io_pins
        self.border_io = border_io
        self.desync = desync
        self.latches = latches
        self.wire_limit = wire_limit
        self.timeout = timeout
        self.upper_bound = upper_bound

    def _params(self) -> ExactParams:
        return ExactParams(
            scheme=scheme_from_name(self.scheme),
            crossings=self.crossings,
            io_pins=self.io_pins,
            border_io=self.border_io,
            desync=self.desync,
            latches=self.latches,
            wire_limit=self.wire_limit,
            timeout=self.timeout,
            upper_bound=self.upper_bound,
        )

    def fit(self, X, y=None):
        self._params()
        _each(lambda n: check_network(n, fanout_substituted=True), X)
        return self

    def transform(self, X):
        params = self._params()
        self.results_ = []

        def run(net):
            res = exact_layout(check_network(net, fanout_substituted=True), params)
            self.results_.append(res)
            if res.status is not Status.FOUND:
                raise RuntimeError(f"no layout for {net.name!r}: {res.status.value}")
            return res.layout

        return _each(run, X)


class OrthoLayout(TransformerMixin, BaseEstimator):
    def __init__(self, border_io: bool = False):
        self.border_io = border_io

    def fit(self, X, y=None):
        _each(lambda n: check_network(n, fanout_substituted=True, max_in_degree=2), X)
        return self

    def transform(self, X):
        return _each(lambda n: ortho_layout(check_network(n), border_io=self.border_io), X)


class TechnologyMapper(TransformerMixin, BaseEstimator):
    def __init__(self, library: str = "qca-one"):
        self.library = library

    def fit(self, X, y=None):
        self.library_ = load_library(self.library)
        _each(check_layout, X)
        return self

    def transform(self, X):
        lib = getattr(self, "library_", None) or load_library(self.library)
        return _each(lambda lay: apply_library(check_layout(lay), lib), X)
