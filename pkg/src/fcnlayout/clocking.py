"""Clocking schemes.

Regular schemes are a small cutout of clock numbers tiled over the whole
grid; irregular ("open") schemes leave the zone of every tile to the layout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence


class UnknownSchemeError(KeyError):
    pass


@dataclass(frozen=True)
class ClockingScheme:
    name: str
    phases: int
    cutout: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.phases < 2:
            raise ValueError("a clocking scheme needs at least 2 phases")
        if self.cutout is not None:
            if not self.cutout or not self.cutout[0]:
                raise ValueError("empty cutout")
            width = len(self.cutout[0])
            for row in self.cutout:
                if len(row) != width:
                    raise ValueError(f"ragged cutout in scheme {self.name!r}")
                for z in row:
                    if not 0 <= z < self.phases:
                        raise ValueError(f"clock number {z} outside [0, {self.phases})")

    @property
    def regular(self) -> bool:
        return self.cutout is not None

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, columns) of the cutout."""
        if self.cutout is None:
            return (0, 0)
        return len(self.cutout), len(self.cutout[0])

    def clock_number(self, x: int, y: int) -> Optional[int]:
        if self.cutout is None:
            return None
        rows, cols = self.shape
        return self.cutout[y % rows][x % cols]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "phases": self.phases,
            "cutout": [list(r) for r in self.cutout] if self.cutout is not None else None,
        }


def clock_number(scheme: ClockingScheme, x: int, y: int) -> Optional[int]:
    return scheme.clock_number(x, y)


def _scheme_from_entry(entry: dict) -> ClockingScheme:
    cutout = entry.get("cutout")
    return ClockingScheme(
        name=str(entry["name"]).lower(),
        phases=int(entry["phases"]),
        cutout=tuple(tuple(int(z) for z in row) for row in cutout) if cutout is not None else None,
    )


def load_schemes(path: str | Path) -> dict[str, ClockingScheme]:
    """Read a scheme table ``{"schemes": [{name, phases, cutout}, ...]}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return {s.name: s for s in map(_scheme_from_entry, data["schemes"])}


def _builtin() -> dict[str, ClockingScheme]:
    text = resources.files("fcnlayout.data").joinpath("clocking_schemes.json").read_text("utf-8")
    return {s.name: s for s in map(_scheme_from_entry, json.loads(text)["schemes"])}


_REGISTRY: dict[str, ClockingScheme] = _builtin()


def register_scheme(scheme: ClockingScheme) -> None:
    _REGISTRY[scheme.name.lower()] = scheme


def available_schemes() -> list[str]:
    return sorted(_REGISTRY)


def scheme_from_name(name: str) -> ClockingScheme:
    key = name.strip().lower()
    try:
        return _REGISTRY[key]
    except KeyError:
        raise UnknownSchemeError(
            f"unknown clocking scheme {name!r}; known: {', '.join(available_schemes())}"
        ) from None


def regular_scheme(name: str, cutout: Sequence[Sequence[int]], phases: int = 4) -> ClockingScheme:
    return ClockingScheme(name, phases, tuple(tuple(r) for r in cutout))
