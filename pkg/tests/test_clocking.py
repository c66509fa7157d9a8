from __future__ import annotations

import json

import pytest

from fcnlayout.clocking import (
    ClockingScheme,
    UnknownSchemeError,
    available_schemes,
    clock_number,
    load_schemes,
    regular_scheme,
    scheme_from_name,
)


def test_registry_contents():
    assert set(available_schemes()) >= {"2ddwave3", "2ddwave4", "use", "res", "bancs", "open3", "open4"}
    assert scheme_from_name("USE").name == "use"
    with pytest.raises(UnknownSchemeError):
        scheme_from_name("nope")


@pytest.mark.parametrize("name", ["2ddwave3", "2ddwave4", "use", "res", "bancs"])
def test_regular_schemes_tile_periodically(name):
    s = scheme_from_name(name)
    rows, cols = s.shape
    for x in range(3 * cols):
        for y in range(3 * rows):
            z = clock_number(s, x, y)
            assert 0 <= z < s.phases
            assert z == clock_number(s, x + cols, y) == clock_number(s, x, y + rows)


@pytest.mark.parametrize("name", ["2ddwave3", "2ddwave4", "use", "res", "bancs"])
def test_every_tile_has_an_outgoing_hop(name):
    # information must be able to leave any tile of a usable scheme
    s = scheme_from_name(name)
    rows, cols = s.shape
    for x in range(cols, 2 * cols):
        for y in range(rows, 2 * rows):
            z = clock_number(s, x, y)
            nbs = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
            assert any(clock_number(s, *n) == (z + 1) % s.phases for n in nbs)


def test_2ddwave_is_diagonal():
    s = scheme_from_name("2ddwave4")
    assert all(clock_number(s, x, y) == (x + y) % 4 for x in range(8) for y in range(8))


def test_open_schemes_have_no_fixed_zones():
    s = scheme_from_name("open4")
    assert not s.regular and s.clock_number(3, 3) is None


def test_validation():
    with pytest.raises(ValueError):
        ClockingScheme("bad", 4, ((0, 1), (2,)))
    with pytest.raises(ValueError):
        regular_scheme("bad", [[0, 5]])


def test_load_custom_scheme(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"schemes": [{"name": "row", "phases": 2, "cutout": [[0, 1]]}]}))
    schemes = load_schemes(path)
    assert schemes["row"].clock_number(3, 7) == 1
