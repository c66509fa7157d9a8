from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fcnlayout import read_verilog, substitute_fanouts  # noqa: E402


@pytest.fixture(scope="session")
def c17_path() -> Path:
    return Path(str(resources.files("fcnlayout.benchmarks") / "c17.v"))


@pytest.fixture(scope="session")
def c17(c17_path):
    return read_verilog(c17_path)


@pytest.fixture(scope="session")
def c17_sub(c17):
    return substitute_fanouts(c17)


# PASS/FAIL lines collected by test_acceptance.py, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
