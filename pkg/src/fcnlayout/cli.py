"""Store-based command shell: ``fcnlayout -f script``, ``-c "cmd; cmd"`` or interactive."""
from __future__ import annotations

import argparse
import json
import os
import shlex
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Generic, Optional, TextIO, TypeVar

from .analysis import statistics
from .clocking import UnknownSchemeError, load_schemes, register_scheme, scheme_from_name
from .exact import ExactError, ExactParams, Status, exact_layout
from .layout import GateLayout
from .network import LogicNetwork, NetworkError, network_stats, substitute_fanouts
from .ortho import OrthoError, ortho_layout
from .qca import write_qca
from .svg import write_svg
from .techmap import CellLayout, LibraryError, apply_library, load_library
from .verilog import VerilogError, read_verilog

T = TypeVar("T")
VIEWER_ENV = "FCNLAYOUT_SVG_VIEWER"


class CommandError(Exception):
    pass


class UsageError(CommandError):
    pass


@dataclass
class Store(Generic[T]):
    label: str
    items: list[T] = field(default_factory=list)
    current: int = -1

    def extend(self, item: T) -> None:
        self.items.append(item)
        self.current = len(self.items) - 1

    def get(self) -> T:
        if not self.items:
            raise CommandError(f"no {self.label} in store")
        return self.items[self.current]

    def select(self, index: int) -> None:
        if not 0 <= index < len(self.items):
            raise CommandError(f"{self.label} store has no entry {index}")
        self.current = index

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class StoreSet:
    networks: Store[LogicNetwork] = field(default_factory=lambda: Store("network"))
    gate_layouts: Store[GateLayout] = field(default_factory=lambda: Store("gate layout"))
    cell_layouts: Store[CellLayout] = field(default_factory=lambda: Store("cell layout"))


@dataclass
class RunLog:
    commands: list[dict] = field(default_factory=list)

    def record(self, cmd: str, name: Optional[str], stats: Optional[dict], runtime: float) -> None:
        self.commands.append({"cmd": cmd, "name": name, "stats": stats, "runtime_s": round(runtime, 6)})

    def to_json(self) -> str:
        return json.dumps({"commands": self.commands}, indent=2)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if message:
            raise UsageError(message.strip())
        raise UsageError(f"{self.prog}: help requested")


def _parser(prog: str) -> _Parser:
    return _Parser(prog=prog, add_help=False)


class Shell:
    def __init__(self, out: TextIO = sys.stdout, log: Optional[RunLog] = None, workdir: str | Path = "."):
        self.stores = StoreSet()
        self.log = log if log is not None else RunLog()
        self.out = out
        self.workdir = Path(workdir)
        self._written: set[Path] = set()
        self._source: dict[int, str] = {}
        self.commands: dict[str, Callable[[list[str]], tuple[Optional[str], Optional[dict]]]] = {
            "read": self._read,
            "exact": self._exact,
            "ortho": self._ortho,
            "cell": self._cell,
            "qca": self._qca,
            "show": self._show,
            "svg": self._show,
            "ps": self._ps,
            "store": self._store,
            "current": self._current,
            "clocking": self._clocking,
            "help": self._help,
        }

    def _print(self, text: str) -> None:
        print(text, file=self.out)

    def execute(self, line: str) -> None:
        line = line.strip()
        if not line or line.startswith("#"):
            return
        try:
            argv = shlex.split(line)
        except ValueError as err:
            raise UsageError(str(err)) from None
        name, args = argv[0], argv[1:]
        if name not in self.commands:
            raise CommandError(f"unknown command {name!r}")
        start = time.perf_counter()
        item, stats = self.commands[name](args)
        self.log.record(line, item, stats, time.perf_counter() - start)

    # -- commands ---------------------------------------------------------------
    def _read(self, args):
        p = _parser("read")
        p.add_argument("file")
        ns = p.parse_args(args)
        path = self.workdir / ns.file
        try:
            net = read_verilog(path)
        except FileNotFoundError:
            raise CommandError(f"cannot open {ns.file}") from None
        except (VerilogError, NetworkError) as err:
            raise CommandError(str(err)) from None
        self.stores.networks.extend(net)
        self._source[id(net)] = Path(ns.file).stem
        return net.name, None

    def _layout_source(self) -> LogicNetwork:
        return substitute_fanouts(self.stores.networks.get())

    def _exact(self, args):
        p = _parser("exact")
        p.add_argument("-i", "--io", action="store_true")
        p.add_argument("-x", "--crossings", action="store_true")
        p.add_argument("-b", "--border", action="store_true")
        p.add_argument("-p", "--desync", action="store_true")
        p.add_argument("-s", "--scheme", default="open4")
        p.add_argument("--timeout", type=float)
        p.add_argument("--total-timeout", type=float)
        p.add_argument("--wire-limit", type=int)
        p.add_argument("--latches", action="store_true")
        p.add_argument("--upper-bound", type=int)
        p.add_argument("--threads", type=int, default=1)
        ns = p.parse_args(args)
        net = self._layout_source()
        try:
            params = ExactParams(
                scheme=scheme_from_name(ns.scheme),
                crossings=ns.crossings,
                io_pins=ns.io or ns.border,
                border_io=ns.border,
                desync=ns.desync,
                latches=ns.latches,
                wire_limit=ns.wire_limit,
                timeout=ns.timeout,
                total_timeout=ns.total_timeout,
                upper_bound=ns.upper_bound,
                concurrent=ns.threads,
            )
            result = exact_layout(net, params)
        except (ExactError, UnknownSchemeError) as err:
            raise CommandError(str(err).strip('"')) from None
        if result.status is not Status.FOUND:
            raise CommandError(f"exact: no layout found ({result.status.value})")
        self._adopt(result.layout, net)
        return result.layout.name, None

    def _ortho(self, args):
        p = _parser("ortho")
        p.add_argument("--io", action="store_true")
        p.add_argument("--border", action="store_true")
        ns = p.parse_args(args)
        net = self._layout_source()
        try:
            lay = ortho_layout(net, border_io=ns.border)
        except OrthoError as err:
            raise CommandError(str(err)) from None
        self._adopt(lay, net)
        return lay.name, None

    def _adopt(self, lay: GateLayout, net: LogicNetwork) -> None:
        self._source[id(lay)] = self._source.get(id(self.stores.networks.get()), net.name)
        self.stores.gate_layouts.extend(lay)

    def _cell(self, args):
        p = _parser("cell")
        p.add_argument("--library", "-l", default="qca-one")
        ns = p.parse_args(args)
        lay = self.stores.gate_layouts.get()
        try:
            cells = apply_library(lay, load_library(ns.library))
        except LibraryError as err:
            raise CommandError(str(err)) from None
        self._source[id(cells)] = self._source.get(id(lay), lay.name)
        self.stores.cell_layouts.extend(cells)
        return cells.name, None

    def _output_path(self, given: Optional[str], stem: str, ext: str) -> Path:
        if given:
            path = self.workdir / given
        else:
            path = self.workdir / f"{stem}{ext}"
            k = 2
            while path in self._written:
                path = self.workdir / f"{stem}_{k}{ext}"
                k += 1
        self._written.add(path)
        return path

    def _qca(self, args):
        p = _parser("qca")
        p.add_argument("file", nargs="?")
        ns = p.parse_args(args)
        cells = self.stores.cell_layouts.get()
        path = self._output_path(ns.file, self._source.get(id(cells), cells.name), ".qca")
        try:
            write_qca(cells, path)
        except (OSError, ValueError) as err:
            raise CommandError(f"qca: {err}") from None
        return cells.name, None

    def _show(self, args):
        p = _parser("show")
        p.add_argument("file", nargs="?")
        p.add_argument("-c", "--cell", action="store_true")
        ns = p.parse_args(args)
        item = self.stores.cell_layouts.get() if ns.cell else self.stores.gate_layouts.get()
        path = self._output_path(ns.file, self._source.get(id(item), item.name), ".svg")
        try:
            write_svg(item, path)
        except OSError as err:
            raise CommandError(f"show: {err}") from None
        viewer = os.environ.get(VIEWER_ENV)
        if viewer:
            # never wait for the viewer
            subprocess.Popen([viewer, str(path)], stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        return item.name, None

    def _ps(self, args):
        p = _parser("ps")
        p.add_argument("-g", "--gates", action="store_true")
        p.add_argument("-n", "--network", action="store_true")
        ns = p.parse_args(args)
        if ns.network or not ns.gates:
            net = self.stores.networks.get()
            s = network_stats(net)
            self._print(f"{net.name}: " + ", ".join(f"{k}: {v}" for k, v in s.items()))
            if not ns.gates:
                return net.name, None
        lay = self.stores.gate_layouts.get()
        stats = statistics(lay)
        self._print(stats.line())
        return lay.name, stats.record()

    def _store(self, args):
        p = _parser("store")
        p.add_argument("-n", "--networks", action="store_true")
        p.add_argument("-g", "--gates", action="store_true")
        p.add_argument("-c", "--cells", action="store_true")
        ns = p.parse_args(args)
        chosen = [s for s, on in ((self.stores.networks, ns.networks), (self.stores.gate_layouts, ns.gates),
                                  (self.stores.cell_layouts, ns.cells)) if on]
        for store in chosen or [self.stores.networks, self.stores.gate_layouts, self.stores.cell_layouts]:
            self._print(f"{store.label} store:")
            for i, item in enumerate(store.items):
                mark = "*" if i == store.current else " "
                self._print(f" {mark}{i}: {item!r}")
        return None, None

    def _current(self, args):
        p = _parser("current")
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("-n", "--networks", action="store_true")
        group.add_argument("-g", "--gates", action="store_true")
        group.add_argument("-c", "--cells", action="store_true")
        p.add_argument("index", type=int)
        ns = p.parse_args(args)
        store = (self.stores.networks if ns.networks else
                 self.stores.gate_layouts if ns.gates else self.stores.cell_layouts)
        store.select(ns.index)
        return None, None

    def _clocking(self, args):
        p = _parser("clocking")
        p.add_argument("file")
        ns = p.parse_args(args)
        try:
            for scheme in load_schemes(self.workdir / ns.file).values():
                register_scheme(scheme)
        except (OSError, ValueError, KeyError) as err:
            raise CommandError(f"clocking: {err}") from None
        return None, None

    def _help(self, args):
        self._print("commands: " + ", ".join(sorted(self.commands)))
        return None, None


def run_lines(shell: Shell, lines: list[str], err: TextIO = sys.stderr) -> int:
    for lineno, line in enumerate(lines, 1):
        try:
            shell.execute(line)
        except CommandError as exc:
            print(f"error in command {lineno} ({line.strip()}): {exc}", file=err)
            return 1
    return 0


def run_script(path, shell: Optional[Shell] = None, err: TextIO = sys.stderr) -> int:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read script {path}: {exc}", file=err)
        return 1
    shell = shell or Shell()
    return run_lines(shell, text.splitlines(), err)


def run_inline(commands: str, shell: Optional[Shell] = None, err: TextIO = sys.stderr) -> int:
    shell = shell or Shell()
    return run_lines(shell, commands.split(";"), err)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="fcnlayout", description=__doc__)
    src = parser.add_mutually_exclusive_group()
    src.add_argument("-f", "--file", help="script with one command per line")
    src.add_argument("-c", "--commands", help="semicolon-separated commands")
    parser.add_argument("-l", "--log", help="write a JSON run log on exit")
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    shell = Shell()
    if ns.file:
        status = run_script(ns.file, shell)
    elif ns.commands is not None:
        status = run_inline(ns.commands, shell)
    else:
        status = _interactive(shell)
    if ns.log:
        shell.log.write(ns.log)
    return status


def _interactive(shell: Shell) -> int:
    tty = sys.stdin.isatty()
    while True:
        if tty:
            print("fcn> ", end="", flush=True)
        line = sys.stdin.readline()
        if not line or line.strip() in ("quit", "exit"):
            return 0
        try:
            shell.execute(line)
        except CommandError as exc:
            print(f"error: {exc}", file=sys.stderr)
            if not tty:
                return 1


if __name__ == "__main__":
    sys.exit(main())
