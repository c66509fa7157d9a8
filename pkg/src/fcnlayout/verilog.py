"""Reader and writer for the structural Verilog subset emitted by logic synthesizers.

Accepted: a single module with input/output/wire declarations and ``assign``
statements over ``~ & ^ |``, parentheses and the constants ``1'b0``/``1'b1``.
Each operator occurrence becomes one vertex, numbered in textual order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .network import CombinationalCycleError, LogicNetwork, NetworkError, Op, Vertex


class VerilogError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class VerilogSyntaxError(VerilogError):
    pass


class UnsupportedConstructError(VerilogError):
    pass


class UndeclaredIdentifierError(VerilogError):
    pass


class VerilogCycleError(VerilogError):
    pass


UNSUPPORTED_KEYWORDS = {
    "always", "initial", "reg", "integer", "parameter", "localparam", "generate",
    "function", "task", "begin", "end", "if", "else", "case", "posedge", "negedge",
    "and", "or", "not", "nand", "nor", "xor", "xnor", "buf", "supply0", "supply1",
    "inout", "tri", "assert",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<const>1'[bB][01])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*|\\\S+)
  | (?P<punct>[()\[\];,=~&|^:])
  | (?P<other>\S)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise VerilogSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# expression AST: ("ref", name, tok) | ("const", bit, tok) | ("not", child, tok) | (op, lhs, rhs, tok)
_BINARY_LEVELS = [("|", Op.OR), ("^", Op.XOR), ("&", Op.AND)]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text:
            found = t.text or "end of input"
            raise VerilogSyntaxError(f"expected {text!r}, found {found!r}", t.line, t.column)
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            found = t.text or "end of input"
            raise VerilogSyntaxError(f"expected identifier, found {found!r}", t.line, t.column)
        if t.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(f"unsupported construct {t.text!r}", t.line, t.column)
        return self.advance()

    def check_supported(self) -> None:
        t = self.tok
        if t.kind == "ident" and t.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(f"unsupported construct {t.text!r}", t.line, t.column)
        if t.text in ("[", ":"):
            raise UnsupportedConstructError("vector ranges are not supported", t.line, t.column)

    def name_list(self) -> list[Token]:
        self.check_supported()
        names = [self.ident()]
        while self.tok.text == ",":
            self.advance()
            # ANSI headers may repeat the direction keyword after a comma
            if self.tok.text in ("input", "output"):
                break
            self.check_supported()
            names.append(self.ident())
        return names

    def expression(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        symbol, op = _BINARY_LEVELS[level]
        node = self.expression(level + 1)
        while self.tok.text == symbol:
            t = self.advance()
            rhs = self.expression(level + 1)
            node = (op, node, rhs, t)
        return node

    def unary(self):
        t = self.tok
        if t.text == "~":
            self.advance()
            return ("not", self.unary(), t)
        if t.text == "(":
            self.advance()
            node = self.expression()
            self.expect(")")
            return node
        if t.kind == "const":
            self.advance()
            return ("const", int(t.text[-1]), t)
        if t.kind == "ident":
            self.check_supported()
            self.advance()
            return ("ref", t.text, t)
        found = t.text or "end of input"
        raise VerilogSyntaxError(f"expected operand, found {found!r}", t.line, t.column)


def parse_verilog(text: str) -> LogicNetwork:
    """Parse a structural Verilog module into a :class:`LogicNetwork`.

    PIs come first (declaration order), then one vertex per operator or
    constant occurrence in textual order, then POs (declaration order).
    """
    p = _Parser(tokenize(text))
    if p.tok.text != "module":
        p.check_supported()
        raise VerilogSyntaxError("expected 'module'", p.tok.line, p.tok.column)
    p.advance()
    module_name = p.ident().text

    inputs: list[Token] = []
    outputs: list[Token] = []
    wires: list[Token] = []
    header_ports: list[Token] = []

    if p.tok.text == "(":
        p.advance()
        while p.tok.text != ")":
            if p.tok.text in ("input", "output"):
                direction = p.advance().text
                if p.tok.text == "wire":
                    p.advance()
                target = inputs if direction == "input" else outputs
                names = p.name_list()
                target.extend(names)
                header_ports.extend(names)
            else:
                header_ports.extend(p.name_list())
            if p.tok.text in (";", ","):
                p.advance()
            elif p.tok.text not in (")", "input", "output"):
                raise VerilogSyntaxError(f"unexpected {p.tok.text!r} in port list", p.tok.line, p.tok.column)
        p.expect(")")
    p.expect(";")

    assigns: list[tuple[Token, tuple]] = []
    while p.tok.text != "endmodule":
        t = p.tok
        if t.kind == "eof":
            raise VerilogSyntaxError("missing 'endmodule'", t.line, t.column)
        if t.text in ("input", "output", "wire"):
            p.advance()
            if t.text != "wire" and p.tok.text == "wire":
                p.advance()
            names = p.name_list()
            {"input": inputs, "output": outputs, "wire": wires}[t.text].extend(names)
            p.expect(";")
        elif t.text == "assign":
            p.advance()
            lhs = p.ident()
            p.expect("=")
            rhs = p.expression()
            assigns.append((lhs, rhs))
            while p.tok.text == ",":
                p.advance()
                lhs = p.ident()
                p.expect("=")
                assigns.append((lhs, p.expression()))
            p.expect(";")
        else:
            p.check_supported()
            raise VerilogSyntaxError(f"unexpected {t.text!r}", t.line, t.column)
    p.advance()
    if p.tok.kind != "eof":
        raise VerilogSyntaxError("only a single module is supported", p.tok.line, p.tok.column)

    return _build_network(module_name, inputs, outputs, wires, assigns, header_ports)


def _build_network(module_name, inputs, outputs, wires, assigns, header_ports) -> LogicNetwork:
    declared: dict[str, str] = {}
    for kind, toks in (("input", inputs), ("output", outputs), ("wire", wires)):
        for t in toks:
            prev = declared.get(t.text)
            # "output y; wire y;" is legal Verilog
            if prev is not None and not (kind == "wire" and prev == "output"):
                raise VerilogSyntaxError(f"{t.text!r} declared twice", t.line, t.column)
            declared.setdefault(t.text, kind)
    for t in header_ports:
        if declared.get(t.text) not in ("input", "output"):
            raise UndeclaredIdentifierError(f"port {t.text!r} has no direction", t.line, t.column)

    drivers: dict[str, tuple] = {}
    for lhs, rhs in assigns:
        kind = declared.get(lhs.text)
        if kind is None:
            raise UndeclaredIdentifierError(f"undeclared identifier {lhs.text!r}", lhs.line, lhs.column)
        if kind == "input":
            raise VerilogSyntaxError(f"assignment to input {lhs.text!r}", lhs.line, lhs.column)
        if lhs.text in drivers:
            raise VerilogSyntaxError(f"{lhs.text!r} assigned twice", lhs.line, lhs.column)
        drivers[lhs.text] = rhs

    vertices: list[list] = []  # [op, label, fanin refs]

    def add(op: Op, label: str = "", fanins=()) -> int:
        vertices.append([op, label, list(fanins)])
        return len(vertices) - 1

    signal_vertex: dict[str, int] = {}
    for t in inputs:
        signal_vertex[t.text] = add(Op.PI, t.text)

    # operator vertices first, references patched once every driver has an id
    pending_refs: list[tuple[int, int, tuple]] = []
    aliases: dict[str, tuple] = {}

    def lower(node) -> object:
        kind = node[0]
        if kind == "ref":
            return node
        if kind == "const":
            return add(Op.CONST1 if node[1] else Op.CONST0)
        if kind == "not":
            child = lower(node[1])
            vid = add(Op.NOT, fanins=[None])
            _attach(vid, 0, child)
            return vid
        lhs, rhs = lower(node[1]), lower(node[2])
        vid = add(kind, fanins=[None, None])
        _attach(vid, 0, lhs)
        _attach(vid, 1, rhs)
        return vid

    def _attach(vid: int, port: int, child) -> None:
        if isinstance(child, int):
            vertices[vid][2][port] = child
        else:
            pending_refs.append((vid, port, child))

    for lhs, rhs in assigns:
        lowered = lower(rhs)
        if isinstance(lowered, int):
            signal_vertex[lhs.text] = lowered
        else:
            aliases[lhs.text] = lowered

    def resolve(name: str, tok: Token, trail: tuple[str, ...] = ()) -> int:
        if name in signal_vertex:
            return signal_vertex[name]
        if name not in declared:
            raise UndeclaredIdentifierError(f"undeclared identifier {name!r}", tok.line, tok.column)
        if name in trail:
            raise VerilogCycleError(f"combinational cycle through {' -> '.join(trail + (name,))}", tok.line, tok.column)
        if name not in aliases:
            raise VerilogError(f"signal {name!r} is never driven", tok.line, tok.column)
        ref = aliases[name]
        vid = resolve(ref[1], ref[2], trail + (name,))
        signal_vertex[name] = vid
        return vid

    for vid, port, ref in pending_refs:
        vertices[vid][2][port] = resolve(ref[1], ref[2])

    for t in outputs:
        add(Op.PO, t.text, [resolve(t.text, t)])

    try:
        net = LogicNetwork(
            (Vertex(i, op, label, tuple(fi)) for i, (op, label, fi) in enumerate(vertices)),
            module_name,
        )
    except CombinationalCycleError as exc:
        raise VerilogCycleError(str(exc)) from exc
    except NetworkError as exc:
        raise VerilogError(str(exc)) from exc
    return net


def read_verilog(path: str | Path) -> LogicNetwork:
    return parse_verilog(Path(path).read_text(encoding="utf-8"))


_INFIX = {Op.AND: "&", Op.OR: "|", Op.XOR: "^"}


def to_verilog(net: LogicNetwork) -> str:
    """Emit ``net`` in the same subset :func:`parse_verilog` accepts.

    Fan-out vertices are transparent; NAND/NOR/XNOR/MAJ are written as
    equivalent expressions over the basic operators.
    """
    names: dict[int, str] = {}
    for v in net.vertices:
        if v.op is Op.PI:
            names[v.id] = v.label
    internal = [v for v in net.vertices if v.op not in (Op.PI, Op.PO)]

    def ref(u: int) -> str:
        while net.vertices[u].op is Op.FANOUT:
            u = net.vertices[u].fanins[0]
        return names[u]

    for v in internal:
        if v.op is not Op.FANOUT:
            names[v.id] = f"n{v.id}"

    lines = [f"module {net.name}(" + ", ".join(net.pi_labels() + net.po_labels()) + ");"]
    if net.pis():
        lines.append("  input " + ", ".join(net.pi_labels()) + ";")
    if net.pos():
        lines.append("  output " + ", ".join(net.po_labels()) + ";")
    wire_names = [names[v.id] for v in internal if v.op is not Op.FANOUT]
    if wire_names:
        lines.append("  wire " + ", ".join(wire_names) + ";")
    for vid in net.topological_order():
        v = net.vertices[vid]
        if v.op in (Op.PI, Op.PO, Op.FANOUT):
            continue
        args = [ref(u) for u in v.fanins]
        if v.op in _INFIX:
            expr = f"{args[0]} {_INFIX[v.op]} {args[1]}"
        elif v.op is Op.NOT:
            expr = f"~{args[0]}"
        elif v.op is Op.CONST0:
            expr = "1'b0"
        elif v.op is Op.CONST1:
            expr = "1'b1"
        elif v.op is Op.NAND:
            expr = f"~({args[0]} & {args[1]})"
        elif v.op is Op.NOR:
            expr = f"~({args[0]} | {args[1]})"
        elif v.op is Op.XNOR:
            expr = f"~({args[0]} ^ {args[1]})"
        elif v.op is Op.MAJ:
            a, b, c = args
            expr = f"({a} & {b}) | ({a} & {c}) | ({b} & {c})"
        else:  # pragma: no cover
            raise ValueError(v.op)
        lines.append(f"  assign {names[v.id]} = {expr};")
    for po in net.pos():
        v = net.vertices[po]
        lines.append(f"  assign {v.label} = {ref(v.fanins[0])};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"
