"""Reader and writer for the ``.qcut`` circuit text format.

The format is a small OPENQASM-2-like dialect::

    qreg q[3];
    creg c[3];
    h q[0];
    rz(pi/4) q[1];
    cx q[0],q[1];
    cut q[1]; // id=0
    measure q[0] -> c[0];
    reset q[2];
    prepare(plus) q[2];
    u1q(re00,im00,re01,im01,re10,im10,re11,im11) q[2];
    barrier q[0],q[1];

Mid-circuit ``measure``, ``reset`` and ``prepare`` are native.  Unknown
statements are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import (
    GATE_NAMES,
    ONE_QUBIT_GATES,
    PREPARE_STATES,
    Barrier,
    Circuit,
    CircuitError,
    CutMarker,
    Gate,
    Measure,
    Prepare,
    Reset,
)


class ProgramError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ProgramSyntaxError(ProgramError):
    pass


class ProgramSemanticError(ProgramError):
    pass


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<comment>//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<punct>[;,\[\]()*/+\-])
  | (?P<newline>\n)
  | (?P<space>[ \t\r\f\v]+)
    """,
    re.VERBOSE,
)

_CUT_ID_RE = re.compile(r"^//\s*id\s*=\s*(\d+)\s*$")


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ProgramSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind != "space":
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.ops: list = []
        # (op position, explicit id or None, token) for each cut statement
        self.cuts: list[tuple[int, int | None, _Tok]] = []

    # token helpers
    def peek(self, skip_comments: bool = True) -> _Tok:
        j = self.i
        while skip_comments and self.toks[j].kind == "comment":
            j += 1
        return self.toks[j]

    def next(self) -> _Tok:
        while self.toks[self.i].kind == "comment":
            self.i += 1
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            shown = tok.text or "end of input"
            raise ProgramSyntaxError(f"expected {text!r}, found {shown!r}", tok.line, tok.col)
        return tok

    def expect_kind(self, kind: str, what: str) -> _Tok:
        tok = self.next()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ProgramSyntaxError(f"expected {what}, found {shown!r}", tok.line, tok.col)
        return tok

    def integer(self) -> int:
        tok = self.expect_kind("number", "integer")
        if not tok.text.isdigit():
            raise ProgramSyntaxError(f"expected integer, found {tok.text!r}", tok.line, tok.col)
        return int(tok.text)

    # expressions: sums and products of decimal literals and pi
    def expr(self) -> float:
        value = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.peek().text in ("*", "/"):
            tok = self.next()
            rhs = self.factor()
            if tok.text == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise ProgramSemanticError("division by zero", tok.line, tok.col)
                value /= rhs
        return value

    def factor(self) -> float:
        tok = self.next()
        if tok.text in ("-", "+"):
            v = self.factor()
            return -v if tok.text == "-" else v
        if tok.kind == "number":
            return float(tok.text)
        if tok.text == "pi":
            return math.pi
        if tok.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        shown = tok.text or "end of input"
        raise ProgramSyntaxError(f"expected angle expression, found {shown!r}", tok.line, tok.col)

    def args(self) -> list[float]:
        self.expect("(")
        vals = [self.expr()]
        while self.peek().text == ",":
            self.next()
            vals.append(self.expr())
        self.expect(")")
        return vals

    def reg_index(self, kind: str) -> int:
        name_tok = self.expect_kind("ident", f"{kind} register")
        reg = self.qreg if kind == "quantum" else self.creg
        if reg is None or reg[0] != name_tok.text:
            raise ProgramSemanticError(
                f"undeclared register {name_tok.text!r}", name_tok.line, name_tok.col
            )
        self.expect("[")
        idx_tok = self.peek()
        idx = self.integer()
        self.expect("]")
        if idx >= reg[1]:
            what = "qubit" if kind == "quantum" else "classical bit"
            raise ProgramSemanticError(f"{what} index out of range", idx_tok.line, idx_tok.col)
        return idx

    def qubit_list(self) -> list[int]:
        qs = [self.reg_index("quantum")]
        while self.peek().text == ",":
            self.next()
            qs.append(self.reg_index("quantum"))
        return qs

    def end_statement(self) -> _Tok:
        return self.expect(";")

    def declare(self, tok: _Tok):
        name = self.expect_kind("ident", "register name").text
        self.expect("[")
        size_tok = self.peek()
        size = self.integer()
        self.expect("]")
        self.end_statement()
        if tok.text == "qreg":
            if self.qreg is not None:
                raise ProgramSemanticError("only one qreg is allowed", tok.line, tok.col)
            if size < 1:
                raise ProgramSemanticError("qreg size must be positive", size_tok.line, size_tok.col)
            self.qreg = (name, size)
        else:
            if self.creg is not None:
                raise ProgramSemanticError("only one creg is allowed", tok.line, tok.col)
            if self.qreg is not None and name == self.qreg[0]:
                raise ProgramSemanticError("register name already used", tok.line, tok.col)
            self.creg = (name, size)

    def statement(self):
        tok = self.next()
        if tok.kind != "ident":
            shown = tok.text or "end of input"
            raise ProgramSyntaxError(f"expected statement, found {shown!r}", tok.line, tok.col)
        word = tok.text
        if word in ("qreg", "creg"):
            self.declare(tok)
            return
        if self.qreg is None:
            raise ProgramSemanticError("statement before qreg declaration", tok.line, tok.col)
        try:
            if word == "measure":
                q = self.reg_index("quantum")
                self.expect_kind("arrow", "'->'")
                c = self.reg_index("classical")
                self.end_statement()
                self.ops.append(Measure(q, c))
            elif word == "reset":
                q = self.reg_index("quantum")
                self.end_statement()
                self.ops.append(Reset(q))
            elif word == "prepare":
                self.expect("(")
                st = self.expect_kind("ident", "preparation state")
                self.expect(")")
                if st.text not in PREPARE_STATES:
                    raise ProgramSemanticError(
                        f"unknown preparation state {st.text!r}", st.line, st.col
                    )
                q = self.reg_index("quantum")
                self.end_statement()
                self.ops.append(Prepare(q, st.text))
            elif word == "cut":
                q = self.reg_index("quantum")
                semi = self.end_statement()
                explicit = None
                after = self.peek(skip_comments=False)
                if after.kind == "comment" and after.line == semi.line:
                    m = _CUT_ID_RE.match(after.text)
                    if m:
                        explicit = int(m.group(1))
                self.cuts.append((len(self.ops), explicit, tok))
                self.ops.append(CutMarker(-1, q))
            elif word == "barrier":
                qs = self.qubit_list()
                self.end_statement()
                self.ops.append(Barrier(tuple(qs)))
            elif word in GATE_NAMES:
                params: list[float] = []
                if self.peek().text == "(":
                    params = self.args()
                qs = self.qubit_list()
                self.end_statement()
                if word == "u1q":
                    if len(params) != 8:
                        raise ProgramSemanticError(
                            "u1q takes 8 real arguments", tok.line, tok.col
                        )
                    vals = [complex(params[2 * k], params[2 * k + 1]) for k in range(4)]
                    if len(qs) != 1:
                        raise ProgramSemanticError("u1q acts on 1 qubit", tok.line, tok.col)
                    self.ops.append(Gate.u1q([[vals[0], vals[1]], [vals[2], vals[3]]], qs[0]))
                else:
                    self.ops.append(Gate(word, tuple(qs), tuple(params)))
            else:
                raise ProgramSyntaxError(f"unknown statement {word!r}", tok.line, tok.col)
        except CircuitError as exc:
            raise ProgramSemanticError(str(exc), tok.line, tok.col) from None

    def parse(self) -> Circuit:
        while self.peek().kind != "eof":
            self.statement()
        if self.qreg is None:
            eof = self.peek()
            raise ProgramSemanticError("missing qreg declaration", eof.line, eof.col)
        used: set[int] = set()
        for _, explicit, tok in self.cuts:
            if explicit is not None:
                if explicit in used:
                    raise ProgramSemanticError(f"duplicate cut id {explicit}", tok.line, tok.col)
                used.add(explicit)
        fresh = 0
        for pos, explicit, _ in self.cuts:
            if explicit is None:
                while fresh in used:
                    fresh += 1
                explicit = fresh
                used.add(fresh)
            self.ops[pos] = CutMarker(explicit, self.ops[pos].qubit)
        nclbits = self.creg[1] if self.creg else 0
        return Circuit(self.qreg[1], nclbits, tuple(self.ops))


def parse_program(text: str) -> Circuit:
    """Parse ``.qcut`` source into a :class:`Circuit`.

    Raises:
        ProgramSyntaxError: malformed input, with line and column.
        ProgramSemanticError: undeclared register, index out of range,
            duplicate cut id, or an operation violating circuit invariants.
    """
    parser = _Parser(text)
    try:
        return parser.parse()
    except RecursionError:
        tok = parser.toks[min(parser.i, len(parser.toks) - 1)]
        raise ProgramSyntaxError("expression nested too deeply", tok.line, tok.col) from None


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_program(circuit: Circuit, qreg: str = "q", creg: str = "c") -> str:
    lines = [f"qreg {qreg}[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg {creg}[{circuit.num_clbits}];")
    for op in circuit.ops:
        if isinstance(op, Gate):
            qs = ",".join(f"{qreg}[{q}]" for q in op.qubits)
            if op.name == "u1q":
                flat = [z for row in op.matrix for z in row]
                args = ",".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in flat)
                lines.append(f"u1q({args}) {qs};")
            elif ONE_QUBIT_GATES.get(op.name):
                args = ",".join(_fmt(p) for p in op.params)
                lines.append(f"{op.name}({args}) {qs};")
            else:
                lines.append(f"{op.name} {qs};")
        elif isinstance(op, Measure):
            lines.append(f"measure {qreg}[{op.qubit}] -> {creg}[{op.clbit}];")
        elif isinstance(op, Reset):
            lines.append(f"reset {qreg}[{op.qubit}];")
        elif isinstance(op, Prepare):
            lines.append(f"prepare({op.state}) {qreg}[{op.qubit}];")
        elif isinstance(op, CutMarker):
            lines.append(f"cut {qreg}[{op.qubit}]; // id={op.cut_id}")
        elif isinstance(op, Barrier):
            lines.append("barrier " + ",".join(f"{qreg}[{q}]" for q in op.qubits) + ";")
        else:  # pragma: no cover
            raise TypeError(f"cannot emit {op!r}")
    return "\n".join(lines) + "\n"


def read_program(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def write_program(circuit: Circuit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_program(circuit))
