from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cutbench.circuit import (
    Barrier,
    Circuit,
    CutMarker,
    Gate,
    Measure,
    Prepare,
    Reset,
    ghz_benchmark_circuit,
    random_unitary_1q,
)
from cutbench.program import (
    ProgramError,
    ProgramSemanticError,
    ProgramSyntaxError,
    emit_program,
    parse_program,
    read_program,
    write_program,
)


def test_parse_basic():
    c = parse_program("qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1];")
    assert c.num_qubits == 2 and c.num_clbits == 2
    assert c.ops == (Gate("h", (0,)), Gate("cx", (0, 1)))


def test_parse_cut_with_id():
    c = parse_program("qreg q[2];\nh q[0];\ncut q[1]; // id=0\ncx q[0],q[1];\n")
    assert c.ops[1] == CutMarker(0, 1)


def test_unlabeled_cuts_fill_free_ids():
    c = parse_program("qreg q[2]; cut q[0]; cut q[1]; // id=0\n")
    assert sorted(cp.cut_id for cp in c.cut_points()) == [0, 1]
    assert c.ops[1] == CutMarker(0, 1)


def test_duplicate_cut_id():
    with pytest.raises(ProgramSemanticError):
        parse_program("qreg q[2]; cut q[0]; // id=3\ncut q[1]; // id=3\n")


def test_index_out_of_range():
    with pytest.raises(ProgramSemanticError, match="qubit index out of range"):
        parse_program("qreg q[1]; h q[3];")
    with pytest.raises(ProgramSemanticError, match="classical bit index out of range"):
        parse_program("qreg q[1]; creg c[1]; measure q[0] -> c[4];")


def test_undeclared_register():
    with pytest.raises(ProgramSemanticError, match="undeclared register"):
        parse_program("qreg q[1]; h r[0];")


def test_syntax_error_position():
    with pytest.raises(ProgramSyntaxError) as info:
        parse_program("qreg q[2];\nh q[0]\ncx q[0],q[1];")
    assert info.value.line == 3


def test_unknown_statement_rejected():
    with pytest.raises(ProgramError):
        parse_program("qreg q[1]; t q[0];")


@pytest.mark.parametrize(
    "expr, value",
    [("pi/4", math.pi / 4), ("2*pi", 2 * math.pi), ("-pi/2", -math.pi / 2), ("0.5", 0.5), ("(1+2)*pi/3", math.pi)],
)
def test_angle_expressions(expr, value):
    c = parse_program(f"qreg q[1]; rz({expr}) q[0];")
    assert c.ops[0].params[0] == pytest.approx(value, abs=1e-15)


def test_mid_circuit_ops():
    src = "qreg q[1]; creg c[2]; h q[0]; measure q[0] -> c[0]; reset q[0]; prepare(plus) q[0]; measure q[0] -> c[1];"
    c = parse_program(src)
    assert c.ops[1:] == (Measure(0, 0), Reset(0), Prepare(0, "plus"), Measure(0, 1))


def test_emit_bell_and_prepare():
    bell = Circuit(2, 2, (Gate("h", (0,)), Gate("cx", (0, 1)), Measure(0, 0), Measure(1, 1)))
    text = emit_program(bell)
    lines = [ln.split()[0] for ln in text.splitlines()]
    assert lines.count("h") == 1 and lines.count("cx") == 1
    assert lines.index("h") < lines.index("cx")
    assert "prepare(plus) q[0];" in emit_program(Circuit(1, 0, (Prepare(0, "plus"),)))


def test_ghz_round_trip():
    c = ghz_benchmark_circuit(5, seed=7)
    assert parse_program(emit_program(c)) == c


def test_file_round_trip(tmp_path):
    c = ghz_benchmark_circuit(4, seed=2)
    path = tmp_path / "g.qcut"
    write_program(c, path)
    assert read_program(path) == c


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(0, 4))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    ops = []
    cut_id = 0
    for _ in range(draw(st.integers(0, 25))):
        kind = draw(st.sampled_from(["1q", "rot", "cx", "u1q", "measure", "reset", "prepare", "cut", "barrier"]))
        q = draw(st.integers(0, n - 1))
        if kind == "1q":
            ops.append(Gate(draw(st.sampled_from(["h", "x", "y", "z"])), (q,)))
        elif kind == "rot":
            angle = draw(st.floats(-10, 10, allow_nan=False))
            ops.append(Gate(draw(st.sampled_from(["rx", "ry", "rz"])), (q,), (angle,)))
        elif kind == "cx" and n > 1:
            r = draw(st.integers(0, n - 1).filter(lambda x: x != q))
            ops.append(Gate("cx", (q, r)))
        elif kind == "u1q":
            ops.append(Gate.u1q(random_unitary_1q(rng), q))
        elif kind == "measure" and m > 0:
            ops.append(Measure(q, draw(st.integers(0, m - 1))))
        elif kind == "reset":
            ops.append(Reset(q))
        elif kind == "prepare":
            ops.append(Prepare(q, draw(st.sampled_from(["zero", "one", "plus", "i_state"]))))
        elif kind == "cut":
            ops.append(CutMarker(cut_id, q))
            cut_id += draw(st.integers(1, 3))
        elif kind == "barrier":
            ops.append(Barrier(tuple(sorted(set(draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n)))))))
    return Circuit(n, m, tuple(ops))


@given(circuits())
def test_round_trip_property(c):
    assert parse_program(emit_program(c)) == c


_ALPHABET = st.sampled_from(list("qc[];,()->/*+-.0123456789 \nabcdehimnoprstuxyz=/") + [
    "qreg", "creg", "measure", "reset", "prepare", "cut", "pi", "//", "h", "cx", "rz", "u1q", "barrier"])


@given(st.lists(_ALPHABET, max_size=60).map("".join))
def test_parser_never_crashes(text):
    try:
        c = parse_program(text)
    except ProgramError:
        return
    assert isinstance(c, Circuit)


@given(st.text(max_size=200))
def test_parser_arbitrary_text(text):
    try:
        parse_program(text)
    except ProgramError:
        pass


def test_deep_parentheses_are_a_diagnostic():
    with pytest.raises(ProgramError):
        parse_program("qreg q[1]; rz(" + "(" * 5000 + "1" + ")" * 5000 + ") q[0];")
