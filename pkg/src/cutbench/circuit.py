"""Circuit intermediate representation and benchmark-circuit builders.

A :class:`Circuit` is an immutable, ordered list of operations acting on
``num_qubits`` wires and ``num_clbits`` classical bits.  Bitstrings produced
anywhere in the package put index 0 leftmost (``"10"`` means bit 0 is 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

ONE_QUBIT_GATES = {"h": 0, "x": 0, "y": 0, "z": 0, "rx": 1, "ry": 1, "rz": 1, "u1q": 0}
TWO_QUBIT_GATES = {"cx": 0}
GATE_NAMES = frozenset(ONE_QUBIT_GATES) | frozenset(TWO_QUBIT_GATES)

PREPARE_STATES = ("zero", "one", "plus", "i_state")

UNITARITY_TOL = 1e-10

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Unitaries taking |0> to each preparation state.
PREPARE_UNITARIES = {
    "zero": np.eye(2, dtype=complex),
    "one": _FIXED["x"],
    "plus": _FIXED["h"],
    "i_state": np.array([[1, 0], [0, 1j]], dtype=complex) @ _FIXED["h"],
}


class CircuitError(ValueError):
    """Raised when a circuit or operation violates the IR invariants."""


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def _as_matrix_tuple(matrix) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise CircuitError(f"u1q matrix must be 2x2, got shape {m.shape}")
    return ((complex(m[0, 0]), complex(m[0, 1])), (complex(m[1, 0]), complex(m[1, 1])))


def is_unitary(matrix: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    m = np.asarray(matrix, dtype=complex)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


@dataclass(frozen=True)
class Gate:
    """A unitary gate.  ``u1q`` carries an explicit 2x2 matrix instead of angles."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: tuple[tuple[complex, complex], tuple[complex, complex]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.name in ONE_QUBIT_GATES:
            arity, nparams = 1, ONE_QUBIT_GATES[self.name]
        elif self.name in TWO_QUBIT_GATES:
            arity, nparams = 2, TWO_QUBIT_GATES[self.name]
        else:
            raise CircuitError(f"unknown gate {self.name!r}")
        if len(self.qubits) != arity:
            raise CircuitError(f"gate {self.name} acts on {arity} qubit(s), got {len(self.qubits)}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise CircuitError(f"gate {self.name} needs two distinct qubits")
        if len(self.params) != nparams:
            raise CircuitError(f"gate {self.name} takes {nparams} angle(s), got {len(self.params)}")
        if not all(math.isfinite(p) for p in self.params):
            raise CircuitError(f"non-finite angle in {self.name}")
        if self.name == "u1q":
            if self.matrix is None:
                raise CircuitError("u1q requires a matrix")
            object.__setattr__(self, "matrix", _as_matrix_tuple(self.matrix))
            if not is_unitary(np.array(self.matrix)):
                raise CircuitError("u1q matrix is not unitary")
        elif self.matrix is not None:
            raise CircuitError(f"gate {self.name} does not take a matrix")

    @classmethod
    def u1q(cls, matrix, qubit: int) -> "Gate":
        return cls("u1q", (qubit,), matrix=_as_matrix_tuple(matrix))

    def unitary(self) -> np.ndarray:
        """Matrix of the gate; for ``cx`` the basis order is (control, target)."""
        if self.name in _FIXED:
            return _FIXED[self.name]
        if self.name == "rx":
            return rx_matrix(self.params[0])
        if self.name == "ry":
            return ry_matrix(self.params[0])
        if self.name == "rz":
            return rz_matrix(self.params[0])
        if self.name == "u1q":
            return np.array(self.matrix, dtype=complex)
        # cx
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )


@dataclass(frozen=True)
class Measure:
    qubit: int
    clbit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Reset:
    qubit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Prepare:
    """Reset a wire and initialise it in one of |0>, |1>, |+>, |i>."""

    qubit: int
    state: str

    def __post_init__(self):
        if self.state not in PREPARE_STATES:
            raise CircuitError(f"unknown preparation state {self.state!r}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class CutMarker:
    cut_id: int
    qubit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Barrier:
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


Operation = Union[Gate, Measure, Reset, Prepare, CutMarker, Barrier]


@dataclass(frozen=True)
class CutPoint:
    cut_id: int
    qubit: int
    op_index: int


@dataclass(frozen=True)
class Circuit:
    """Immutable circuit.  Construction validates every invariant."""

    num_qubits: int
    num_clbits: int = 0
    ops: tuple[Operation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        if self.num_clbits < 0:
            raise CircuitError("num_clbits must be nonnegative")
        seen_cuts = set()
        for op in self.ops:
            for q in op.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(f"qubit index {q} out of range")
            if isinstance(op, Measure) and not 0 <= op.clbit < self.num_clbits:
                raise CircuitError(f"classical bit index {op.clbit} out of range")
            if isinstance(op, CutMarker):
                if op.cut_id in seen_cuts:
                    raise CircuitError(f"duplicate cut id {op.cut_id}")
                seen_cuts.add(op.cut_id)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[Operation]:
        return iter(self.ops)

    def gates(self) -> list[Gate]:
        return [op for op in self.ops if isinstance(op, Gate)]

    def count_ops(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for op in self.ops:
            key = op.name if isinstance(op, Gate) else type(op).__name__.lower()
            counts[key] = counts.get(key, 0) + 1
        return counts

    def cut_points(self) -> list[CutPoint]:
        return [
            CutPoint(op.cut_id, op.qubit, i)
            for i, op in enumerate(self.ops)
            if isinstance(op, CutMarker)
        ]

    @property
    def num_cuts(self) -> int:
        return sum(isinstance(op, CutMarker) for op in self.ops)

    def without_cuts(self) -> "Circuit":
        return Circuit(
            self.num_qubits,
            self.num_clbits,
            tuple(op for op in self.ops if not isinstance(op, CutMarker)),
        )

    def with_ops(self, ops: Iterable[Operation]) -> "Circuit":
        return Circuit(self.num_qubits, self.num_clbits, tuple(ops))

    def measured_clbits(self) -> list[int]:
        return sorted({op.clbit for op in self.ops if isinstance(op, Measure)})


def insert_cut(circuit: Circuit, qubit: int, op_index: int) -> Circuit:
    """Return a copy of ``circuit`` with a fresh cut marker before ``ops[op_index]``.

    ``op_index == len(circuit)`` places the cut after the last operation.
    Whether the cut yields a valid fragmentation is checked by
    :func:`cutbench.wirecut.fragment`.
    """
    if not 0 <= qubit < circuit.num_qubits:
        raise CircuitError(f"qubit index {qubit} out of range")
    if not 0 <= op_index <= len(circuit.ops):
        raise CircuitError(f"cut position {op_index} outside 0..{len(circuit.ops)}")
    ids = [cp.cut_id for cp in circuit.cut_points()]
    new_id = max(ids) + 1 if ids else 0
    ops = list(circuit.ops)
    ops.insert(op_index, CutMarker(new_id, qubit))
    return circuit.with_ops(ops)


def measure_all(num_qubits: int) -> list[Measure]:
    return [Measure(q, q) for q in range(num_qubits)]


def ghz_benchmark_circuit(n: int, seed: int | None = 0, zero_angles: bool = False) -> Circuit:
    """GHZ cascade with random RZ/RY rotations on each CNOT target, before and after.

    Angles are uniform on [0, 2pi) and drawn from ``seed`` in gate order.
    ``zero_angles`` keeps the gate layout but sets every angle to 0, which
    produces the plain GHZ state.
    """
    if n < 2:
        raise CircuitError("GHZ benchmark needs at least 2 qubits")
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2 * math.pi, size=(n - 1, 4))
    if zero_angles:
        angles[:] = 0.0
    ops: list[Operation] = [Gate("h", (0,))]
    for i in range(n - 1):
        t = i + 1
        a = angles[i]
        ops += [Gate("rz", (t,), (a[0],)), Gate("ry", (t,), (a[1],))]
        ops.append(Gate("cx", (i, t)))
        ops += [Gate("rz", (t,), (a[2],)), Gate("ry", (t,), (a[3],))]
    ops += measure_all(n)
    return Circuit(n, n, tuple(ops))


def ghz_default_cut(circuit: Circuit, wire: int = 2) -> Circuit:
    """Cut ``wire`` of a GHZ benchmark just before the CNOT it controls.

    For the 5-qubit benchmark this splits the circuit into two 3-qubit
    fragments.
    """
    for i, op in enumerate(circuit.ops):
        if isinstance(op, Gate) and op.name == "cx" and op.qubits[0] == wire:
            return insert_cut(circuit, wire, i)
    raise CircuitError(f"wire {wire} controls no CNOT")


def random_unitary_1q(rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_circuit(
    n: int,
    depth: int,
    rng: np.random.Generator,
    gate_set: Sequence[str] = ("h", "rx", "ry", "rz", "x", "cx"),
    cx_fraction: float = 0.4,
) -> Circuit:
    """Random gate circuit followed by terminal measurement of every qubit."""
    ops: list[Operation] = []
    one_q = [g for g in gate_set if g != "cx"]
    for _ in range(depth):
        if n >= 2 and "cx" in gate_set and rng.random() < cx_fraction:
            a, b = rng.choice(n, size=2, replace=False)
            ops.append(Gate("cx", (int(a), int(b))))
        else:
            name = one_q[rng.integers(len(one_q))]
            q = int(rng.integers(n))
            if name == "u1q":
                ops.append(Gate.u1q(random_unitary_1q(rng), q))
            else:
                nparams = ONE_QUBIT_GATES[name]
                ops.append(Gate(name, (q,), tuple(rng.uniform(0, 2 * math.pi, nparams))))
    ops += measure_all(n)
    return Circuit(n, n, tuple(ops))
