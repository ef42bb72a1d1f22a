"""Statevector simulation with mid-circuit measurement and trajectory noise.

Three execution routes share the same gate kernels, which act on a batch of
states stored as a ``(B, 2**n)`` array (qubit 0 is the most significant bit
of the basis index):

* :func:`exact_distribution` enumerates the branch tree of every
  mid-circuit measurement or reset and sums the leaf distributions.
* :func:`run_trajectories` evolves one column per shot, sampling every
  measurement from its Born probability and projecting.  Column-specific
  one-qubit "slot" unitaries let many differently-configured copies of the
  same circuit run together.
* :func:`sample` picks between the trajectory engine and a faster route for
  circuits whose only measurements are terminal: there each shot's noise
  pattern is drawn first, every distinct pattern is simulated once, and the
  shot outcome is drawn from that pattern's final distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .circuit import (
    PREPARE_UNITARIES,
    Barrier,
    Circuit,
    CircuitError,
    CutMarker,
    Gate,
    Measure,
    Prepare,
    Reset,
    is_unitary,
)
from .distributions import Counts, Distribution, counts_from_indices, to_dict
from .noise import NoiseModel

DEFAULT_MAX_QUBITS = 24
_PRUNE = 1e-20
_CHUNK_AMPLITUDES = 2**20
_SPAWN_WINDOW = 8

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_X = PAULIS[1]


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


# -- kernels -----------------------------------------------------------------


def _apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply ``u`` (2x2, or (B,2,2) for per-column matrices) to qubit ``q``."""
    b = psi.shape[0]
    v = psi.reshape(b, 2**q, 2, 2 ** (n - q - 1))
    u = u.astype(psi.dtype, copy=False)
    if u.ndim == 3:
        u = u[:, None]
    return np.matmul(u, v).reshape(b, 2**n)


@lru_cache(maxsize=256)
def _cx_perm(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


@lru_cache(maxsize=256)
def _bit_vector(n: int, q: int) -> np.ndarray:
    return (np.arange(2**n) >> (n - 1 - q)) & 1


def _apply_gate(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    if gate.name == "cx":
        return np.take(psi, _cx_perm(n, *gate.qubits), axis=1)
    u = gate.unitary()
    if gate.name in ("rz", "z"):
        return psi * np.diag(u).astype(psi.dtype)[_bit_vector(n, gate.qubits[0])]
    return _apply_1q(psi, u, gate.qubits[0], n)


def _prob_one(psi: np.ndarray, q: int, n: int) -> np.ndarray:
    v = psi.reshape(psi.shape[0], 2**q, 2, 2 ** (n - q - 1))
    p1 = np.sum(np.abs(v[:, :, 1, :]) ** 2, axis=(1, 2))
    total = np.sum(np.abs(psi) ** 2, axis=1)
    return np.clip(p1 / total, 0.0, 1.0)


def _project(psi: np.ndarray, q: int, n: int, outcome: np.ndarray, renormalize: bool) -> np.ndarray:
    v = psi.reshape(psi.shape[0], 2**q, 2, 2 ** (n - q - 1)).copy()
    keep_one = outcome.astype(bool)[:, None, None]
    v[:, :, 0, :] *= ~keep_one
    v[:, :, 1, :] *= keep_one
    out = v.reshape(psi.shape[0], 2**n)
    if renormalize:
        norms = np.linalg.norm(out, axis=1)
        out /= norms[:, None]
    return out


def _measure_columns(psi: np.ndarray, q: int, n: int, rng: np.random.Generator):
    p1 = _prob_one(psi, q, n)
    outcome = (rng.random(psi.shape[0]) < p1).astype(np.uint8)
    return _project(psi, q, n, outcome, renormalize=True), outcome


@lru_cache(maxsize=4096)
def _pauli_action(n: int, qubits: tuple[int, ...], code: int) -> tuple[np.ndarray, np.ndarray]:
    """``(P psi)[i] = phase[i] * psi[perm[i]]`` for Pauli code 1..3 (one qubit) or 1..15 (two)."""
    letters = (code,) if len(qubits) == 1 else divmod(code, 4)
    idx = np.arange(2**n)
    xmask = zmask = 0
    ys = 0
    for q, letter in zip(qubits, letters):
        bit = 1 << (n - 1 - q)
        if letter in (1, 2):
            xmask |= bit
        if letter in (2, 3):
            zmask |= bit
        ys += letter == 2
    perm = idx ^ xmask
    parity = np.zeros(idx.size, dtype=np.int64)
    z = perm & zmask
    while np.any(z):
        parity ^= z & 1
        z >>= 1
    phase = (1j**ys) * (1 - 2 * parity)
    return perm, phase


def _apply_pauli_at(psi, cols: np.ndarray, paulis: np.ndarray, qubits, n: int):
    """Apply Pauli index ``paulis[j]`` (1..3 or 1..15) to column ``cols[j]``."""
    if cols.size == 0:
        return psi
    for code in np.unique(paulis):
        sel = cols[paulis == code]
        perm, phase = _pauli_action(n, tuple(qubits), int(code))
        psi[sel] = np.take(psi[sel], perm, axis=1) * phase.astype(psi.dtype, copy=False)
    return psi


def apply_unitary(state: StateVector, gate: Gate) -> StateVector:
    """Return ``gate`` applied to ``state``.  ``RZ(t) = diag(e^{-it/2}, e^{it/2})``."""
    if not isinstance(gate, Gate):
        raise TypeError("apply_unitary expects a Gate")
    if gate.name == "u1q" and not is_unitary(gate.unitary()):
        raise CircuitError("u1q matrix is not unitary")
    for q in gate.qubits:
        if not 0 <= q < state.num_qubits:
            raise CircuitError(f"qubit index {q} out of range")
    psi = _apply_gate(state.amplitudes[None, :], gate, state.num_qubits)
    return StateVector(state.num_qubits, psi[0])


# -- circuit analysis --------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    n: int
    m: int
    deferred: frozenset  # indices of terminal measurements read from the final state
    fresh: frozenset  # indices of resets/preparations acting on untouched wires
    final_map: tuple  # (qubit, clbit) pairs of deferred measurements
    measured: tuple  # clbits written by any measurement
    terminal_only: bool


def _plan(circuit: Circuit, measure_all: bool | None) -> _Plan:
    ops = circuit.ops
    if measure_all is None:
        measure_all = not any(isinstance(op, Measure) for op in ops)
    if measure_all and any(isinstance(op, Measure) for op in ops):
        raise CircuitError("measure_all requested for a circuit that already measures")
    n = circuit.num_qubits
    m = n if measure_all else circuit.num_clbits
    last_on_qubit: dict[int, int] = {}
    last_writer: dict[int, int] = {}
    fresh = set()
    touched = set()
    for i, op in enumerate(ops):
        if isinstance(op, (Barrier, CutMarker)):
            continue
        if isinstance(op, (Reset, Prepare)) and op.qubit not in touched:
            fresh.add(i)
        for q in op.qubits:
            last_on_qubit[q] = i
            touched.add(q)
        if isinstance(op, Measure):
            last_writer[op.clbit] = i
    deferred = set()
    for i, op in enumerate(ops):
        if isinstance(op, Measure) and last_on_qubit[op.qubit] == i and last_writer[op.clbit] == i:
            deferred.add(i)
    final_map = [(ops[i].qubit, ops[i].clbit) for i in sorted(deferred)]
    if measure_all:
        final_map = [(q, q) for q in range(n)]
    terminal_only = all(
        i in deferred if isinstance(op, Measure) else i in fresh
        for i, op in enumerate(ops)
        if isinstance(op, (Measure, Reset, Prepare))
    )
    measured = sorted({op.clbit for op in ops if isinstance(op, Measure)})
    if measure_all:
        measured = list(range(n))
    return _Plan(n, m, frozenset(deferred), frozenset(fresh), tuple(final_map), tuple(measured), terminal_only)


def _terminal_index(plan: _Plan) -> np.ndarray:
    idx = np.zeros(2**plan.n, dtype=np.int64)
    basis = np.arange(2**plan.n)
    for q, c in plan.final_map:
        idx += ((basis >> (plan.n - 1 - q)) & 1) << (plan.m - 1 - c)
    return idx


def _marginalize(probs: np.ndarray, plan: _Plan) -> np.ndarray:
    """Map ``(B, 2**n)`` final-state probabilities onto ``(B, 2**m)`` clbit values."""
    if plan.m == plan.n and plan.final_map == tuple((q, q) for q in range(plan.n)):
        return probs
    tidx = _terminal_index(plan)
    out = np.zeros((probs.shape[0], 2**plan.m))
    for b in range(probs.shape[0]):
        out[b] = np.bincount(tidx, weights=probs[b], minlength=2**plan.m)
    return out


def _check_size(circuit: Circuit, max_qubits: int):
    if circuit.num_qubits > max_qubits:
        raise CircuitError(
            f"circuit has {circuit.num_qubits} qubits, limit is {max_qubits}"
        )


# -- exact -------------------------------------------------------------------


def exact_probabilities(
    circuit: Circuit, measure_all: bool | None = None, max_qubits: int = DEFAULT_MAX_QUBITS
) -> np.ndarray:
    """Dense version of :func:`exact_distribution`, indexed by clbit value."""
    _check_size(circuit, max_qubits)
    plan = _plan(circuit, measure_all)
    n, m = plan.n, plan.m
    psi = np.zeros((1, 2**n), dtype=complex)
    psi[0, 0] = 1.0
    rec = np.zeros((1, m), dtype=np.int64)

    def split(psi, rec, q, clbit=None, flip_one=False):
        ones = np.ones(psi.shape[0], dtype=np.uint8)
        zeros = np.zeros(psi.shape[0], dtype=np.uint8)
        b0 = _project(psi, q, n, zeros, renormalize=False)
        b1 = _project(psi, q, n, ones, renormalize=False)
        if flip_one:
            b1 = _apply_1q(b1, _X, q, n)
        r0, r1 = rec.copy(), rec.copy()
        if clbit is not None:
            r0[:, clbit] = 0
            r1[:, clbit] = 1
        psi = np.concatenate([b0, b1])
        rec = np.concatenate([r0, r1])
        keep = np.sum(np.abs(psi) ** 2, axis=1) > _PRUNE
        return psi[keep], rec[keep]

    for i, op in enumerate(circuit.ops):
        if isinstance(op, Gate):
            psi = _apply_gate(psi, op, n)
        elif isinstance(op, Measure):
            if i not in plan.deferred:
                psi, rec = split(psi, rec, op.qubit, clbit=op.clbit)
        elif isinstance(op, (Reset, Prepare)):
            if i not in plan.fresh:
                psi, rec = split(psi, rec, op.qubit, flip_one=True)
            if isinstance(op, Prepare) and op.state != "zero":
                psi = _apply_1q(psi, PREPARE_UNITARIES[op.state], op.qubit, n)
    probs = np.abs(psi) ** 2
    deferred_clbits = {c for _, c in plan.final_map}
    weights = np.array([1 << (m - 1 - c) for c in range(m)], dtype=np.int64)
    for c in deferred_clbits:
        weights[c] = 0
    rec_idx = rec @ weights if m else np.zeros(len(rec), dtype=np.int64)
    tidx = _terminal_index(plan)
    flat = (rec_idx[:, None] + tidx[None, :]).ravel()
    return np.bincount(flat, weights=probs.ravel(), minlength=2**m)


def exact_distribution(
    circuit: Circuit,
    measure_all: bool | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    tol: float = 1e-15,
) -> Distribution:
    """Exact output distribution over the classical register.

    Mid-circuit measurements and resets are handled by enumerating every
    branch of the outcome tree.  A circuit without any measurement is
    measured on all qubits (bit ``i`` = qubit ``i``).
    """
    probs = exact_probabilities(circuit, measure_all, max_qubits)
    m = int(np.log2(len(probs)))
    return to_dict(probs, m, tol)


def final_state(circuit: Circuit) -> StateVector:
    """State before the terminal measurements of a circuit without mid-circuit ones."""
    state = StateVector.zero(circuit.num_qubits)
    measured: set[int] = set()
    for op in circuit.ops:
        if isinstance(op, Gate):
            if measured.intersection(op.qubits):
                raise CircuitError("final_state needs all measurements to be terminal")
            state = apply_unitary(state, op)
        elif isinstance(op, Measure):
            measured.add(op.qubit)
        elif isinstance(op, (Prepare, Reset)):
            raise CircuitError("final_state does not handle resets or preparations")
    return state


# -- trajectories ------------------------------------------------------------


@dataclass(frozen=True)
class Slot:
    """Per-shot override of a ``u1q`` placeholder gate.

    ``unitaries`` has shape ``(shots, 2, 2)``.  ``noisy`` marks the shots on
    which the gate counts as a physical gate for the noise model; ``None``
    means all of them.
    """

    unitaries: np.ndarray
    noisy: np.ndarray | None = None


def _gate_noise(psi, gate: Gate, n, rng, noise: NoiseModel | None, eligible=None):
    if noise is None:
        return psi
    p = noise.p1 if len(gate.qubits) == 1 else noise.p2
    if p <= 0.0:
        return psi
    fired = rng.random(psi.shape[0]) < p
    if eligible is not None:
        fired &= eligible
    cols = np.flatnonzero(fired)
    high = 4 if len(gate.qubits) == 1 else 16
    paulis = rng.integers(1, high, size=cols.size)
    return _apply_pauli_at(psi, cols, paulis, gate.qubits, n)


def run_trajectories(
    circuit: Circuit,
    shots: int,
    seed=None,
    noise: NoiseModel | None = None,
    slots: Mapping[int, Slot] | None = None,
    measure_all: bool | None = None,
) -> np.ndarray:
    """Simulate ``shots`` independent trajectories; return a ``(shots, m)`` bit array.

    ``slots`` maps op indices of ``u1q`` gates to per-shot unitaries.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = as_rng(seed)
    plan = _plan(circuit, measure_all)
    n, m = plan.n, plan.m
    slots = dict(slots or {})
    for i in slots:
        op = circuit.ops[i]
        if not (isinstance(op, Gate) and op.name == "u1q"):
            raise CircuitError(f"slot at op {i} is not a u1q gate")
    p_ro = noise.p_ro if noise is not None else 0.0
    chunk = max(1, _CHUNK_AMPLITUDES // 2**n)
    bits = np.zeros((shots, m), dtype=np.uint8)
    for start in range(0, shots, chunk):
        stop = min(shots, start + chunk)
        b = stop - start
        psi = np.zeros((b, 2**n), dtype=complex)
        psi[:, 0] = 1.0
        out = bits[start:stop]
        for i, op in enumerate(circuit.ops):
            if isinstance(op, Gate):
                eligible = None
                if i in slots:
                    slot = slots[i]
                    psi = _apply_1q(psi, slot.unitaries[start:stop], op.qubits[0], n)
                    if slot.noisy is not None:
                        eligible = slot.noisy[start:stop]
                else:
                    psi = _apply_gate(psi, op, n)
                psi = _gate_noise(psi, op, n, rng, noise, eligible)
            elif isinstance(op, Measure):
                psi, outcome = _measure_columns(psi, op.qubit, n, rng)
                if p_ro > 0.0:
                    outcome ^= (rng.random(b) < p_ro).astype(np.uint8)
                out[:, op.clbit] = outcome
            elif isinstance(op, (Reset, Prepare)):
                if i not in plan.fresh:
                    psi, outcome = _measure_columns(psi, op.qubit, n, rng)
                    cols = np.flatnonzero(outcome)
                    psi[cols] = _apply_1q(psi[cols], _X, op.qubit, n)
                if isinstance(op, Prepare) and op.state != "zero":
                    psi = _apply_1q(psi, PREPARE_UNITARIES[op.state], op.qubit, n)
        if measure_all:
            for q in range(n):
                psi, outcome = _measure_columns(psi, q, n, rng)
                if p_ro > 0.0:
                    outcome ^= (rng.random(b) < p_ro).astype(np.uint8)
                out[:, q] = outcome
    return bits


def _bits_to_indices(bits: np.ndarray) -> np.ndarray:
    m = bits.shape[1]
    if m == 0:
        return np.zeros(bits.shape[0], dtype=np.int64)
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def _draw(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def _sample_terminal(circuit: Circuit, plan: _Plan, shots: int, rng, noise) -> np.ndarray:
    """Outcome indices for a circuit whose measurements are all terminal."""
    n = plan.n
    gate_pos = [i for i, op in enumerate(circuit.ops) if isinstance(op, Gate)]
    p1 = noise.p1 if noise is not None else 0.0
    p2 = noise.p2 if noise is not None else 0.0
    shot_pattern = np.zeros(shots, dtype=np.int64)
    patterns: list[tuple] = [()]
    events_at: dict[int, list[tuple[int, int]]] = {}
    if gate_pos and (p1 > 0.0 or p2 > 0.0):
        arity = np.array([len(circuit.ops[i].qubits) for i in gate_pos])
        pvec = np.where(arity == 1, p1, p2)
        fired = rng.random((shots, len(gate_pos))) < pvec
        s_idx, g_idx = np.nonzero(fired)
        codes = rng.integers(1, np.where(arity[g_idx] == 1, 4, 16))
        per_shot: dict[int, list] = {}
        for s, g, c in zip(s_idx.tolist(), g_idx.tolist(), codes.tolist()):
            per_shot.setdefault(s, []).append((g, c))
        # columns ordered by first event so a pattern's column can be copied
        # off the ideal column (column 0) only once its first event happens
        distinct = sorted({tuple(v) for v in per_shot.values()}, key=lambda pat: (pat[0][0], pat))
        lookup = {(): 0}
        for pat in distinct:
            lookup[pat] = len(patterns)
            patterns.append(pat)
        for s, v in per_shot.items():
            shot_pattern[s] = lookup[tuple(v)]
        for col, pat in enumerate(patterns):
            for g, c in pat:
                events_at.setdefault(g, []).append((col, c))
    first_event = np.array([pat[0][0] for pat in patterns[1:]], dtype=np.int64)
    # single precision is ample for drawing samples and halves the memory traffic
    psi = np.zeros((1, 2**n), dtype=np.complex64)
    psi[0, 0] = 1.0
    g = 0
    for i, op in enumerate(circuit.ops):
        if isinstance(op, Gate):
            psi = _apply_gate(psi, op, n)
            if g in events_at:
                active = 1 + int(np.searchsorted(first_event, g, side="right"))
                if active > psi.shape[0]:
                    # copy early for the next few gates too; fewer, larger concatenations
                    active = 1 + int(np.searchsorted(first_event, g + _SPAWN_WINDOW, side="left"))
                    psi = np.concatenate([psi, np.repeat(psi[:1], active - psi.shape[0], axis=0)])
                ev = np.array(events_at[g])
                psi = _apply_pauli_at(psi, ev[:, 0], ev[:, 1], op.qubits, n)
            g += 1
        elif isinstance(op, Prepare) and op.state != "zero":
            psi = _apply_1q(psi, PREPARE_UNITARIES[op.state], op.qubit, n)
    dist = _marginalize((psi.real**2 + psi.imag**2).astype(float), plan)
    cdf = np.cumsum(dist, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random(shots)
    if len(patterns) == 1:
        return _draw(cdf[0], u)
    # one search over all rows: row j is shifted by j so the flat array stays sorted
    width = cdf.shape[1]
    np.minimum(cdf, 1.0, out=cdf)
    flat = (cdf + np.arange(len(patterns))[:, None]).ravel()
    pos = np.searchsorted(flat, shot_pattern + u, side="right") - shot_pattern * width
    return np.minimum(pos, width - 1)


def sample_indices(
    circuit: Circuit,
    shots: int,
    seed=None,
    noise: NoiseModel | None = None,
    measure_all: bool | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> tuple[np.ndarray, int]:
    """Per-shot outcome indices and the register width."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    _check_size(circuit, max_qubits)
    rng = as_rng(seed)
    plan = _plan(circuit, measure_all)
    if not plan.terminal_only:
        bits = run_trajectories(circuit, shots, rng, noise, measure_all=measure_all)
        return _bits_to_indices(bits), plan.m
    idx = _sample_terminal(circuit, plan, shots, rng, noise)
    if noise is not None and noise.p_ro > 0.0 and plan.measured:
        flips = rng.random((shots, len(plan.measured))) < noise.p_ro
        mask = np.zeros(shots, dtype=np.int64)
        for j, c in enumerate(plan.measured):
            mask |= flips[:, j].astype(np.int64) << (plan.m - 1 - c)
        idx = idx ^ mask
    return idx, plan.m


def sample(
    circuit: Circuit,
    shots: int,
    seed=None,
    noise: NoiseModel | None = None,
    measure_all: bool | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> Counts:
    """Sample ``shots`` trajectories; deterministic given the arguments.

    With ``noise`` every shot draws its own depolarizing events and readout
    flips.  A noise model with all probabilities zero reproduces the
    noiseless counts exactly.
    """
    idx, m = sample_indices(circuit, shots, seed, noise, measure_all, max_qubits)
    return counts_from_indices(idx, m)
