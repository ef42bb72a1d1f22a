"""Random circuits with wire cuts that are guaranteed to fragment cleanly."""

from __future__ import annotations

import math

import numpy as np

from cutbench.circuit import Circuit, CutMarker, Gate, Measure

_ONE_Q = ("h", "rx", "ry", "rz", "x", "u1q")


def _random_ops(qubits, depth, rng):
    from cutbench.circuit import random_unitary_1q

    qubits = list(qubits)
    ops = []
    for _ in range(depth):
        if len(qubits) >= 2 and rng.random() < 0.4:
            a, b = rng.choice(qubits, size=2, replace=False)
            ops.append(Gate("cx", (int(a), int(b))))
            continue
        name = _ONE_Q[rng.integers(len(_ONE_Q))]
        q = int(rng.choice(qubits))
        if name == "u1q":
            ops.append(Gate.u1q(random_unitary_1q(rng), q))
        elif name in ("h", "x"):
            ops.append(Gate(name, (q,)))
        else:
            ops.append(Gate(name, (q,), (float(rng.uniform(0, 2 * math.pi)),)))
    return ops


def random_cut_circuit(n: int, num_cuts: int, rng: np.random.Generator, depth: int = 6) -> Circuit:
    """``n``-qubit circuit with ``num_cuts`` (1 or 2) cuts and terminal measurements.

    With two cuts the layout is either a chain of three fragments or two
    parallel cuts between the same pair of fragments.
    """
    perm = rng.permutation(n)
    label = lambda qs: [int(perm[q]) for q in qs]  # noqa: E731
    ops = []
    cut_id = 0
    chain = num_cuts == 2 and n >= 4 and rng.random() < 0.5
    if num_cuts == 1 or chain:
        # successive blocks sharing one wire each
        bounds = sorted(rng.choice(np.arange(2, n), size=num_cuts, replace=False)) if n > 2 else [1]
        start_block = list(range(bounds[0]))
        active = start_block
        for i in range(num_cuts):
            ops += _random_ops(label(active), depth, rng)
            w = int(rng.choice(active))
            ops.append(CutMarker(cut_id, int(perm[w])))
            cut_id += 1
            end = bounds[i + 1] if i + 1 < num_cuts else n
            active = [w] + list(range(bounds[i], end))
        ops += _random_ops(label(active), depth, rng)
    else:
        a = int(rng.integers(2, n))
        up = list(range(a))
        ops += _random_ops(label(up), depth, rng)
        ws = [int(x) for x in rng.choice(up, size=2, replace=False)]
        for w in ws:
            ops.append(CutMarker(cut_id, int(perm[w])))
            cut_id += 1
        ops += _random_ops(label(ws + list(range(a, n))), depth, rng)
    ops += [Measure(q, q) for q in range(n)]
    return Circuit(n, n, tuple(ops))
