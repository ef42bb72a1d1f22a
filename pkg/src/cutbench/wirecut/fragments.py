"""Splitting a circuit with cut markers into fragments.

Each cut marker splits its wire into an upstream segment, which ends in a
boundary measurement, and a downstream segment, which starts with a
boundary preparation.  Segments joined by two-qubit gates form fragments.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..circuit import Barrier, Circuit, CutMarker, Gate, Measure, Operation, Prepare


class FragmentationError(ValueError):
    pass


@dataclass(frozen=True)
class Fragment:
    """One subcircuit of a cut circuit.

    ``circuit`` starts every in-boundary wire with ``prepare(zero)`` and ends
    every out-boundary wire with a measurement into ``out_clbits[cut_id]``.
    ``output_map`` sends local classical bits to positions of the global
    output bitstring.
    """

    circuit: Circuit
    in_boundaries: Mapping[int, int] = field(default_factory=dict)
    out_boundaries: Mapping[int, int] = field(default_factory=dict)
    out_clbits: Mapping[int, int] = field(default_factory=dict)
    output_map: Mapping[int, int] = field(default_factory=dict)
    wires: tuple[tuple[int, int], ...] = ()  # (original qubit, segment) per local qubit

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def in_cuts(self) -> list[int]:
        return sorted(self.in_boundaries)

    @property
    def out_cuts(self) -> list[int]:
        return sorted(self.out_boundaries)

    def configured(
        self,
        prep_states: Mapping[int, str] | None = None,
        prep_gates: Mapping[int, list[Gate]] | None = None,
        out_gates: Mapping[int, list[Gate]] | None = None,
    ) -> Circuit:
        """Executable copy with boundary preparations and pre-measurement gates filled in.

        ``prep_gates[cut]`` run right after the boundary preparation and
        ``out_gates[cut]`` right before the boundary measurement.  Gates are
        given on local qubit ``0`` and moved onto the boundary wire.
        """
        prep_states = prep_states or {}
        prep_gates = prep_gates or {}
        out_gates = out_gates or {}
        in_by_qubit = {q: c for c, q in self.in_boundaries.items()}
        out_by_qubit = {q: c for c, q in self.out_boundaries.items()}
        ops: list[Operation] = []
        for op in self.circuit.ops:
            if isinstance(op, Prepare) and op.qubit in in_by_qubit:
                cut = in_by_qubit[op.qubit]
                ops.append(Prepare(op.qubit, prep_states.get(cut, op.state)))
                ops += [_on_qubit(g, op.qubit) for g in prep_gates.get(cut, ())]
            elif (
                isinstance(op, Measure)
                and op.qubit in out_by_qubit
                and self.out_clbits[out_by_qubit[op.qubit]] == op.clbit
            ):
                ops += [_on_qubit(g, op.qubit) for g in out_gates.get(out_by_qubit[op.qubit], ())]
                ops.append(op)
            else:
                ops.append(op)
        return self.circuit.with_ops(ops)

    def template(self) -> tuple[Circuit, dict[int, int], dict[int, int]]:
        """Circuit with identity ``u1q`` placeholders on every boundary wire.

        Returns the circuit and the op indices of the in-boundary and
        out-boundary placeholders, keyed by cut id.
        """
        ident = np.eye(2)
        circ = self.configured(
            prep_gates={c: [Gate.u1q(ident, 0)] for c in self.in_boundaries},
            out_gates={c: [Gate.u1q(ident, 0)] for c in self.out_boundaries},
        )
        in_slots, out_slots = {}, {}
        in_by_qubit = {q: c for c, q in self.in_boundaries.items()}
        out_by_qubit = {q: c for c, q in self.out_boundaries.items()}
        ops = circ.ops
        for i, op in enumerate(ops):
            if isinstance(op, Prepare) and op.qubit in in_by_qubit:
                in_slots[in_by_qubit[op.qubit]] = i + 1
            if (
                isinstance(op, Measure)
                and op.qubit in out_by_qubit
                and self.out_clbits[out_by_qubit[op.qubit]] == op.clbit
            ):
                out_slots[out_by_qubit[op.qubit]] = i - 1
        return circ, in_slots, out_slots


def _on_qubit(gate: Gate, qubit: int) -> Gate:
    return Gate(gate.name, (qubit,), gate.params, gate.matrix)


@dataclass(frozen=True)
class StitchEdge:
    cut_id: int
    producer: int
    consumer: int


@dataclass(frozen=True)
class FragmentSet:
    """Fragments in an executable (topological) order plus their stitching DAG."""

    fragments: tuple[Fragment, ...]
    stitching: tuple[StitchEdge, ...]
    num_qubits: int
    num_clbits: int

    @property
    def num_cuts(self) -> int:
        return len(self.stitching)

    @property
    def cut_ids(self) -> list[int]:
        return sorted(e.cut_id for e in self.stitching)

    @property
    def sizes(self) -> list[int]:
        return [f.num_qubits for f in self.fragments]

    @property
    def global_output_map(self) -> list[dict[int, int]]:
        return [dict(f.output_map) for f in self.fragments]

    def edge(self, cut_id: int) -> StitchEdge:
        for e in self.stitching:
            if e.cut_id == cut_id:
                return e
        raise KeyError(cut_id)

    def written_clbits(self) -> list[int]:
        return sorted({g for f in self.fragments for g in f.output_map.values()})


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def fragment(circuit: Circuit, device_limit: int | None = None) -> FragmentSet:
    """Partition ``circuit`` at its cut markers.

    Raises:
        FragmentationError: a cut joins a fragment to itself or the fragments
            depend on each other cyclically, a classical bit is written in
            two fragments, or a fragment exceeds ``device_limit`` qubits.
    """
    cuts = circuit.cut_points()
    if not cuts:
        n = circuit.num_qubits
        frag = Fragment(
            circuit=circuit,
            output_map={c: c for c in range(circuit.num_clbits)},
            wires=tuple((q, 0) for q in range(n)),
        )
        fs = FragmentSet((frag,), (), n, circuit.num_clbits)
        _check_limit(fs, device_limit)
        return fs

    n = circuit.num_qubits
    seg = [0] * n
    uf = _UnionFind()
    for q in range(n):
        uf.add((q, 0))
    op_segments: list[tuple] = []
    cut_info: dict[int, tuple[int, int]] = {}  # cut id -> (qubit, upstream segment)
    for op in circuit.ops:
        if isinstance(op, CutMarker):
            cut_info[op.cut_id] = (op.qubit, seg[op.qubit])
            seg[op.qubit] += 1
            uf.add((op.qubit, seg[op.qubit]))
            op_segments.append(())
            continue
        segs = tuple((q, seg[q]) for q in op.qubits)
        if isinstance(op, Gate) and len(segs) == 2:
            uf.union(*segs)
        op_segments.append(segs)

    all_segments = sorted(uf.parent)
    roots = sorted({uf.find(s) for s in all_segments})
    comp_of_root = {r: i for i, r in enumerate(roots)}
    comp = {s: comp_of_root[uf.find(s)] for s in all_segments}

    edges = []
    for cut_id, (q, s) in sorted(cut_info.items()):
        a, b = comp[(q, s)], comp[(q, s + 1)]
        if a == b:
            raise FragmentationError(f"cut {cut_id} does not separate its wire into two fragments")
        edges.append((cut_id, a, b))
    order = _topological_order(len(roots), [(a, b) for _, a, b in edges])
    new_index = {c: i for i, c in enumerate(order)}

    clbit_owner: dict[int, int] = {}
    for op, segs in zip(circuit.ops, op_segments):
        if isinstance(op, Measure):
            owner = comp[segs[0]]
            if clbit_owner.setdefault(op.clbit, owner) != owner:
                raise FragmentationError(
                    f"classical bit {op.clbit} is written in two different fragments"
                )

    fragments = []
    for c in order:
        wires = tuple(s for s in all_segments if comp[s] == c)
        local = {s: i for i, s in enumerate(wires)}
        written = sorted(g for g, owner in clbit_owner.items() if owner == c)
        local_clbit = {g: i for i, g in enumerate(written)}
        in_b = {cid: local[(q, s + 1)] for cid, (q, s) in cut_info.items() if comp[(q, s + 1)] == c}
        out_b = {cid: local[(q, s)] for cid, (q, s) in cut_info.items() if comp[(q, s)] == c}
        out_clbits = {cid: len(written) + j for j, cid in enumerate(sorted(out_b))}
        ops: list[Operation] = [Prepare(in_b[cid], "zero") for cid in sorted(in_b)]
        for op, segs in zip(circuit.ops, op_segments):
            if not segs:
                continue
            mine = [s for s in segs if comp[s] == c]
            if not mine:
                continue
            if isinstance(op, Barrier):
                ops.append(Barrier(tuple(local[s] for s in mine)))
            elif isinstance(op, Gate):
                ops.append(Gate(op.name, tuple(local[s] for s in segs), op.params, op.matrix))
            elif isinstance(op, Measure):
                ops.append(Measure(local[segs[0]], local_clbit[op.clbit]))
            else:
                ops.append(type(op)(local[segs[0]], *_extra_fields(op)))
        ops += [Measure(out_b[cid], out_clbits[cid]) for cid in sorted(out_b)]
        frag_circ = Circuit(len(wires), len(written) + len(out_b), tuple(ops))
        fragments.append(
            Fragment(
                circuit=frag_circ,
                in_boundaries=in_b,
                out_boundaries=out_b,
                out_clbits=out_clbits,
                output_map={i: g for g, i in local_clbit.items()},
                wires=wires,
            )
        )
    stitching = tuple(StitchEdge(cid, new_index[a], new_index[b]) for cid, a, b in edges)
    fs = FragmentSet(tuple(fragments), stitching, n, circuit.num_clbits)
    if sum(fs.sizes) != n + len(cuts):
        raise FragmentationError("fragment sizes do not add up to qubits plus cuts")
    _check_limit(fs, device_limit)
    return fs


def _topological_order(num_nodes: int, edges: list[tuple[int, int]]) -> list[int]:
    """Kahn's algorithm, always taking the smallest ready node."""
    indegree = [0] * num_nodes
    succ: list[list[int]] = [[] for _ in range(num_nodes)]
    for a, b in edges:
        succ[a].append(b)
        indegree[b] += 1
    ready = [i for i in range(num_nodes) if indegree[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in succ[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != num_nodes:
        stuck = sorted(set(range(num_nodes)) - set(order))
        raise FragmentationError(f"cyclic dependency between fragments {stuck}")
    return order


def _extra_fields(op) -> tuple:
    if isinstance(op, Prepare):
        return (op.state,)
    return ()


def _check_limit(fs: FragmentSet, device_limit: int | None):
    if device_limit is None:
        return
    for i, f in enumerate(fs.fragments):
        if f.num_qubits > device_limit:
            raise FragmentationError(
                f"fragment {i} needs {f.num_qubits} qubits, device limit is {device_limit}"
            )
