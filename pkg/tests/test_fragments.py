from __future__ import annotations

import numpy as np
import pytest

from cutbench.circuit import Circuit, CutMarker, Gate, Measure, Prepare, insert_cut, random_circuit
from cutbench.wirecut import FragmentationError, fragment


def three_qubit_chain(cut=True):
    ops = [Gate("h", (0,)), Gate("cx", (0, 1))]
    if cut:
        ops.append(CutMarker(0, 1))
    ops += [Gate("cx", (1, 2)), Measure(0, 0), Measure(1, 1), Measure(2, 2)]
    return Circuit(3, 3, tuple(ops))


def test_middle_cut_gives_two_by_two():
    fs = fragment(three_qubit_chain())
    assert fs.sizes == [2, 2]
    assert fs.num_cuts == 1
    edge = fs.edge(0)
    assert (edge.producer, edge.consumer) == (0, 1)
    up, down = fs.fragments
    assert up.out_boundaries == {0: 1} and down.in_boundaries == {0: 0}
    # the boundary measurement is the last op on its wire and the preparation the first
    assert up.circuit.ops[-1] == Measure(1, up.out_clbits[0])
    assert down.circuit.ops[0] == Prepare(0, "zero")
    assert up.output_map == {0: 0} and down.output_map == {0: 1, 1: 2}


def test_no_cut_identity():
    c = three_qubit_chain(cut=False)
    fs = fragment(c)
    assert len(fs.fragments) == 1 and fs.fragments[0].circuit == c


def test_self_cut_rejected():
    # wire 1 is cut but its two halves stay joined through wire 0
    c = Circuit(2, 0, (Gate("cx", (0, 1)), CutMarker(0, 1), Gate("cx", (0, 1))))
    with pytest.raises(FragmentationError, match="does not separate"):
        fragment(c)


def test_cycle_rejected():
    # A feeds B through the cut on wire 0 while B feeds A through the cut on wire 2
    ops = (
        Gate("cx", (0, 1)),
        CutMarker(0, 0),
        Gate("cx", (2, 3)),
        CutMarker(1, 2),
        Gate("cx", (0, 3)),
        Gate("cx", (2, 1)),
    )
    with pytest.raises(FragmentationError, match="cyclic"):
        fragment(Circuit(4, 0, ops))


def test_clbit_in_two_fragments_rejected():
    c = Circuit(2, 1, (Gate("cx", (0, 1)), CutMarker(0, 1), Measure(0, 0), Gate("x", (1,)), Measure(1, 0)))
    with pytest.raises(FragmentationError, match="classical bit"):
        fragment(c)


def test_device_limit():
    with pytest.raises(FragmentationError, match="device limit"):
        fragment(three_qubit_chain(), device_limit=1)
    assert fragment(three_qubit_chain(), device_limit=2).sizes == [2, 2]


@pytest.mark.parametrize("seed", range(30))
def test_size_identity_on_random_cuts(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(5, 15, rng, cx_fraction=0.3)
    for _ in range(2):
        c = insert_cut(c, int(rng.integers(5)), int(rng.integers(len(c.ops) + 1)))
    try:
        fs = fragment(c)
    except FragmentationError:
        return
    assert sum(fs.sizes) == c.num_qubits + c.num_cuts
    ids = sorted(fs.cut_ids)
    assert ids == sorted(cp.cut_id for cp in c.cut_points())
    for cid in ids:
        e = fs.edge(cid)
        assert e.producer < e.consumer
        assert cid in fs.fragments[e.producer].out_boundaries
        assert cid in fs.fragments[e.consumer].in_boundaries
