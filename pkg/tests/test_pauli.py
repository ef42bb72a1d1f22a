from __future__ import annotations

import math

import numpy as np
import pytest

from cutbench.circuit import Circuit, CutMarker, Gate, Measure, ghz_benchmark_circuit, ghz_default_cut
from cutbench.distributions import to_array
from cutbench.simulator import exact_probabilities
from cutbench.wirecut import (
    PAULI_TERMS,
    enumerate_pauli_configs,
    exact_config_results,
    fragment,
    reconstruct_pauli,
    run_pauli_cut,
)
from cutbench.wirecut.pauli import config_circuit, FragmentConfig

from generators import random_cut_circuit
from oracles import statevector_probabilities


def test_single_cut_needs_seven_configurations():
    fs = fragment(ghz_default_cut(ghz_benchmark_circuit(5, seed=1)))
    plan = enumerate_pauli_configs(fs)
    assert len(plan.configs) == 3 + 4
    assert len(plan) == 14


def test_two_parallel_cuts_config_count():
    ops = [Gate("h", (0,)), Gate("cx", (0, 1)), CutMarker(0, 0), CutMarker(1, 1), Gate("cx", (0, 1))]
    ops += [Measure(q, q) for q in range(2)]
    fs = fragment(Circuit(2, 2, tuple(ops)))
    assert fs.sizes == [2, 2]
    assert len(enumerate_pauli_configs(fs).configs) == 9 + 16


def test_no_cut_single_unit_term():
    c = ghz_benchmark_circuit(3, seed=2)
    fs = fragment(c)
    plan = enumerate_pauli_configs(fs)
    assert len(plan.configs) == 1
    assert [coef for coef, _ in plan] == [1.0]
    q = reconstruct_pauli(exact_config_results(fs), fs)
    np.testing.assert_allclose(to_array(q, 3), exact_probabilities(c), atol=1e-12)


def test_term_table_resolves_identity():
    # sum over terms of upstream (x) downstream reproduces the identity channel on |0>,|1>,|+>,|+i>
    prep_vec = {"zero": np.array([1, 0]), "one": np.array([0, 1]),
                "plus": np.array([1, 1]) / math.sqrt(2), "i_state": np.array([1, 1j]) / math.sqrt(2)}
    probe = {
        "Z": lambda v: np.abs(v) ** 2,
        "X": lambda v: np.abs(np.array([v[0] + v[1], v[0] - v[1]]) / math.sqrt(2)) ** 2,
        "Y": lambda v: np.abs(np.array([v[0] - 1j * v[1], v[0] + 1j * v[1]]) / math.sqrt(2)) ** 2,
    }
    for inp in prep_vec.values():
        rho = np.outer(inp, inp.conj())
        out = np.zeros((2, 2), dtype=complex)
        for t in PAULI_TERMS:
            pu = probe[t.basis](inp)
            up = sum(c * pu[o] for o, c in t.upstream)
            for prep, cd in t.downstream:
                v = prep_vec[prep]
                out += 0.5 * up * cd * np.outer(v, v.conj())
        np.testing.assert_allclose(out, rho, atol=1e-12)


def _term_sum(fs, results):
    """Direct sum over the signed term list (no tensor contraction)."""
    plan = enumerate_pauli_configs(fs)
    m = fs.num_clbits
    total = np.zeros(2**m)
    for coef, prims in plan:
        for g in range(2**m):
            gbits = [(g >> (m - 1 - b)) & 1 for b in range(m)]
            val = coef
            for fi, frag in enumerate(fs.fragments):
                preps = tuple((c, prims[c].prep) for c in frag.in_cuts)
                bases = tuple((c, prims[c].basis) for c in frag.out_cuts)
                p = results[FragmentConfig(fi, preps, bases)]
                nb = frag.circuit.num_clbits
                local = 0
                for lb in range(nb):
                    bit = None
                    for c, cb in frag.out_clbits.items():
                        if cb == lb:
                            bit = prims[c].outcome
                    if bit is None:
                        bit = gbits[frag.output_map[lb]]
                    local |= bit << (nb - 1 - lb)
                val *= p[local]
            total[g] += val
    return total


@pytest.mark.parametrize("seed", range(6))
def test_contraction_matches_term_sum(seed):
    rng = np.random.default_rng(seed)
    c = random_cut_circuit(int(rng.integers(3, 5)), 1 + seed % 2, rng, depth=4)
    fs = fragment(c)
    results = exact_config_results(fs)
    fast = to_array(reconstruct_pauli(results, fs), c.num_clbits)
    np.testing.assert_allclose(fast, _term_sum(fs, results), atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_exact_reconstruction(seed):
    rng = np.random.default_rng(100 + seed)
    c = random_cut_circuit(int(rng.integers(3, 7)), int(rng.integers(1, 3)), rng)
    fs = fragment(c)
    q = to_array(reconstruct_pauli(exact_config_results(fs), fs), c.num_clbits)
    np.testing.assert_allclose(q, statevector_probabilities(c.without_cuts()), atol=1e-10)


def test_mass_one_from_any_normalized_results():
    rng = np.random.default_rng(5)
    fs = fragment(random_cut_circuit(4, 2, rng))
    plan = enumerate_pauli_configs(fs)
    results = {}
    for cfg in plan.configs:
        m = config_circuit(fs, cfg).num_clbits
        results[cfg] = np.full(2**m, 1.0 / 2**m)
    q = reconstruct_pauli(results, fs)
    assert sum(q.values()) == pytest.approx(1.0, abs=1e-12)


def test_missing_configuration():
    fs = fragment(ghz_default_cut(ghz_benchmark_circuit(5, seed=1)))
    results = exact_config_results(fs)
    results.pop(next(iter(results)))
    with pytest.raises(ValueError, match="missing result"):
        reconstruct_pauli(results, fs)


def test_sampled_close_to_exact():
    c = ghz_default_cut(ghz_benchmark_circuit(5, seed=3))
    fs = fragment(c)
    q = to_array(run_pauli_cut(fs, 140_000, seed=1), 5)
    assert np.abs(q - exact_probabilities(c.without_cuts())).max() < 0.02
    assert q.sum() == pytest.approx(1.0, abs=0.02)
