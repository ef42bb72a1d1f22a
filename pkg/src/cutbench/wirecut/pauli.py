"""Exact wire cutting in the Pauli basis.

For one cut wire with upstream statistics ``u`` (cut bit measured in basis
P) and downstream statistics ``d`` (cut wire prepared in a given state)::

    Pr(b) = 1/2 * sum_i U_i * D_i

    U_1 = 2 u_{0,Z}            D_1 = d_zero
    U_2 = 2 u_{1,Z}            D_2 = d_one
    U_3 = u_{0,X} - u_{1,X}    D_3 = 2 d_plus - d_zero - d_one
    U_4 = u_{0,Y} - u_{1,Y}    D_4 = 2 d_i - d_zero - d_one

Several cuts multiply: every cut contributes an independent term index and
a factor 1/2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..circuit import Circuit, Gate
from ..distributions import QuasiDistribution, to_array, to_dict
from ..metrics import allocate_shots
from ..noise import NoiseModel
from ..simulator import as_rng, exact_probabilities, sample_indices
from .fragments import FragmentSet

BASES = ("Z", "X", "Y")
PREP_STATES = ("zero", "one", "plus", "i_state")

# rotations taking the X / Y eigenbasis onto the computational basis
BASIS_GATES = {
    "Z": (),
    "X": (Gate("h", (0,)),),
    "Y": (Gate("rz", (0,), (-math.pi / 2,)), Gate("h", (0,))),
}


@dataclass(frozen=True)
class PauliTerm:
    basis: str
    upstream: tuple[tuple[int, float], ...]  # (cut-bit outcome, coefficient)
    downstream: tuple[tuple[str, float], ...]  # (preparation, coefficient)


PAULI_TERMS = (
    PauliTerm("Z", ((0, 2.0),), (("zero", 1.0),)),
    PauliTerm("Z", ((1, 2.0),), (("one", 1.0),)),
    PauliTerm("X", ((0, 1.0), (1, -1.0)), (("plus", 2.0), ("zero", -1.0), ("one", -1.0))),
    PauliTerm("Y", ((0, 1.0), (1, -1.0)), (("i_state", 2.0), ("zero", -1.0), ("one", -1.0))),
)
TERM_PREFACTOR = 0.5


@dataclass(frozen=True)
class Primitive:
    basis: str
    outcome: int
    prep: str
    coefficient: float


@dataclass(frozen=True)
class PauliTermTable:
    cut_ids: tuple[int, ...]
    terms: tuple[PauliTerm, ...] = PAULI_TERMS

    @property
    def prefactor(self) -> float:
        return TERM_PREFACTOR ** len(self.cut_ids)

    def primitives(self) -> list[Primitive]:
        """Signed (basis, outcome, preparation) products for a single cut."""
        return [
            Primitive(t.basis, o, prep, cu * cd)
            for t in self.terms
            for o, cu in t.upstream
            for prep, cd in t.downstream
        ]

    def upstream_vector(self, term: int) -> np.ndarray:
        vec = np.zeros(2)
        for o, c in self.terms[term].upstream:
            vec[o] = c
        return vec

    def downstream_coefficient(self, term: int, prep: str) -> float:
        return dict(self.terms[term].downstream).get(prep, 0.0)


@dataclass(frozen=True)
class FragmentConfig:
    """One executable setting of a fragment: boundary preparations and bases."""

    fragment: int
    preps: tuple[tuple[int, str], ...] = ()
    bases: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class PauliPlan:
    table: PauliTermTable
    terms: tuple[tuple[float, dict], ...]  # (coefficient, {cut_id: Primitive})
    configs: tuple[FragmentConfig, ...]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)


def enumerate_pauli_configs(fragset: FragmentSet) -> PauliPlan:
    """Signed terms of the multi-cut expansion and the distinct fragment runs it needs.

    A fragment with ``a`` incoming and ``b`` outgoing cuts needs ``4**a * 3**b``
    runs.
    """
    table = PauliTermTable(tuple(fragset.cut_ids))
    prims = table.primitives()
    terms = []
    for combo in itertools.product(prims, repeat=len(table.cut_ids)):
        coef = table.prefactor * math.prod(p.coefficient for p in combo)
        terms.append((coef, dict(zip(table.cut_ids, combo))))
    configs = []
    for fi, frag in enumerate(fragset.fragments):
        ins, outs = frag.in_cuts, frag.out_cuts
        for bases in itertools.product(BASES, repeat=len(outs)):
            for preps in itertools.product(PREP_STATES, repeat=len(ins)):
                configs.append(FragmentConfig(fi, tuple(zip(ins, preps)), tuple(zip(outs, bases))))
    return PauliPlan(table, tuple(terms), tuple(configs))


def config_circuit(fragset: FragmentSet, config: FragmentConfig) -> Circuit:
    frag = fragset.fragments[config.fragment]
    return frag.configured(
        prep_states=dict(config.preps),
        out_gates={c: list(BASIS_GATES[b]) for c, b in config.bases},
    )


def exact_config_results(fragset: FragmentSet, plan: PauliPlan | None = None) -> dict:
    """Exact local output distribution (dense) of every configuration."""
    plan = plan or enumerate_pauli_configs(fragset)
    return {
        cfg: exact_probabilities(config_circuit(fragset, cfg), measure_all=False)
        for cfg in plan.configs
    }


def sample_config_results(
    fragset: FragmentSet,
    shots: int,
    seed=None,
    noise: NoiseModel | None = None,
    plan: PauliPlan | None = None,
) -> dict:
    """Empirical local distributions, with ``shots`` split evenly over configurations."""
    plan = plan or enumerate_pauli_configs(fragset)
    rng = as_rng(seed)
    out = {}
    for cfg, n_shots in zip(plan.configs, allocate_shots(shots, len(plan.configs))):
        circ = config_circuit(fragset, cfg)
        idx, m = sample_indices(circ, n_shots, rng, noise, measure_all=False)
        out[cfg] = np.bincount(idx, minlength=2**m) / n_shots
    return out


def _dense(result, nbits: int) -> np.ndarray:
    if isinstance(result, Mapping):
        return to_array(result, nbits)
    arr = np.asarray(result, dtype=float).ravel()
    if arr.size != 2**nbits:
        raise ValueError(f"result has {arr.size} entries, expected {2**nbits}")
    return arr


def _fragment_tensor(fragset: FragmentSet, fi: int, results, table: PauliTermTable) -> np.ndarray:
    frag = fragset.fragments[fi]
    ins, outs = frag.in_cuts, frag.out_cuts
    m = frag.circuit.num_clbits
    ng = m - len(outs)
    tensor = np.zeros((4,) * (len(ins) + len(outs)) + (2,) * ng)
    for t_out in itertools.product(range(4), repeat=len(outs)):
        bases = tuple((c, table.terms[t].basis) for c, t in zip(outs, t_out))
        for preps in itertools.product(PREP_STATES, repeat=len(ins)):
            cfg = FragmentConfig(fi, tuple(zip(ins, preps)), bases)
            try:
                probs = results[cfg]
            except KeyError:
                raise ValueError(f"missing result for configuration {cfg}") from None
            p = _dense(probs, m).reshape((2,) * m)
            for t in t_out:
                p = np.tensordot(p, table.upstream_vector(t), axes=([ng], [0]))
            for t_in in itertools.product(range(4), repeat=len(ins)):
                coef = math.prod(
                    table.downstream_coefficient(t, prep) for t, prep in zip(t_in, preps)
                )
                if coef:
                    tensor[t_in + t_out] += coef * p
    return tensor


def reconstruct_pauli(
    config_results: Mapping,
    fragset: FragmentSet,
    table: PauliTermTable | None = None,
) -> QuasiDistribution:
    """Recombine per-configuration fragment statistics into the uncut distribution.

    ``config_results`` maps every :class:`FragmentConfig` of
    :func:`enumerate_pauli_configs` to a local distribution (dict or dense
    array).  With exact statistics the result equals the uncut circuit's
    exact distribution.
    """
    table = table or PauliTermTable(tuple(fragset.cut_ids))
    cut_label = {c: i for i, c in enumerate(fragset.cut_ids)}
    k = len(cut_label)
    operands: list = []
    for fi, frag in enumerate(fragset.fragments):
        tensor = _fragment_tensor(fragset, fi, config_results, table)
        labels = [cut_label[c] for c in frag.in_cuts] + [cut_label[c] for c in frag.out_cuts]
        ng = frag.circuit.num_clbits - len(frag.out_cuts)
        labels += [k + frag.output_map[i] for i in range(ng)]
        operands += [tensor, labels]
    written = fragset.written_clbits()
    out = np.einsum(*operands, [k + g for g in written]) * table.prefactor
    return _embed(out, written, fragset.num_clbits)


def _embed(values: np.ndarray, written: list[int], num_clbits: int) -> QuasiDistribution:
    """Expand a tensor over the written clbits to bitstrings over the whole register."""
    values = np.asarray(values).ravel()
    if written == list(range(num_clbits)):
        return to_dict(values, num_clbits)
    idx = np.zeros(values.size, dtype=np.int64)
    basis = np.arange(values.size)
    for j, g in enumerate(written):
        bit = (basis >> (len(written) - 1 - j)) & 1
        idx += bit << (num_clbits - 1 - g)
    full = np.zeros(2**num_clbits)
    np.add.at(full, idx, values)
    return to_dict(full, num_clbits)


def run_pauli_cut(
    fragset: FragmentSet,
    shots: int,
    seed=None,
    noise: NoiseModel | None = None,
) -> QuasiDistribution:
    """Sample every configuration with an even share of ``shots`` and recombine."""
    plan = enumerate_pauli_configs(fragset)
    results = sample_config_results(fragset, shots, seed, noise, plan)
    return reconstruct_pauli(results, fragset, plan.table)
