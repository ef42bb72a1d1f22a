"""Randomized wire cutting with measure-and-prepare channels.

Every cut wire independently goes through one of two channels:

* unitary channel, chosen with probability ``(d+1)/(2d+1)``: apply a random
  single-qubit Clifford ``U`` before a computational-basis measurement, then
  prepare the observed bit downstream and apply ``U^dagger``;
* depolarizing channel, chosen with probability ``d/(2d+1)``: measure and
  throw the outcome away, then prepare ``|0>`` or ``|1>`` uniformly.

The uncut distribution is ``(d+1) Pr_unitary - d Pr_depolarizing``, so each
sample carries weight ``+(2d+1)`` or ``-(2d+1)`` per cut.  Here ``d = 2``.
The ``rotation`` variant replaces the Clifford by ``exp(-i theta P / 2)``
with ``P`` uniform in {X, Y, Z} and ``theta`` uniform in [0, 2 pi); it is
not unbiased.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from ..circuit import Circuit, Gate
from ..distributions import Distribution, QuasiDistribution, to_dict
from ..noise import NoiseModel
from ..simulator import PAULIS, Slot, as_rng, exact_probabilities, run_trajectories, sample_indices
from .clifford import GROUP_ORDER, clifford_stack, random_clifford_1q
from .fragments import FragmentSet

CUT_DIMENSION = 2
VARIANTS = ("clifford", "rotation")
AXES = ("X", "Y", "Z")

_I2 = np.eye(2, dtype=complex)
_X = PAULIS[1]


def channel_probabilities(d: int = CUT_DIMENSION) -> tuple[float, float]:
    """Selection probabilities of the unitary and depolarizing channels."""
    return (d + 1) / (2 * d + 1), d / (2 * d + 1)


def channel_coefficients(d: int = CUT_DIMENSION) -> tuple[float, float]:
    return float(d + 1), float(-d)


def sample_weight(d: int = CUT_DIMENSION) -> float:
    """Magnitude of the per-cut importance weight, coefficient / probability."""
    return float(2 * d + 1)


@dataclass(frozen=True)
class Clifford:
    index: int

    def unitary(self) -> np.ndarray:
        return random_clifford_1q(self.index)


@dataclass(frozen=True)
class Rotation:
    axis: str
    theta: float

    def unitary(self) -> np.ndarray:
        p = PAULIS[1 + AXES.index(self.axis)]
        return math.cos(self.theta / 2) * _I2 - 1j * math.sin(self.theta / 2) * p


@dataclass(frozen=True)
class Depolarizing:
    state: str  # "zero" or "one"


Channel = Union[Clifford, Rotation, Depolarizing]


@dataclass(frozen=True)
class ChannelChoice:
    """Per-cut channels of one sample, in ``cut_ids`` order, and the sample weight."""

    channels: tuple[Channel, ...]
    weight: float
    cut_ids: tuple[int, ...] = ()

    def channel(self, cut_id: int) -> Channel:
        ids = self.cut_ids or tuple(range(len(self.channels)))
        return self.channels[ids.index(cut_id)]


def rotation_matrices(axes: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Stack of ``exp(-i theta P / 2)`` for axis codes 0, 1, 2 = X, Y, Z."""
    paulis = np.stack(PAULIS[1:])
    c = np.cos(thetas / 2)[..., None, None]
    s = np.sin(thetas / 2)[..., None, None]
    return c * _I2 - 1j * s * paulis[axes]


@dataclass
class _Draws:
    unitary_branch: np.ndarray  # (N, k) bool
    unitaries: np.ndarray  # (N, k, 2, 2), identity on depolarizing cuts
    reinit: np.ndarray  # (N, k) 0/1
    weights: np.ndarray  # (N,)
    index: np.ndarray  # Clifford index, or axis code for rotations
    theta: np.ndarray | None


def _draw(rng: np.random.Generator, num_samples: int, k: int, variant: str) -> _Draws:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    p_unitary, _ = channel_probabilities()
    branch = rng.random((num_samples, k)) < p_unitary
    if variant == "clifford":
        index = rng.integers(0, GROUP_ORDER, size=(num_samples, k))
        theta = None
        mats = clifford_stack()[index]
    else:
        index = rng.integers(0, 3, size=(num_samples, k))
        theta = rng.uniform(0.0, 2 * math.pi, size=(num_samples, k))
        mats = rotation_matrices(index, theta)
    reinit = rng.integers(0, 2, size=(num_samples, k))
    mats = np.where(branch[..., None, None], mats, _I2)
    signs = np.where(branch, 1.0, -1.0).prod(axis=1)
    weights = signs * sample_weight() ** k
    return _Draws(branch, mats, reinit, weights, index, theta)


def sample_channel_choice(
    rng, num_cuts: int, variant: str = "clifford", cut_ids=None
) -> ChannelChoice:
    """Draw the channels of one sample: unitary w.p. 3/5, depolarizing w.p. 2/5, per cut."""
    if num_cuts < 1:
        raise ValueError("need at least one cut")
    rng = as_rng(rng)
    dr = _draw(rng, 1, num_cuts, variant)
    channels: list[Channel] = []
    for j in range(num_cuts):
        if not dr.unitary_branch[0, j]:
            channels.append(Depolarizing(("zero", "one")[dr.reinit[0, j]]))
        elif variant == "clifford":
            channels.append(Clifford(int(dr.index[0, j])))
        else:
            channels.append(Rotation(AXES[dr.index[0, j]], float(dr.theta[0, j])))
    ids = tuple(cut_ids) if cut_ids is not None else tuple(range(num_cuts))
    return ChannelChoice(tuple(channels), float(dr.weights[0]), ids)


# -- instantiation -----------------------------------------------------------


def instantiate_fragment(
    fragset: FragmentSet,
    index: int,
    choice: ChannelChoice,
    outcomes: Mapping[int, int] | None = None,
) -> Circuit:
    """Executable circuit of fragment ``index`` for one sample.

    ``outcomes`` holds the upstream boundary bits of this fragment's incoming
    cuts; they are needed wherever a unitary channel was chosen.
    """
    frag = fragset.fragments[index]
    outcomes = outcomes or {}
    prep_states, prep_gates, out_gates = {}, {}, {}
    for c in frag.in_cuts:
        ch = choice.channel(c)
        if isinstance(ch, Depolarizing):
            prep_states[c] = ch.state
        else:
            if c not in outcomes:
                raise ValueError(f"upstream outcome of cut {c} is required")
            prep_states[c] = ("zero", "one")[outcomes[c]]
            prep_gates[c] = [Gate.u1q(ch.unitary().conj().T, 0)]
    for c in frag.out_cuts:
        ch = choice.channel(c)
        if not isinstance(ch, Depolarizing):
            out_gates[c] = [Gate.u1q(ch.unitary(), 0)]
    return frag.configured(prep_states, prep_gates, out_gates)


def instantiate_randomized_sample(
    fragset: FragmentSet,
    choice: ChannelChoice,
    outcomes: Mapping[int, int] | None = None,
) -> list[Circuit]:
    """Executable circuits of all fragments for one sample, in stitching order."""
    return [instantiate_fragment(fragset, i, choice, outcomes) for i in range(len(fragset.fragments))]


# -- estimators --------------------------------------------------------------


@dataclass
class RandomizedCutResult:
    """Raw samples of the randomized estimator.

    ``outcomes`` holds the global output index of each sample and ``weights``
    its signed weight; ``estimate`` is ``bincount(outcomes, weights) / N``.
    """

    outcomes: np.ndarray
    weights: np.ndarray
    num_clbits: int

    @property
    def num_samples(self) -> int:
        return len(self.weights)

    @property
    def estimate(self) -> np.ndarray:
        hist = np.bincount(self.outcomes, weights=self.weights, minlength=2**self.num_clbits)
        return hist / self.num_samples

    def quasi_distribution(self) -> QuasiDistribution:
        return to_dict(self.estimate, self.num_clbits)


def randomized_cut_samples(
    fragset: FragmentSet,
    num_samples: int,
    seed=None,
    variant: str = "clifford",
    noise: NoiseModel | None = None,
) -> RandomizedCutResult:
    """Run ``num_samples`` end-to-end samples, one shot per fragment each.

    Fragments run in stitching order; all samples of a fragment are advanced
    together, each with its own boundary unitaries and preparations.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    rng = as_rng(seed)
    cut_ids = fragset.cut_ids
    col = {c: j for j, c in enumerate(cut_ids)}
    dr = _draw(rng, num_samples, len(cut_ids), variant)
    udag = np.conj(np.swapaxes(dr.unitaries, -1, -2))
    boundary = np.zeros((num_samples, len(cut_ids)), dtype=np.uint8)
    m = fragset.num_clbits
    gidx = np.zeros(num_samples, dtype=np.int64)
    for frag in fragset.fragments:
        circ, in_slots, out_slots = frag.template()
        slots = {}
        for c in frag.in_cuts:
            j = col[c]
            branch = dr.unitary_branch[:, j]
            bit = np.where(branch, boundary[:, j], dr.reinit[:, j]).astype(bool)
            flip = np.where(bit[:, None, None], _X, _I2)
            prep = np.where(branch[:, None, None], udag[:, j] @ flip, flip)
            slots[in_slots[c]] = Slot(prep, noisy=branch)
        for c in frag.out_cuts:
            j = col[c]
            slots[out_slots[c]] = Slot(dr.unitaries[:, j], noisy=dr.unitary_branch[:, j])
        bits = run_trajectories(circ, num_samples, rng, noise, slots, measure_all=False)
        for c in frag.out_cuts:
            boundary[:, col[c]] = bits[:, frag.out_clbits[c]]
        for local, g in frag.output_map.items():
            gidx |= bits[:, local].astype(np.int64) << (m - 1 - g)
    return RandomizedCutResult(gidx, dr.weights, m)


def run_randomized_cut(
    fragset: FragmentSet,
    num_samples: int,
    seed=None,
    variant: str = "clifford",
    noise: NoiseModel | None = None,
) -> QuasiDistribution:
    """Weighted-sample estimate ``P(b) = 1/N sum_i w_i [b_i = b]`` of the uncut distribution."""
    return randomized_cut_samples(fragset, num_samples, seed, variant, noise).quasi_distribution()


def run_randomized_cut_reference(
    fragset: FragmentSet,
    num_samples: int,
    seed=None,
    variant: str = "clifford",
    noise: NoiseModel | None = None,
) -> RandomizedCutResult:
    """Sample-by-sample version of :func:`randomized_cut_samples`.

    Each sample draws a :class:`ChannelChoice`, instantiates its fragment
    circuits one at a time and simulates single shots.  Slow; kept as an
    independent check of the batched runner.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    rng = as_rng(seed)
    cut_ids = fragset.cut_ids
    m = fragset.num_clbits
    outcomes = np.zeros(num_samples, dtype=np.int64)
    weights = np.zeros(num_samples)
    for s in range(num_samples):
        choice = sample_channel_choice(rng, len(cut_ids), variant, cut_ids)
        boundary: dict[int, int] = {}
        g = 0
        for fi, frag in enumerate(fragset.fragments):
            circ = instantiate_fragment(fragset, fi, choice, boundary)
            idx, nbits = sample_indices(circ, 1, rng, noise, measure_all=False)
            bits = [(int(idx[0]) >> (nbits - 1 - b)) & 1 for b in range(nbits)]
            for c in frag.out_cuts:
                boundary[c] = bits[frag.out_clbits[c]]
            for local, gl in frag.output_map.items():
                g |= bits[local] << (m - 1 - gl)
        outcomes[s] = g
        weights[s] = choice.weight
    return RandomizedCutResult(outcomes, weights, m)


# -- exact channel mode ------------------------------------------------------


def _channel_tensor(fragset: FragmentSet, fi: int, choice: ChannelChoice) -> np.ndarray:
    """Exact ``P(local bits | incoming boundary bits)`` as a tensor (in bits first)."""
    frag = fragset.fragments[fi]
    m = frag.circuit.num_clbits
    ins = frag.in_cuts
    tensor = np.zeros((2,) * len(ins) + (2,) * m)
    for bits in itertools.product((0, 1), repeat=len(ins)):
        circ = instantiate_fragment(fragset, fi, choice, dict(zip(ins, bits)))
        tensor[bits] = exact_probabilities(circ, measure_all=False).reshape((2,) * m)
    return tensor


def _choice_distribution(fragset: FragmentSet, choice: ChannelChoice, cache: dict) -> np.ndarray:
    cut_label = {c: i for i, c in enumerate(fragset.cut_ids)}
    k = len(cut_label)
    operands: list = []
    for fi, frag in enumerate(fragset.fragments):
        key = (
            fi,
            tuple(choice.channel(c) for c in frag.in_cuts),
            tuple(choice.channel(c) for c in frag.out_cuts),
        )
        if key not in cache:
            cache[key] = _channel_tensor(fragset, fi, choice)
        ng = frag.circuit.num_clbits - len(frag.out_cuts)
        labels = [cut_label[c] for c in frag.in_cuts]
        labels += [k + frag.output_map[i] for i in range(ng)]
        labels += [cut_label[c] for c in frag.out_cuts]
        operands += [cache[key], labels]
    written = fragset.written_clbits()
    return np.einsum(*operands, [k + g for g in written]).ravel()


def exact_channel_distributions(fragset: FragmentSet) -> dict[tuple[str, ...], np.ndarray]:
    """Exact output distribution for every assignment of channel types to cuts.

    Keys are tuples of ``"clifford"`` / ``"depolarizing"`` in cut-id order;
    values are dense arrays over the written classical bits, averaged over
    all 24 Cliffords (or both reinitialisation states) on each cut.
    """
    cut_ids = tuple(fragset.cut_ids)
    cache: dict = {}
    out = {}
    for types in itertools.product(("clifford", "depolarizing"), repeat=len(cut_ids)):
        options = [
            [Clifford(i) for i in range(GROUP_ORDER)] if t == "clifford"
            else [Depolarizing("zero"), Depolarizing("one")]
            for t in types
        ]
        acc = None
        count = 0
        for combo in itertools.product(*options):
            dist = _choice_distribution(fragset, ChannelChoice(combo, 1.0, cut_ids), cache)
            acc = dist if acc is None else acc + dist
            count += 1
        out[types] = acc / count
    return out


def recombine_channels(
    channel_dists: Mapping[tuple[str, ...], np.ndarray], d: int = CUT_DIMENSION
) -> np.ndarray:
    """``sum over channel types of prod_j c(type_j) * Pr_types`` with c = d+1 or -d."""
    c_unitary, c_depol = channel_coefficients(d)
    total = None
    for types, dist in channel_dists.items():
        coef = math.prod(c_unitary if t == "clifford" else c_depol for t in types)
        total = coef * dist if total is None else total + coef * dist
    return total


def clip_and_normalize(q: Mapping[str, float]) -> Distribution:
    """Zero out negative entries and rescale to sum 1."""
    clipped = {k: max(v, 0.0) for k, v in q.items()}
    total = sum(clipped.values())
    if total <= 0.0:
        raise ValueError("quasi-distribution has no positive entries")
    return {k: v / total for k, v in clipped.items()}
