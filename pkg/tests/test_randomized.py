from __future__ import annotations

import numpy as np
import pytest

from cutbench.circuit import Circuit, CutMarker, Gate, Measure, Prepare, ghz_benchmark_circuit, ghz_default_cut
from cutbench.distributions import to_array
from cutbench.noise import get_noise
from cutbench.simulator import exact_probabilities
from cutbench.wirecut import (
    ChannelChoice,
    Clifford,
    Depolarizing,
    Rotation,
    clip_and_normalize,
    exact_channel_distributions,
    fragment,
    instantiate_fragment,
    instantiate_randomized_sample,
    randomized_cut_samples,
    recombine_channels,
    run_randomized_cut,
    run_randomized_cut_reference,
    sample_channel_choice,
)
from cutbench.wirecut.randomized import _draw, channel_probabilities, sample_weight

from generators import random_cut_circuit
from oracles import density_distribution, dense, statevector_probabilities


@pytest.fixture(scope="module")
def ghz_cut():
    c = ghz_default_cut(ghz_benchmark_circuit(5, seed=0))
    return c, fragment(c)


def test_constants():
    assert channel_probabilities() == pytest.approx((0.6, 0.4))
    assert sample_weight() == 5.0


def test_weights_and_branch_frequency():
    rng = np.random.default_rng(0)
    weights = np.array([sample_channel_choice(rng, 1).weight for _ in range(2_000)])
    assert set(np.unique(weights)) == {5.0, -5.0}
    draws = _draw(np.random.default_rng(1), 100_000, 1, "clifford")
    assert draws.unitary_branch.mean() == pytest.approx(0.6, abs=0.01)
    np.testing.assert_array_equal(draws.weights > 0, draws.unitary_branch[:, 0])


def test_three_cut_weight_magnitude():
    rng = np.random.default_rng(1)
    for _ in range(100):
        choice = sample_channel_choice(rng, 3)
        assert abs(choice.weight) == 125.0
        n_depol = sum(isinstance(ch, Depolarizing) for ch in choice.channels)
        assert np.sign(choice.weight) == (-1) ** n_depol


def test_zero_cuts_rejected():
    with pytest.raises(ValueError):
        sample_channel_choice(np.random.default_rng(0), 0)


def test_rotation_choice_range():
    rng = np.random.default_rng(2)
    for _ in range(200):
        ch = sample_channel_choice(rng, 1, "rotation").channels[0]
        if isinstance(ch, Rotation):
            assert ch.axis in "XYZ" and 0.0 <= ch.theta < 2 * np.pi


def test_batched_weight_mean(ghz_cut):
    _, fs = ghz_cut
    res = randomized_cut_samples(fs, 200_000, seed=3)
    assert set(np.unique(np.abs(res.weights))) == {5.0}
    assert res.weights.mean() == pytest.approx(1.0, abs=0.05)


def _single_wire():
    ops = (Gate("h", (0,)), CutMarker(0, 0), Gate("rz", (0,), (0.3,)), Measure(0, 0))
    return fragment(Circuit(1, 1, ops))


def test_identity_clifford_instantiation():
    fs = _single_wire()
    choice = ChannelChoice((Clifford(0),), 5.0, (0,))
    up, down = instantiate_randomized_sample(fs, choice, {0: 1})
    assert up.ops[0] == Gate("h", (0,))
    assert up.ops[-1] == Measure(0, 0)
    assert np.allclose(up.ops[1].unitary(), np.eye(2))
    assert down.ops[0] == Prepare(0, "one")
    assert np.allclose(down.ops[1].unitary(), np.eye(2))


def test_hadamard_like_clifford_instantiation():
    fs = _single_wire()
    for idx in range(24):
        u = Clifford(idx).unitary()
        down = instantiate_fragment(fs, 1, ChannelChoice((Clifford(idx),), 5.0, (0,)), {0: 0})
        assert np.allclose(down.ops[1].unitary(), u.conj().T)


def test_depolarizing_instantiation_ignores_outcome():
    fs = _single_wire()
    choice = ChannelChoice((Depolarizing("one"),), -5.0, (0,))
    up = instantiate_fragment(fs, 0, choice)
    down = instantiate_fragment(fs, 1, choice, {0: 0})
    assert all(not (isinstance(op, Gate) and op.name == "u1q") for op in up.ops)
    assert down.ops[0] == Prepare(0, "one")


def test_missing_outcome():
    fs = _single_wire()
    with pytest.raises(ValueError, match="outcome"):
        instantiate_fragment(fs, 1, ChannelChoice((Clifford(3),), 5.0, (0,)))


@pytest.mark.parametrize("seed", range(10))
def test_exact_channel_mode(seed):
    rng = np.random.default_rng(seed)
    k = 1 + seed % 2
    n = int(rng.integers(3, 6 if k == 1 else 7))
    c = random_cut_circuit(n, k, rng, depth=5)
    fs = fragment(c)
    dists = exact_channel_distributions(fs)
    assert len(dists) == 2**k
    for dist in dists.values():
        assert dist.min() >= -1e-12 and dist.sum() == pytest.approx(1.0, abs=1e-12)
    rec = recombine_channels(dists)
    np.testing.assert_allclose(rec, statevector_probabilities(c.without_cuts()), atol=1e-10)


def test_batched_matches_reference_runner(ghz_cut):
    c, fs = ghz_cut
    a = randomized_cut_samples(fs, 20_000, seed=4).estimate
    b = run_randomized_cut_reference(fs, 20_000, seed=5).estimate
    exact = exact_probabilities(c.without_cuts())
    # both unbiased with per-entry std about 5 / sqrt(N) * sqrt(p)
    assert np.abs(a - exact).max() < 0.06
    assert np.abs(b - exact).max() < 0.06
    assert np.abs(a - b).max() < 0.08


def test_noisy_estimate_tracks_noisy_channel(ghz_cut):
    c, fs = ghz_cut
    noise = get_noise("brisbane-like")
    q = to_array(run_randomized_cut(fs, 100_000, seed=6, noise=noise), 5)
    noisy_uncut = dense(density_distribution(c.without_cuts(), noise), 5)
    # boundary gates add a little extra noise on top of the uncut channel
    assert np.abs(q - noisy_uncut).max() < 0.08


def test_unknown_variant(ghz_cut):
    with pytest.raises(ValueError, match="variant"):
        run_randomized_cut(ghz_cut[1], 10, seed=0, variant="magic")


def test_clip_and_normalize():
    assert clip_and_normalize({"00": 0.75, "01": -0.25, "11": 0.5}) == {
        "00": pytest.approx(0.6), "01": 0.0, "11": pytest.approx(0.4)}
    with pytest.raises(ValueError):
        clip_and_normalize({"0": -1.0, "1": 0.0})
