"""Look inside the randomized Clifford estimator.

Each sample picks, per cut, a Clifford channel (probability 3/5, weight +5)
or a depolarizing channel (probability 2/5, weight -5).  Averaging the
signed one-hot outcomes gives an unbiased estimate whose error falls like
``1/sqrt(N)``.
"""

from __future__ import annotations

import numpy as np

from cutbench.circuit import ghz_benchmark_circuit, ghz_default_cut
from cutbench.simulator import exact_probabilities
from cutbench.wirecut import (
    exact_channel_distributions,
    fragment,
    randomized_cut_samples,
    recombine_channels,
)

circuit = ghz_benchmark_circuit(5, seed=0)
fs = fragment(ghz_default_cut(circuit))
exact = exact_probabilities(circuit)

# Averaging over all 24 Cliffords, and over both reinitialisations, gives the two channel outputs.
channels = exact_channel_distributions(fs)
rec = recombine_channels(channels)
print("3 * P_clifford - 2 * P_depolarizing vs uncut, max abs diff:", f"{np.abs(rec - exact).max():.1e}")

res = randomized_cut_samples(fs, 50_000, seed=0)
print(f"weights take the values {sorted(set(res.weights.tolist()))}; mean weight {res.weights.mean():.3f}")

print(f"\n{'N':>8}  {'max abs error':>14}  {'x sqrt(N)':>10}")
for n in (1_000, 10_000, 100_000):
    errs = [np.abs(randomized_cut_samples(fs, n, seed=s).estimate - exact).max() for s in range(5)]
    print(f"{n:>8}  {np.mean(errs):14.4f}  {np.mean(errs) * np.sqrt(n):10.2f}")
