"""Conversions between dense probability arrays and bitstring-keyed dicts.

Distributions, quasi-distributions and counts are plain ``dict[str, ...]``
keyed by bitstrings with bit 0 leftmost.  Missing keys read as zero.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

Distribution = dict[str, float]
QuasiDistribution = dict[str, float]
Counts = dict[str, int]


def bitstring(index: int, nbits: int) -> str:
    return format(index, f"0{nbits}b") if nbits else ""


def to_dict(values: np.ndarray, nbits: int, tol: float = 0.0) -> dict[str, float]:
    values = np.asarray(values, dtype=float).ravel()
    (nz,) = np.nonzero(np.abs(values) > tol)
    return {bitstring(int(i), nbits): float(values[i]) for i in nz}


def to_array(dist: Mapping[str, float], nbits: int) -> np.ndarray:
    out = np.zeros(2**nbits)
    for key, value in dist.items():
        if len(key) != nbits:
            raise ValueError(f"bitstring {key!r} does not have length {nbits}")
        out[int(key, 2) if nbits else 0] += value
    return out


def counts_from_indices(indices: np.ndarray, nbits: int) -> Counts:
    hist = np.bincount(np.asarray(indices, dtype=np.int64), minlength=2**nbits)
    (nz,) = np.nonzero(hist)
    return {bitstring(int(i), nbits): int(hist[i]) for i in nz}


def normalize_counts(counts: Mapping[str, int]) -> Distribution:
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("counts are empty")
    return {k: v / total for k, v in counts.items()}


def key_length(dist: Mapping[str, float]) -> int:
    lengths = {len(k) for k in dist}
    if len(lengths) > 1:
        raise ValueError("bitstrings of mixed length")
    return lengths.pop() if lengths else 0


def max_abs_difference(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    keys = sorted(set(p) | set(q))
    return max((abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys), default=0.0)


def total_variation(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    keys = sorted(set(p) | set(q))
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
