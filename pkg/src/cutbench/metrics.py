"""Distribution distances and shot-budget allocation."""

from __future__ import annotations

import math
from typing import Mapping

_DIST_TOL = 1e-9


def _check_distribution(p: Mapping[str, float], name: str):
    if any(v < 0 or not math.isfinite(v) for v in p.values()):
        raise ValueError(f"{name} has negative or non-finite entries")
    total = sum(p.values())
    if abs(total - 1.0) > _DIST_TOL:
        raise ValueError(f"{name} sums to {total}, not 1")
    if len({len(k) for k in p}) > 1:
        raise ValueError(f"{name} mixes bitstring lengths")


def hellinger(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    """Hellinger distance ``sqrt(sum (sqrt p_i - sqrt q_i)^2) / sqrt 2``, in [0, 1].

    Keys missing from one side count as probability zero.
    """
    _check_distribution(p, "P")
    _check_distribution(q, "Q")
    if p and q and len(next(iter(p))) != len(next(iter(q))):
        raise ValueError("P and Q are over bitstrings of different length")
    keys = sorted(set(p) | set(q))
    s = sum((math.sqrt(p.get(k, 0.0)) - math.sqrt(q.get(k, 0.0))) ** 2 for k in keys)
    return min(1.0, math.sqrt(s / 2.0))


def allocate_shots(total: int, num_runs: int) -> list[int]:
    """Split ``total`` shots evenly; the remainder goes to the lowest-indexed runs."""
    if num_runs < 1:
        raise ValueError("need at least one run to allocate shots to")
    if total < num_runs:
        raise ValueError(
            f"budget below one shot per subcircuit ({total} shots for {num_runs} runs)"
        )
    base, extra = divmod(total, num_runs)
    return [base + 1 if i < extra else base for i in range(num_runs)]
