from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cutbench.metrics import allocate_shots, hellinger

CLOSED_FORM = math.sqrt(1 - math.sqrt(0.5))  # Bhattacharyya coefficient sqrt(0.5)


def test_closed_form_case():
    assert hellinger({"0": 0.5, "1": 0.5}, {"0": 1.0}) == pytest.approx(0.5411961001, abs=1e-6)
    assert hellinger({"0": 0.5, "1": 0.5}, {"0": 1.0}) == pytest.approx(CLOSED_FORM, abs=1e-12)


def test_disjoint_and_identical():
    assert hellinger({"0": 1.0}, {"1": 1.0}) == pytest.approx(1.0)
    assert hellinger({"01": 0.3, "10": 0.7}, {"01": 0.3, "10": 0.7}) == 0.0


@pytest.mark.parametrize("bad", [{"0": 0.7}, {"0": 1.2, "1": -0.2}, {"0": 0.5, "11": 0.5}, {"0": math.nan}])
def test_invalid_inputs(bad):
    with pytest.raises(ValueError):
        hellinger(bad, {"0": 1.0})


def test_length_mismatch():
    with pytest.raises(ValueError):
        hellinger({"0": 1.0}, {"00": 1.0})


def _dists(n):
    return st.lists(st.floats(0, 1), min_size=2**n, max_size=2**n).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: {format(i, f"0{n}b"): x / sum(v) for i, x in enumerate(v)}
    )


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(_dists(n), _dists(n))))
def test_hellinger_properties(pair):
    p, q = pair
    h = hellinger(p, q)
    assert 0.0 <= h <= 1.0
    assert h == pytest.approx(hellinger(q, p), abs=1e-12)
    assert hellinger(p, p) == pytest.approx(0.0, abs=1e-7)
    bc = sum(math.sqrt(p[k] * q.get(k, 0.0)) for k in p)
    assert h == pytest.approx(math.sqrt(max(0.0, 1 - bc)), abs=1e-6)


def test_allocate_examples():
    assert allocate_shots(3000, 12) == [250] * 12
    assert allocate_shots(100, 3) == [34, 33, 33]
    with pytest.raises(ValueError, match="budget below one shot per subcircuit"):
        allocate_shots(2, 3)
    with pytest.raises(ValueError):
        allocate_shots(10, 0)


@given(st.integers(1, 10**7), st.integers(1, 500))
def test_allocate_conservation(total, runs):
    if total < runs:
        with pytest.raises(ValueError):
            allocate_shots(total, runs)
        return
    alloc = allocate_shots(total, runs)
    assert sum(alloc) == total and len(alloc) == runs
    assert max(alloc) - min(alloc) <= 1
    assert alloc == sorted(alloc, reverse=True)
