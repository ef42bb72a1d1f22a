from __future__ import annotations

import itertools

import numpy as np
import pytest

from cutbench.wirecut import canonical_phase, clifford_group, random_clifford_1q

from oracles import I2, PAULI, X, Y, Z


def _phase_equal(a, b):
    return np.allclose(canonical_phase(a), canonical_phase(b), atol=1e-9)


def test_identity_first():
    np.testing.assert_allclose(random_clifford_1q(0), I2)


def test_order_and_distinct():
    group = clifford_group()
    assert len(group) == 24
    for a, b in itertools.combinations(group, 2):
        assert not _phase_equal(a, b)


def test_paulis_map_to_signed_paulis():
    signed = [s * p for p in (X, Y, Z) for s in (1, -1)]
    for u in clifford_group():
        images = []
        for p in (X, Y, Z):
            img = u @ p @ u.conj().T
            match = [k for k, q in enumerate(signed) if np.allclose(img, q, atol=1e-9)]
            assert len(match) == 1
            images.append(match[0] // 2)
        assert sorted(images) == [0, 1, 2]


def test_closed_under_products():
    group = clifford_group()
    for a, b in itertools.product(group, repeat=2):
        assert any(_phase_equal(a @ b, g) for g in group)


def test_unitary_two_design():
    # frame potential of a unitary 2-design is 2
    group = clifford_group()
    fp = np.mean([abs(np.trace(a.conj().T @ b)) ** 4 for a, b in itertools.product(group, repeat=2)])
    assert fp == pytest.approx(2.0, abs=1e-9)


def test_bounds():
    with pytest.raises(IndexError):
        random_clifford_1q(24)
    with pytest.raises(IndexError):
        random_clifford_1q(-1)


def test_returned_copy_is_writable():
    u = random_clifford_1q(3)
    u[0, 0] = 7.0
    assert clifford_group()[3][0, 0] != 7.0
