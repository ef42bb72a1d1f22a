"""The 24-element single-qubit Clifford group (up to global phase)."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)

GROUP_ORDER = 24


def canonical_phase(u: np.ndarray) -> np.ndarray:
    """Rescale ``u`` so that its first entry of non-negligible size is real and positive."""
    flat = u.ravel()
    k = int(np.flatnonzero(np.abs(flat) > 1e-9)[0])
    return u * (abs(flat[k]) / flat[k])


def _key(u: np.ndarray) -> tuple:
    c = np.round(canonical_phase(u), 9) + 0.0
    return tuple(np.concatenate([c.real.ravel(), c.imag.ravel()]))


@lru_cache(maxsize=1)
def clifford_group() -> tuple[np.ndarray, ...]:
    """Breadth-first closure of ``{I}`` under right-multiplication by H then S.

    The order is fixed: index 0 is the identity, then elements in order of
    discovery.
    """
    elements = [np.eye(2, dtype=complex)]
    seen = {_key(elements[0])}
    frontier = [elements[0]]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (_H, _S):
                v = canonical_phase(u @ g)
                k = _key(v)
                if k not in seen:
                    seen.add(k)
                    elements.append(v)
                    nxt.append(v)
        frontier = nxt
    if len(elements) != GROUP_ORDER:  # pragma: no cover
        raise RuntimeError(f"Clifford closure produced {len(elements)} elements")
    for u in elements:
        u.setflags(write=False)
    return tuple(elements)


def random_clifford_1q(index: int) -> np.ndarray:
    """Element ``index`` (0..23) of the fixed Clifford enumeration; 0 is the identity."""
    if not 0 <= index < GROUP_ORDER:
        raise IndexError(f"Clifford index {index} outside 0..{GROUP_ORDER - 1}")
    return clifford_group()[index].copy()


def clifford_stack() -> np.ndarray:
    """All 24 elements as a ``(24, 2, 2)`` array."""
    return np.stack(clifford_group())
