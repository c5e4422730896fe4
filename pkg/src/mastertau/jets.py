"""Multilinear jets: the ring C[e_1..e_k] / (e_i^2).

An element is stored as an array whose last axis has length ``2**k``;
entry ``S`` (a bitmask) is the coefficient of ``prod_{i in S} e_i``.  The
coefficient at the full mask is the mixed partial derivative
``d^k / de_1 ... de_k`` at zero, which is all the co-derivative needs.
Leading axes are batch axes, so one call evaluates many index tuples.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

__all__ = ["JetRing"]


class JetRing:
    def __init__(self, k: int):
        self.k = k
        self.size = 1 << k
        left, right, starts = [], [], []
        for S in range(self.size):
            starts.append(len(left))
            A = S
            while True:
                left.append(A)
                right.append(S ^ A)
                if A == 0:
                    break
                A = (A - 1) & S
        self._left = np.array(left)
        self._right = np.array(right)
        self._starts = np.array(starts)

    @property
    def full(self) -> int:
        return self.size - 1

    def const(self, c, shape=()) -> np.ndarray:
        out = np.zeros(tuple(shape) + (self.size,), dtype=complex)
        out[..., 0] = c
        return out

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[..., self._left] * b[..., self._right]
        return np.add.reduceat(prod, self._starts, axis=-1)

    def matmul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Matrix product for jet matrices of shape ``(..., N, N, 2**k)``."""
        prod = np.einsum("...ijp,...jkp->...ikp", x[..., self._left], y[..., self._right])
        return np.add.reduceat(prod, self._starts, axis=-1)

    def _nilpotent(self, a):
        a0 = a[..., 0]
        nil = a.copy()
        nil[..., 0] = 0
        return a0, nil

    def inv(self, a: np.ndarray) -> np.ndarray:
        a0, nil = self._nilpotent(a)
        if np.any(a0 == 0):
            raise ZeroDivisionError("jet with vanishing constant term is not invertible")
        x = -nil / a0[..., None]
        term = self.const(1.0, a0.shape)
        out = term.copy()
        for _ in range(self.k):
            term = self.mul(term, x)
            out = out + term
        return out / a0[..., None]

    def exp(self, a: np.ndarray) -> np.ndarray:
        a0, nil = self._nilpotent(a)
        term = self.const(1.0, a0.shape)
        out = term.copy()
        for j in range(1, self.k + 1):
            term = self.mul(term, nil)
            out = out + term / factorial(j)
        return out * np.exp(a0)[..., None]


@lru_cache(maxsize=8)
def jet_ring(k: int) -> JetRing:
    return JetRing(k)
