"""Polynomials in the times ``t_1..t_D`` truncated at a weighted degree.

``t_k`` has weight ``k``.  Each monomial's coefficient is a 1-D array of
u-polynomial coefficients (ascending), so products convolve in ``u``.
Only what the determinant-vs-Schur comparison needs is implemented.
"""

from __future__ import annotations

import itertools
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = ["TimeSeries", "det_series", "weighted_monomials"]


def weighted_monomials(degree: int):
    """Exponent tuples ``(e_1..e_degree)`` with ``sum k e_k <= degree``."""
    out = []
    for exps in itertools.product(*[range(degree // k + 1) for k in range(1, degree + 1)]):
        if sum(k * e for k, e in zip(range(1, degree + 1), exps)) <= degree:
            out.append(exps)
    return sorted(out, key=lambda e: (sum((k + 1) * x for k, x in enumerate(e)), e))


def _weight(e) -> int:
    return sum((k + 1) * x for k, x in enumerate(e))


class TimeSeries:
    def __init__(self, degree: int, terms: dict | None = None):
        self.degree = degree
        self.terms = {}
        for e, c in (terms or {}).items():
            if _weight(e) <= degree:
                self.terms[tuple(e)] = np.atleast_1d(np.asarray(c, dtype=complex))

    @classmethod
    def constant(cls, degree: int, c) -> "TimeSeries":
        return cls(degree, {(0,) * degree: c})

    @classmethod
    def variable(cls, degree: int, k: int, scale=1.0) -> "TimeSeries":
        e = [0] * degree
        if k <= degree:
            e[k - 1] = 1
        return cls(degree, {tuple(e): scale})

    def copy(self) -> "TimeSeries":
        return TimeSeries(self.degree, {e: c.copy() for e, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, TimeSeries):
            other = TimeSeries.constant(self.degree, other)
        out = self.copy()
        for e, c in other.terms.items():
            out.terms[e] = P.polyadd(out.terms[e], c) if e in out.terms else c.copy()
        return out

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TimeSeries):
            return TimeSeries(self.degree, {e: c * other for e, c in self.terms.items()})
        out = TimeSeries(self.degree)
        for (e1, c1), (e2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            e = tuple(a + b for a, b in zip(e1, e2))
            if _weight(e) > self.degree:
                continue
            prod = P.polymul(c1, c2)
            out.terms[e] = P.polyadd(out.terms[e], prod) if e in out.terms else prod
        return out

    __rmul__ = __mul__

    def exp(self) -> "TimeSeries":
        """``exp`` of a series with vanishing constant term (scalar coefficients)."""
        zero = (0,) * self.degree
        if zero in self.terms and np.any(self.terms[zero] != 0):
            raise ValueError("exp needs a vanishing constant term")
        out = TimeSeries.constant(self.degree, 1.0)
        term = TimeSeries.constant(self.degree, 1.0)
        for j in range(1, self.degree + 1):
            term = term * self
            out = out + term * (1.0 / factorial(j))
        return out

    def coefficient(self, e) -> np.ndarray:
        return self.terms.get(tuple(e), np.zeros(1, dtype=complex))

    def evaluate(self, t, u=None):
        t = np.asarray(t, dtype=complex)
        total = 0j if u is not None else np.zeros(1, dtype=complex)
        for e, c in self.terms.items():
            mono = np.prod([t[k] ** x for k, x in enumerate(e) if x]) if any(e) else 1.0
            if u is None:
                total = P.polyadd(total, mono * c)
            else:
                total += mono * P.polyval(u, c)
        return total


def det_series(mat) -> TimeSeries:
    """Leibniz determinant of a square list-of-lists of :class:`TimeSeries`."""
    n = len(mat)
    degree = mat[0][0].degree if n else 0
    out = TimeSeries.constant(degree, 0.0) if n else TimeSeries.constant(degree, 1.0)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        term = TimeSeries.constant(degree, (-1.0) ** inv)
        for i in range(n):
            term = term * mat[i][perm[i]]
        out = out + term
    return out
