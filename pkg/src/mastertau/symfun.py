"""Partitions, complete/Schur polynomials in the times and GL(N) characters.

Time vectors are finitely supported, ``t = (t_1, t_2, ...)``.  Miwa shifts
``t +/- [z^-1]`` (i.e. ``t_k -> t_k +/- z^-k / k``) are never expanded into
infinite vectors: :class:`ShiftedTimes` keeps them symbolic and
:func:`h_series` resolves them by multiplying generating series, so that
``h_k`` is exact for any ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Partition",
    "ShiftedTimes",
    "partitions_up_to",
    "h_series",
    "h_poly",
    "schur",
    "schur_from_h",
    "skew_schur",
    "character",
    "power_sum_times",
    "schur_time_derivative",
]


class Partition(tuple):
    """Weakly decreasing tuple of positive integers; ``Partition()`` is empty."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be weakly decreasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def size(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition(sum(1 for p in self if p > j) for j in range(self[0]))

    def contains(self, other: Sequence[int]) -> bool:
        """True when the diagram of ``other`` fits inside this one."""
        return len(other) <= len(self) and all(o <= s for o, s in zip(other, self))

    @classmethod
    def row(cls, s: int) -> "Partition":
        return cls((s,) if s else ())

    @classmethod
    def column(cls, a: int) -> "Partition":
        return cls((1,) * a)

    def __repr__(self) -> str:
        return f"Partition({list(self)})"


@dataclass(frozen=True)
class ShiftedTimes:
    """Times ``base`` plus a list of symbolic Miwa shifts.

    ``shifts`` holds pairs ``(sign, z)`` with ``sign`` in ``{+1, -1}``; the
    represented vector is ``base + sum(sign * [z^-1])``.
    """

    base: tuple = ()
    shifts: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(complex(x) for x in self.base))
        sh = tuple((int(s), complex(z)) for s, z in self.shifts)
        for s, z in sh:
            if s not in (1, -1):
                raise ValueError("shift sign must be +1 or -1")
            if z == 0:
                raise ValueError("Miwa shift point z must be nonzero")
        object.__setattr__(self, "shifts", sh)

    @classmethod
    def zero(cls) -> "ShiftedTimes":
        return cls()

    def shift(self, sign: int, z: complex) -> "ShiftedTimes":
        return ShiftedTimes(self.base, self.shifts + ((sign, z),))

    def minus(self, *zs: complex) -> "ShiftedTimes":
        return ShiftedTimes(self.base, self.shifts + tuple((-1, z) for z in zs))

    def plus(self, *zs: complex) -> "ShiftedTimes":
        return ShiftedTimes(self.base, self.shifts + tuple((1, z) for z in zs))

    @property
    def base_is_zero(self) -> bool:
        return all(x == 0 for x in self.base)

    @property
    def finite_support(self) -> bool:
        """True when every ``h_k`` vanishes beyond a finite degree."""
        return self.base_is_zero and all(s < 0 for s, _ in self.shifts)

    @property
    def max_nonzero_degree(self) -> int | None:
        return len(self.shifts) if self.finite_support else None

    def components(self, kmax: int) -> np.ndarray:
        """Explicit ``t_1..t_kmax`` of the shifted vector (for testing)."""
        t = np.zeros(kmax, dtype=complex)
        t[: min(kmax, len(self.base))] = self.base[:kmax]
        for s, z in self.shifts:
            k = np.arange(1, kmax + 1)
            t += s * z ** (-k) / k
        return t


def _as_shifted(t) -> ShiftedTimes:
    if isinstance(t, ShiftedTimes):
        return t
    if t is None:
        return ShiftedTimes()
    return ShiftedTimes(tuple(np.atleast_1d(np.asarray(t, dtype=complex))))


def _exp_series(a: np.ndarray) -> np.ndarray:
    """Coefficients of ``exp(A(w))`` for a series ``A`` with ``A[0] == 0``."""
    order = len(a) - 1
    e = np.zeros(order + 1, dtype=complex)
    e[0] = 1.0
    k = np.arange(order + 1)
    for j in range(1, order + 1):
        e[j] = np.dot(k[1 : j + 1] * a[1 : j + 1], e[j - 1 :: -1][: j]) / j
    return e


def h_series(t, order: int) -> np.ndarray:
    """``[h_0(t), ..., h_order(t)]`` for (possibly shifted) times ``t``.

    The exponential generating series of the base times is multiplied by
    ``(1 - w/z)`` for each minus shift and divided by it for each plus shift.
    """
    t = _as_shifted(t)
    order = int(order)
    if order < 0:
        return np.zeros(0, dtype=complex)
    a = np.zeros(order + 1, dtype=complex)
    m = min(order, len(t.base))
    a[1 : m + 1] = t.base[:m]
    h = _exp_series(a)
    for sign, z in t.shifts:
        if sign < 0:
            # multiply by (1 - w/z)
            h[1:] = h[1:] - h[:-1] / z
        else:
            # divide by (1 - w/z): h_k += h_{k-1}/z, cumulatively
            for j in range(1, order + 1):
                h[j] += h[j - 1] / z
    return h


def h_poly(k: int, t) -> complex:
    """Complete homogeneous polynomial ``h_k(t)``; zero for ``k < 0``."""
    if k < 0:
        return 0j
    return complex(h_series(t, k)[k])


def _jt_matrix(lam: Sequence[int], mu: Sequence[int], h: np.ndarray) -> np.ndarray:
    ell = len(lam)
    mu = tuple(mu) + (0,) * (ell - len(mu))
    mat = np.zeros((ell, ell), dtype=complex)
    for i in range(ell):
        for j in range(ell):
            k = lam[i] - mu[j] - i + j
            if 0 <= k < len(h):
                mat[i, j] = h[k]
    return mat


def schur_from_h(lam: Sequence[int], h: np.ndarray) -> complex:
    """Jacobi-Trudi determinant from precomputed ``h_0..h_M``."""
    if len(lam) == 0:
        return 1.0 + 0j
    if lam[0] + len(lam) - 1 >= len(h):
        raise ValueError("h series too short for this partition")
    return complex(np.linalg.det(_jt_matrix(lam, (), h)))


def schur(lam: Sequence[int], t) -> complex:
    """Schur polynomial ``s_lam(t) = det h_{lam_i - i + j}(t)``."""
    if len(lam) == 0:
        return 1.0 + 0j
    return schur_from_h(lam, h_series(t, lam[0] + len(lam) - 1))


def skew_schur(lam: Sequence[int], mu: Sequence[int], t) -> complex:
    """Skew Schur polynomial ``s_{lam/mu}(t) = det h_{lam_i - mu_j - i + j}``."""
    lam = tuple(lam)
    mu = tuple(mu)
    if not Partition(lam).contains(mu):
        return 0j
    if len(lam) == 0:
        return 1.0 + 0j
    h = h_series(t, lam[0] + len(lam) - 1)
    return complex(np.linalg.det(_jt_matrix(lam, mu, h)))


def power_sum_times(w: Sequence[complex], kmax: int) -> np.ndarray:
    """Times ``y_k = (sum_a w_a^k) / k`` for ``k = 1..kmax``."""
    w = np.asarray(w, dtype=complex)
    k = np.arange(1, kmax + 1)
    return np.array([np.sum(w**kk) for kk in k]) / k


def character(lam: Sequence[int], w: Sequence[complex], *, distinct_tol: float = 1e-6) -> complex:
    """Character of ``diag(w)`` in the irreducible representation ``lam``.

    Uses the Weyl ratio of alternants when the ``w_a`` are well separated and
    falls back to Jacobi-Trudi in the power-sum times otherwise.
    """
    lam = tuple(lam)
    w = np.asarray(w, dtype=complex)
    N = len(w)
    if len(lam) > N:
        return 0j
    if len(lam) == 0:
        return 1.0 + 0j
    gaps = [abs(a - b) for a, b in itertools.combinations(w, 2)]
    scale = max(1.0, float(np.max(np.abs(w))))
    if all(g > distinct_tol * scale for g in gaps):
        parts = lam + (0,) * (N - len(lam))
        num = np.array([[wj ** (parts[i] + N - 1 - i) for wj in w] for i in range(N)])
        den = np.array([[wj ** (N - 1 - i) for wj in w] for i in range(N)])
        return complex(np.linalg.det(num) / np.linalg.det(den))
    return schur(lam, power_sum_times(w, lam[0] + len(lam)))


@lru_cache(maxsize=None)
def _partitions_of(k: int, max_rows: int, max_part: int) -> tuple:
    if k == 0:
        return ((),)
    if max_rows == 0:
        return ()
    out = []
    for first in range(min(k, max_part), 0, -1):
        for rest in _partitions_of(k - first, max_rows - 1, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions_up_to(K: int, max_rows: int) -> list[Partition]:
    """All partitions with ``|lam| <= K`` and at most ``max_rows`` rows.

    Ordered by size, then lexicographically descending within each size.
    """
    if K < 0 or max_rows < 1:
        raise ValueError("need K >= 0 and max_rows >= 1")
    return [Partition(p) for k in range(K + 1) for p in _partitions_of(k, max_rows, k)]


def schur_time_derivative(lam: Sequence[int], m: int) -> int:
    """``d s_lam / d t_m`` at ``t = 0``.

    Only hooks of size ``m`` contribute: ``(-1)^b`` for ``lam = (m-b, 1^b)``.
    """
    lam = tuple(lam)
    if sum(lam) != m or m == 0:
        return 0
    if len(lam) > 1 and lam[1] > 1:
        return 0
    return (-1) ** (len(lam) - 1)
