"""mKP checks on one eigenvalue of the master T-operator.

A :class:`TauSeries` holds ``T_lam(u)`` for a single eigenstate as
u-polynomials, so shifting ``u`` by one is exact.  Times are
:class:`~mastertau.symfun.ShiftedTimes`; a sum with zero base times and only
minus shifts is a finite sum, and every check at ``t = 0`` runs on such
sums.  The ``truncated`` flag on results says when a cut at ``|lam| <= K``
was actually used.

Residuals never evaluate ``z**u``: Baker-Akhiezer functions enter through
ratios in which that factor cancels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .coderiv import master_t_coeffs, shifted_tau_poly
from .model import SpinChainSpec
from .series import TimeSeries, det_series
from .symfun import (
    Partition,
    ShiftedTimes,
    _as_shifted,
    h_series,
    schur_from_h,
    schur_time_derivative,
    skew_schur,
)

__all__ = [
    "TauSeries",
    "TauValue",
    "Residual",
    "BAValue",
    "tau_eval",
    "tau_expansion",
    "tau_derivative",
    "hirota3",
    "hirota3_shifted",
    "ba_eval",
    "linear_problem_residual",
    "ba10_residual",
    "small_z_limit",
    "hamiltonians_from_tau",
    "principal_branch_evaluations",
]

_BRANCH_COUNTER = [0]


def principal_branch_evaluations() -> int:
    """How many times a ``z**u`` factor has been evaluated numerically."""
    return _BRANCH_COUNTER[0]


@dataclass
class TauSeries:
    """``lam -> T_lam(u)`` (ascending u-coefficients) for one eigenvalue.

    ``eigenvector`` is optional; when present, tau values at a single plus
    shift and ``t1`` derivatives at shifted points are computed exactly from
    the co-derivative construction instead of from the truncated series.
    """

    spec: SpinChainSpec
    coeffs: dict
    eigenvector: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_record(cls, rec, spec: SpinChainSpec) -> "TauSeries":
        coeffs = rec.tau if rec.tau else master_t_coeffs(spec).rayleigh(rec.eigenvector)
        return cls(spec, {Partition(k): np.asarray(v, dtype=complex) for k, v in coeffs.items()},
                   np.asarray(rec.eigenvector))

    @property
    def K(self) -> int:
        return max((lam.size for lam in self.coeffs), default=0)

    @property
    def N(self) -> int:
        return self.spec.N

    def poly(self, lam) -> np.ndarray:
        lam = Partition(lam)
        if len(lam) > self.N:
            return np.zeros(1, dtype=complex)
        if lam not in self.coeffs:
            raise KeyError(f"{lam} is beyond the truncation K = {self.K}")
        return self.coeffs[lam]

    def value(self, lam, u: complex) -> complex:
        return complex(P.polyval(u, self.poly(lam)))

    def exact_shift(self, z: complex, sign: int, t1_derivative: bool = False) -> np.ndarray:
        """u-coefficients of ``T(u, sign [z^-1])`` (or its ``t1`` derivative) at zero times."""
        if self.eigenvector is None:
            raise ValueError("exact shifted values need the eigenvector")
        key = (complex(z), sign, t1_derivative)
        if key not in self._cache:
            ops = shifted_tau_poly(self.spec, z, sign, t1_derivative)
            v = self.eigenvector
            self._cache[key] = np.einsum("i,kij,j->k", v.conj(), ops, v) / np.vdot(v, v)
        return self._cache[key]


@dataclass(frozen=True)
class TauValue:
    value: complex
    truncated: bool

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)


Residual = TauValue


@dataclass(frozen=True)
class BAValue:
    """A BA function value with its factors kept apart.

    ``value = z**exponent * exp(exp_sign * xi) * ratio``.  The ``z**u``
    power is only evaluated (on the principal branch) when :attr:`value`
    is requested.
    """

    z: complex
    exponent: complex
    exp_sign: int
    xi: complex
    ratio: complex
    truncated: bool = False

    @property
    def parts(self) -> tuple:
        return self.exponent, self.exp_sign, self.ratio

    @property
    def value(self) -> complex:
        _BRANCH_COUNTER[0] += 1
        return self.z**self.exponent * np.exp(self.exp_sign * self.xi) * self.ratio


@lru_cache(maxsize=4096)
def _schur_values(t: ShiftedTimes, lams: tuple) -> tuple:
    order = max((lam[0] + len(lam) for lam in lams if lam), default=1)
    h = h_series(t, order)
    return tuple(schur_from_h(lam, h) for lam in lams)


def _is_exact(t: ShiftedTimes, K: int, N: int) -> bool:
    return t.finite_support and K >= len(t.shifts) * N


def _single_plus(t: ShiftedTimes):
    if t.base_is_zero and len(t.shifts) == 1 and t.shifts[0][0] > 0:
        return t.shifts[0][1]
    return None


def tau_eval(tau: TauSeries, u: complex, t) -> TauValue:
    """``sum_lam T_lam(u) s_lam(t)``; ``truncated`` marks a cut series."""
    t = _as_shifted(t)
    z = _single_plus(t)
    if z is not None and tau.eigenvector is not None:
        return TauValue(complex(P.polyval(u, tau.exact_shift(z, +1))), False)
    lams = tuple(tau.coeffs)
    svals = _schur_values(t, lams)
    total = 0j
    for lam, s in zip(lams, svals):
        if s != 0:
            total += s * P.polyval(u, tau.coeffs[lam])
    return TauValue(total, not _is_exact(t, tau.K, tau.N))


def tau_derivative(tau: TauSeries, u: complex, m: int) -> complex:
    """``d/dt_m T(u, t)`` at ``t = 0``: only hooks of size ``m`` contribute."""
    out = 0j
    for lam, c in tau.coeffs.items():
        if lam.size == m:
            d = schur_time_derivative(lam, m)
            if d:
                out += d * P.polyval(u, c)
    if tau.K < m:
        raise ValueError(f"d/dt_{m} needs K >= {m}")
    return out


def tau_expansion(tau: TauSeries, degree: int = 4) -> TimeSeries:
    """Taylor expansion of ``sum_lam T_lam(u) s_lam(t)`` to weighted degree ``degree``."""
    if tau.K < degree:
        raise ValueError("expansion degree exceeds the truncation K")
    # k h_k = sum_j j t_j h_{k-j}
    h = [TimeSeries.constant(degree, 1.0)]
    for k in range(1, degree + 1):
        acc = TimeSeries.constant(degree, 0.0)
        for j in range(1, k + 1):
            acc = acc + TimeSeries.variable(degree, j, float(j)) * h[k - j]
        h.append(acc * (1.0 / k))
    zero = TimeSeries.constant(degree, 0.0)
    out = TimeSeries.constant(degree, 0.0)
    for lam, c in tau.coeffs.items():
        if lam.size > degree:
            continue
        ell = len(lam)
        if ell == 0:
            out = out + TimeSeries.constant(degree, c)
            continue
        mat = [[h[lam[i] - i + j] if 0 <= lam[i] - i + j <= degree else zero
                for j in range(ell)] for i in range(ell)]
        out = out + det_series(mat) * TimeSeries.constant(degree, c)
    return out


def _normalized(terms, truncated: bool) -> Residual:
    scale = max(abs(x) for x in terms)
    total = sum(terms)
    return Residual(total / scale if scale > 0 else 0j, truncated)


def hirota3(tau: TauSeries, u: complex, t, z1: complex, z2: complex, z3: complex) -> Residual:
    """Three-term Hirota residual, normalized by the largest term."""
    zs = (z1, z2, z3)
    if any(z == 0 for z in zs):
        raise ValueError("z's must be nonzero")
    if z1 == z2 or z2 == z3 or z1 == z3:
        # antisymmetric in each pair, identically zero
        return Residual(0j, False)
    t = _as_shifted(t)
    terms, trunc = [], False
    for a, b, c in ((z1, z2, z3), (z2, z3, z1), (z3, z1, z2)):
        x = tau_eval(tau, u, t.minus(a))
        y = tau_eval(tau, u, t.minus(b, c))
        terms.append((b - c) * x.value * y.value)
        trunc = trunc or x.truncated or y.truncated
    return _normalized(terms, trunc)


def hirota3_shifted(tau: TauSeries, u: complex, t, z1: complex, z2: complex) -> Residual:
    """Three-term identity linking ``u`` and ``u + 1``, normalized."""
    if z1 == 0 or z2 == 0:
        raise ValueError("z's must be nonzero")
    if z1 == z2:
        return Residual(0j, False)
    t = _as_shifted(t)
    vals = [
        (z2, tau_eval(tau, u + 1, t.minus(z2)), tau_eval(tau, u, t.minus(z1))),
        (-z1, tau_eval(tau, u + 1, t.minus(z1)), tau_eval(tau, u, t.minus(z2))),
        (z1 - z2, tau_eval(tau, u + 1, t), tau_eval(tau, u, t.minus(z1, z2))),
    ]
    terms = [c * a.value * b.value for c, a, b in vals]
    trunc = any(a.truncated or b.truncated for _, a, b in vals)
    return _normalized(terms, trunc)


def ba_eval(tau: TauSeries, u: complex, t, z: complex, adjoint: bool = False) -> BAValue:
    """BA function ``psi_u(t; z)`` (or ``psi*``) with symbolic ``z**u``."""
    if z == 0:
        raise ValueError("z must be nonzero")
    t = _as_shifted(t)
    den = tau_eval(tau, u, t)
    if den.value == 0:
        raise ZeroDivisionError("tau vanishes at this u")
    num = tau_eval(tau, u, t.plus(z) if adjoint else t.minus(z))
    xi = sum(tk * z ** (k + 1) for k, tk in enumerate(t.base))
    sign = -1 if adjoint else 1
    return BAValue(complex(z), -u if adjoint else u, sign, complex(xi),
                   num.value / den.value, num.truncated or den.truncated)


def _first_derivative_minus(tau: TauSeries, u: complex, z: complex) -> complex:
    """``d/dt_1 T(u, t - [z^-1])`` at ``t = 0`` through skew Schur functions."""
    shift = ShiftedTimes().minus(z)
    out = 0j
    for lam, c in tau.coeffs.items():
        if lam.size == 0:
            continue
        out += skew_schur(lam, (1,), shift) * P.polyval(u, c)
    return out


def linear_problem_residual(tau: TauSeries, u: complex, z: complex,
                            adjoint: bool = False) -> Residual:
    """Residual of the first-flow linear problem for ``psi`` (or ``psi*``) at ``t = 0``.

    The common factor ``z**(+-u)`` is divided out, so each term is a
    rational function of ``z`` and ``u`` and no branch is chosen.
    """
    B = lambda x: tau.value((), x)  # noqa: E731
    dB = lambda x: tau.value((1,), x)  # noqa: E731
    V = lambda x: dB(x + 1) / B(x + 1) - dB(x) / B(x)  # noqa: E731
    if not adjoint:
        zero = ShiftedTimes()
        A = lambda x: tau_eval(tau, x, zero.minus(z))  # noqa: E731
        a, a1 = A(u), A(u + 1)
        da = _first_derivative_minus(tau, u, z)
        terms = [z * a.value / B(u), da / B(u), -a.value * dB(u) / B(u) ** 2,
                 -z * a1.value / B(u + 1), -V(u) * a.value / B(u)]
        trunc = a.truncated or a1.truncated or tau.K < tau.N + 1
        return _normalized(terms, trunc)
    A = lambda x: complex(P.polyval(x, tau.exact_shift(z, +1)))  # noqa: E731
    dA = complex(P.polyval(u, tau.exact_shift(z, +1, t1_derivative=True)))
    a = A(u)
    terms = [z * a / B(u), -dA / B(u), a * dB(u) / B(u) ** 2,
             -z * A(u - 1) / B(u - 1), -V(u - 1) * a / B(u)]
    return _normalized(terms, False)


def hamiltonians_from_tau(tau: TauSeries) -> np.ndarray:
    """Residues of ``T_(1)(u) / T_0(u)`` at the inhomogeneities."""
    us = np.array(tau.spec.u)
    H = []
    for i, ui in enumerate(us):
        den = np.prod([ui - uj for j, uj in enumerate(us) if j != i])
        H.append(tau.value((1,), ui) / den)
    return np.array(H, dtype=complex)


def ba10_residual(tau: TauSeries, u: complex, m: int) -> Residual:
    """Difference of the two sides of the ``t_m`` residue relation at ``t = 0``.

    Left: ``d/dt_m log(T(u+1)/T(u))`` from the Schur expansion.  Right: the
    residue at infinity of ``psi_u psi*_{u+1} z^m`` from the classical
    rational forms, with energies read off ``tau`` itself.  Scaled by
    ``max(1, |left|, |right|)``.
    """
    from .rs import ba_residue_at_infinity

    if m < 1:
        raise ValueError("m must be >= 1")
    B = lambda x: tau.value((), x)  # noqa: E731
    left = tau_derivative(tau, u + 1, m) / B(u + 1) - tau_derivative(tau, u, m) / B(u)
    right = ba_residue_at_infinity(hamiltonians_from_tau(tau), tau.spec.u, u, m)
    scale = max(1.0, abs(left), abs(right))
    return Residual((left - right) / scale, tau.K < m)


def small_z_limit(tau: TauSeries, u: complex, z: complex, sign: int = -1,
               extrapolate: bool = True) -> dict:
    """Small-``z`` limit of ``z^{-+N} T(u, -+[z^-1])`` versus ``T(u -+ 1)``.

    ``sign = -1`` tests ``z^N T(u, -[z^-1]) -> (-1)^N det g T(u + 1)``;
    ``sign = +1`` tests ``z^-N T(u, +[z^-1]) -> (-1)^N T(u - 1) / det g``.
    The raw deviation at ``z`` is first order in ``z``; with ``extrapolate``
    one Richardson step ``2 F(z/2) - F(z)`` removes that term.
    """
    N = tau.N
    detg = np.prod(tau.spec.w)

    def F(x):
        if sign < 0:
            return x**N * tau_eval(tau, u, ShiftedTimes().minus(x)).value
        return x ** (-N) * complex(P.polyval(u, tau.exact_shift(x, +1)))

    if sign < 0:
        target = (-1) ** N * detg * tau.value((), u + 1)
    else:
        target = (-1) ** N * tau.value((), u - 1) / detg
    raw = F(z)
    est = 2 * F(z / 2) - raw if extrapolate else raw
    scale = max(abs(target), 1e-300)
    return {"target": target, "raw": raw, "estimate": est,
            "raw_error": abs(raw - target) / scale,
            "error": abs(est - target) / scale}
