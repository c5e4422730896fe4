"""Spin-chain energies from classical data.

For a weight sector ``m`` the energies ``H`` of the chain are the points
where the Lax matrix ``Y0(H) = diag(H) C`` (``C_ij = 1/(u_j - u_i + 1)``,
unit diagonal) has the twist eigenvalues ``w_a`` with multiplicities
``m_a``.  That is the polynomial system

    F_j(H) = tr Y0(H)^j - sum_a m_a w_a^j = 0,   j = 1..n,

solved here by multistart Newton with deflation of roots already found.

The power sums alone admit extra isolated roots that are not chain
energies (already for ``n = 2`` the highest-weight sector has two).  The
Baker-Akhiezer function ``det(I - g/z) (1 + 1^t (u - U)^{-1} (z - Y0)^{-1} Udot 1)``
must be polynomial in ``1/z``, and ``det(I - g/z)`` has simple zeros, so
chain energies also satisfy

    G(H) = prod_{a: m_a > 0} (Y0(H) - w_a) H = 0.

Roots of ``F`` violating ``G = 0`` are kept in ``SectorSolutions.rejected``.
``G`` also regularizes the final polish: at the highest weight the Jacobian
of ``F`` alone is singular.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial, prod

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import SpinChainSpec
from .tensorspace import weight_vectors

__all__ = [
    "ClassicalSolution",
    "SectorSolutions",
    "MatchReport",
    "residual",
    "ba_constraint",
    "jacobian",
    "solve_sector",
    "solve_all",
    "match_spectra",
    "highest_weight_energies",
]

log = logging.getLogger(__name__)

DEDUPE_RADIUS = 1e-6
RESIDUAL_TOL = 1e-9


def _coupling(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    C = 1.0 / (u[None, :] - u[:, None] + 1.0)
    np.fill_diagonal(C, 1.0)
    return C


def _targets(m, w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    m = np.asarray(m)
    n = int(m.sum())
    return np.array([np.sum(m * w**j) for j in range(1, n + 1)])


def residual(H, spec: SpinChainSpec, m) -> np.ndarray:
    """``F_j(H)`` for ``j = 1..n``."""
    C = _coupling(spec.u)
    Y = np.asarray(H, dtype=complex)[:, None] * C
    n = len(spec.u)
    out = np.empty(n, dtype=complex)
    Yj = np.eye(n, dtype=complex)
    for j in range(n):
        Yj = Yj @ Y
        out[j] = np.trace(Yj)
    return out - _targets(m, spec.w)


def jacobian(H, spec: SpinChainSpec) -> np.ndarray:
    """``dF_j/dH_i = j (C Y^{j-1})_ii``."""
    C = _coupling(spec.u)
    Y = np.asarray(H, dtype=complex)[:, None] * C
    n = len(spec.u)
    J = np.empty((n, n), dtype=complex)
    Yj = np.eye(n, dtype=complex)
    for j in range(1, n + 1):
        J[j - 1] = j * np.diag(C @ Yj)
        Yj = Yj @ Y
    return J


def ba_constraint(H, spec: SpinChainSpec, m) -> np.ndarray:
    """``G(H) = prod_{a: m_a > 0} (Y0(H) - w_a) H``."""
    H = np.asarray(H, dtype=complex)
    Y = H[:, None] * _coupling(spec.u)
    v = H.copy()
    for a, ma in enumerate(m):
        if ma:
            v = Y @ v - spec.w[a] * v
    return v


def _ba_constraint_jacobian(H, spec, m) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    C = _coupling(spec.u)
    n = len(H)
    Y = H[:, None] * C
    factors = [Y - spec.w[a] * np.eye(n) for a, ma in enumerate(m) if ma]
    J = np.zeros((n, n), dtype=complex)
    for i in range(n):
        dY = np.zeros((n, n), dtype=complex)
        dY[i] = C[i]
        # product rule over the factors, then the trailing H
        for k in range(len(factors)):
            term = H.copy()
            for idx in range(len(factors) - 1, -1, -1):
                term = (dY if idx == k else factors[idx]) @ term
            J[:, i] += term
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        for f in reversed(factors):
            e = f @ e
        J[:, i] += e
    return J


def _scaled_residual(H, spec, m) -> np.ndarray:
    t = _targets(m, spec.w)
    return np.abs(residual(H, spec, m)) / np.maximum(1.0, np.abs(t))


@dataclass
class ClassicalSolution:
    H: np.ndarray
    residuals: np.ndarray
    m: tuple
    matched_record: object | None = None
    polish_history: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals, initial=0.0))


class SectorSolutions(list):
    """Solutions of one sector, with the count the sector should have.

    ``rejected`` lists roots of the power-sum system that fail the
    Baker-Akhiezer constraint.
    """

    def __init__(self, items, m, target: int, starts: int, rejected=()):
        super().__init__(items)
        self.m = tuple(m)
        self.target = target
        self.starts = starts
        self.rejected = list(rejected)

    @property
    def shortfall(self) -> int:
        return max(0, self.target - len(self))


def highest_weight_energies(spec: SpinChainSpec, a: int) -> np.ndarray:
    """``H_i = w_a prod_{j != i} (u_i - u_j + 1) / (u_i - u_j)``."""
    u = np.array(spec.u)
    out = []
    for i in range(len(u)):
        others = np.delete(u, i)
        out.append(spec.w[a] * np.prod((u[i] - others + 1) / (u[i] - others)))
    return np.array(out, dtype=complex)


def _log_deflation_gradient(x: np.ndarray, roots: list) -> np.ndarray:
    """Gradient of ``log prod_r (||x - r||^-2 + 1)`` in the real representation."""
    g = np.zeros_like(x)
    for r in roots:
        d = x - r
        s = float(d @ d)
        g += (-2.0 * d / s**2) / (1.0 / s + 1.0)
    return g


def _deflation(x, roots) -> float:
    return prod(1.0 / float((x - r) @ (x - r)) + 1.0 for r in roots)


def _to_real(H):
    return np.concatenate([H.real, H.imag])


def _to_complex(x):
    n = len(x) // 2
    return x[:n] + 1j * x[n:]


def _deflated_newton(H0, spec, m, roots_real, *, max_iter=80, tol=1e-11):
    x = _to_real(np.asarray(H0, dtype=complex))
    t = np.maximum(1.0, np.abs(_targets(m, spec.w)))

    def merit(x):
        F = residual(_to_complex(x), spec, m) / t
        return np.linalg.norm(F) * _deflation(x, roots_real)

    f = merit(x)
    for _ in range(max_iter):
        H = _to_complex(x)
        F = residual(H, spec, m)
        if np.linalg.norm(F / t) < tol:
            return H
        try:
            d = -np.linalg.solve(jacobian(H, spec), F)
        except np.linalg.LinAlgError:
            return None
        d = _to_real(d)
        if roots_real:
            a = _log_deflation_gradient(x, roots_real)
            den = 1.0 - float(a @ d)
            if abs(den) < 1e-14:
                return None
            d = d / den
        step = 1.0
        for _ in range(20):
            x_new = x + step * d
            f_new = merit(x_new)
            if np.isfinite(f_new) and f_new < f:
                break
            step *= 0.5
        else:
            x_new = x + step * d
            f_new = merit(x_new)
        if not np.all(np.isfinite(x_new)):
            return None
        x, f = x_new, f_new
    H = _to_complex(x)
    return H if np.linalg.norm(residual(H, spec, m) / t) < 1e-6 else None


def _augmented(H, spec, m):
    t = np.maximum(1.0, np.abs(_targets(m, spec.w)))
    scale = max(1.0, float(np.max(np.abs(spec.w)))) ** (sum(1 for x in m if x) + 1)
    R = np.concatenate([residual(H, spec, m) / t, ba_constraint(H, spec, m) / scale])
    J = np.vstack([jacobian(H, spec) / t[:, None], _ba_constraint_jacobian(H, spec, m) / scale])
    return R, J


def _polish(H, spec, m, iters: int = 8):
    """Gauss-Newton on ``(F, G)``; the history holds the max scaled residual."""
    history = [float(np.max(np.abs(_augmented(H, spec, m)[0])))]
    for _ in range(iters):
        if history[-1] < 1e-15:
            break
        R, J = _augmented(H, spec, m)
        H_new = H - np.linalg.lstsq(J, R, rcond=None)[0]
        r_new = float(np.max(np.abs(_augmented(H_new, spec, m)[0])))
        if r_new >= history[-1]:
            break
        H = H_new
        history.append(r_new)
    return H, history


def _starts(spec, m, count, rng, records=None):
    w = np.array(spec.w, dtype=complex)
    labels = np.repeat(np.arange(len(w)), np.asarray(m, dtype=int))
    n = len(labels)
    out = []
    if records is not None:
        for rec in records:
            if tuple(rec.m) == tuple(m):
                for _ in range(3):
                    out.append(np.asarray(rec.H) * (1 + 0.05 * (rng.normal(size=n)
                                                              + 1j * rng.normal(size=n))))
    while len(out) < count:
        perm = rng.permutation(labels)
        noise = rng.normal(size=n) + 1j * rng.normal(size=n)
        spread = rng.choice([0.3, 1.0, 2.0])
        out.append(w[perm] * (1 + spread * noise))
    return out[:count] if records is None else out


def solve_sector(spec: SpinChainSpec, m, budget: int | None = None, *,
                 mode: str = "blind", records=None, seed: int | None = None,
                 exhaustive: bool = False) -> SectorSolutions:
    """All energy vectors of weight sector ``m`` reachable from ``budget`` starts.

    ``mode="blind"`` uses only random starts built from the twist
    eigenvalues.  ``mode="verify"`` also seeds starts near the energies of
    ``records`` (quantum data) in the sector.  The default budget is fifty
    starts per expected solution.  With ``exhaustive`` the whole budget is
    spent even after the expected count is reached, so surplus roots would
    show up.
    """
    spec.check_generic()
    m = tuple(int(x) for x in m)
    n = len(spec.u)
    if len(m) != spec.N or sum(m) != n or min(m) < 0:
        raise ValueError(f"{m} is not a weight of the chain")
    target = factorial(n) // prod(factorial(x) for x in m)
    if mode not in ("blind", "verify"):
        raise ValueError("mode must be 'blind' or 'verify'")
    if mode == "verify" and records is None:
        raise ValueError("verify mode needs quantum records")
    budget = 50 * target if budget is None else budget
    if n == 0:
        return SectorSolutions([ClassicalSolution(np.zeros(0, dtype=complex),
                                                  np.zeros(0), m)], m, 1, 0)
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    starts = _starts(spec, m, budget, rng, records if mode == "verify" else None)
    found: list[ClassicalSolution] = []
    rejected: list[np.ndarray] = []
    roots_real: list[np.ndarray] = []
    used = 0
    for H0 in starts:
        if len(found) >= target and not exhaustive:
            break
        used += 1
        H = _deflated_newton(H0, spec, m, roots_real)
        if H is None:
            continue
        found_H = [s.H for s in found]
        known = found_H + rejected
        if any(np.max(np.abs(H - K)) < DEDUPE_RADIUS for K in known):
            continue
        g = np.max(np.abs(ba_constraint(H, spec, m))) / max(1.0, np.max(np.abs(H)))
        if g > 1e-4:
            rejected.append(H)
            roots_real.append(_to_real(H))
            continue
        H, hist = _polish(H, spec, m)
        res = _scaled_residual(H, spec, m)
        if np.max(res) > RESIDUAL_TOL or hist[-1] > RESIDUAL_TOL:
            continue
        if any(np.max(np.abs(H - K)) < DEDUPE_RADIUS for K in found_H):
            continue
        found.append(ClassicalSolution(H, res, m, polish_history=hist))
        roots_real.append(_to_real(H))
    out = SectorSolutions(found, m, target, used, rejected)
    if out.shortfall:
        log.warning("sector %s: found %d of %d solutions after %d starts",
                    m, len(out), target, used)
    return out


def solve_all(spec: SpinChainSpec, budget: int | None = None, *, mode: str = "blind",
              records=None, exhaustive: bool = False) -> list[SectorSolutions]:
    """:func:`solve_sector` over every weight, in descending weight order."""
    return [solve_sector(spec, m, budget, mode=mode, records=records, exhaustive=exhaustive)
            for m in weight_vectors(spec.N, len(spec.u))]


@dataclass
class MatchReport:
    pairs: list
    unmatched_solutions: list
    unmatched_records: list
    max_distance: float
    tol: float

    @property
    def perfect(self) -> bool:
        return (not self.unmatched_solutions and not self.unmatched_records
                and self.max_distance <= self.tol)


def match_spectra(solutions, records, tol: float = 1e-6) -> MatchReport:
    """Bipartite matching of classical solutions to quantum records (max-norm on ``H``).

    Sets ``matched_record`` on each matched solution.  Pairs farther apart
    than ``tol`` are reported as unmatched on both sides.
    """
    sols = list(solutions)
    recs = list(records)
    if not sols or not recs:
        return MatchReport([], list(range(len(sols))), list(range(len(recs))),
                           0.0 if not sols and not recs else np.inf, tol)
    D = np.array([[np.max(np.abs(np.asarray(s.H) - np.asarray(r.H)), initial=0.0)
                   if tuple(s.m) == tuple(r.m) else np.inf for r in recs] for s in sols])
    finite = np.where(np.isfinite(D), D, 1e300)
    rows, cols = linear_sum_assignment(finite)
    pairs, max_d = [], 0.0
    matched_s, matched_r = set(), set()
    for i, j in zip(rows, cols):
        if D[i, j] <= tol:
            pairs.append((int(i), int(j), float(D[i, j])))
            sols[i].matched_record = recs[j]
            matched_s.add(int(i))
            matched_r.add(int(j))
            max_d = max(max_d, float(D[i, j]))
        else:
            max_d = max(max_d, float(D[i, j]))
    return MatchReport(pairs,
                       [i for i in range(len(sols)) if i not in matched_s],
                       [j for j in range(len(recs)) if j not in matched_r],
                       max_d, tol)
