"""Rational Ruijsenaars-Schneider system.

Phase points are ``(q, v)`` with ``v = dq/dt_1``.  The Lax matrix is
``Y_ij = v_i / (q_i - q_j - 1)``.  Flows are integrated in canonical
variables ``(q, p)``, where ``v_i = -exp(-p_i) prod_{k != i} (q_ik + 1) / q_ik``
and the m-th Hamiltonian is ``tr Y^m``.

The quantum side enters through :func:`y0_from_record`: with ``q = u`` and
``v = -H`` for an eigenstate, ``Y_0`` has the twist eigenvalues as spectrum.
"""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .model import NonGenericSpecError, SpinChainSpec
from .series import TimeSeries, det_series

__all__ = [
    "RSPhase",
    "LaxData",
    "CollisionError",
    "RootCollisionError",
    "lax",
    "momenta",
    "velocities",
    "hamiltonian",
    "flow_vector_field",
    "flow",
    "integrate",
    "Trajectory",
    "lax_residual",
    "rs_force",
    "a_matrix",
    "a_matrix_from_definition",
    "dY_dq_fixed_p",
    "char_poly",
    "twist_poly",
    "c_matrix",
    "y0_from_record",
    "y0_from_h",
    "tau_det",
    "tau_det_expansion",
    "ba_rational",
    "BARational",
    "ba_residue_at_infinity",
    "laurent_coefficients",
    "track_roots",
    "write_trajectory_csv",
]

log = logging.getLogger(__name__)

GAP_TOL = 1e-8


class CollisionError(RuntimeError):
    """A trajectory left the generic region (``q_i - q_j`` near 0 or +-1)."""

    def __init__(self, message: str, closest: float, time: complex | None = None):
        self.closest = closest
        self.time = time
        super().__init__(message)


class RootCollisionError(RuntimeError):
    """Two roots met along a tracking path, so their labels are ambiguous."""


def _check_gaps(q: np.ndarray, tol: float = GAP_TOL) -> None:
    for i, j in itertools.combinations(range(len(q)), 2):
        d = q[i] - q[j]
        if abs(d) <= tol:
            raise NonGenericSpecError("coordinates pairwise distinct", f"q[{i}] ~ q[{j}]")
        if abs(d - 1) <= tol or abs(d + 1) <= tol:
            raise NonGenericSpecError("no unit gaps between coordinates",
                                      f"q[{i}] - q[{j}] = {d}")


def _gap_margin(q: np.ndarray) -> float:
    """Distance of the configuration to the non-generic set."""
    out = np.inf
    for i, j in itertools.combinations(range(len(q)), 2):
        d = q[i] - q[j]
        out = min(out, abs(d), abs(d - 1), abs(d + 1))
    return out


@dataclass
class RSPhase:
    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=complex).ravel()
        self.v = np.asarray(self.v, dtype=complex).ravel()
        if self.q.shape != self.v.shape:
            raise ValueError("q and v must have the same length")

    @property
    def n(self) -> int:
        return len(self.q)


@dataclass
class LaxData:
    U: np.ndarray
    Udot: np.ndarray
    Y: np.ndarray
    Q: np.ndarray
    T_tilde: np.ndarray
    T: np.ndarray
    W: np.ndarray
    M: np.ndarray


def _differences(q):
    return q[:, None] - q[None, :]


def lax(state: RSPhase) -> LaxData:
    """Lax data ``U, Y, Q, T~, T, W`` and ``M`` at a phase point."""
    q, v = state.q, state.v
    n = len(q)
    _check_gaps(q)
    d = _differences(q)
    off = ~np.eye(n, dtype=bool)
    Q = 1.0 / (d - 1.0)
    Y = v[:, None] * Q
    inv_d = np.zeros((n, n), dtype=complex)
    inv_d[off] = 1.0 / d[off]
    inv_d1 = 1.0 / (d + 1.0)

    T_tilde = v[:, None] * inv_d
    diag_tt = inv_d @ v - inv_d1 @ v
    T_tilde[np.diag_indices(n)] = diag_tt

    T = (v[:, None] * (inv_d - Q)) * off
    T[np.diag_indices(n)] = inv_d @ v - (inv_d1 * off) @ v

    Wmat = np.zeros((n, n), dtype=complex)
    Wmat[off] = 2.0 / (d[off] * (d[off] ** 2 - 1.0))
    W = v * (Wmat @ v)

    # M = Udot (Qdot + Q T - Udot^{-1} T Udot Q), with Qdot_ij = -(v_i - v_j) Q_ij^2
    Qdot = -(v[:, None] - v[None, :]) * Q**2
    Ud = np.diag(v)
    M = Ud @ (Qdot + Q @ T - np.diag(1.0 / v) @ T @ Ud @ Q) if np.all(v != 0) else None

    out = LaxData(np.diag(q), Ud, Y, Q, T_tilde, T, np.diag(W), M)
    if not np.allclose(Y, Ud @ Q, rtol=1e-13, atol=0) or not np.allclose(
            T, T_tilde - Y, rtol=1e-10, atol=1e-12 * (1 + np.abs(T_tilde).max(initial=0))):
        raise AssertionError("internal Lax identities failed")
    return out


def momenta(state: RSPhase) -> np.ndarray:
    """Canonical momenta (principal logarithms).

    Momenta are defined modulo ``2 pi i``; only ``exp(-p)`` enters the
    dynamics, so the branch never matters once a flow has started.
    """
    q, v = state.q, state.v
    if np.any(v == 0):
        raise ZeroDivisionError("momenta need nonzero velocities")
    d = _differences(q)
    n = len(q)
    off = ~np.eye(n, dtype=bool)
    ratio = np.where(off, (d + 1.0) / np.where(off, d, 1.0), 1.0)
    return -np.log(-v) + np.log(ratio).sum(axis=1)


def velocities(q, p) -> np.ndarray:
    q = np.asarray(q, dtype=complex)
    p = np.asarray(p, dtype=complex)
    d = _differences(q)
    off = ~np.eye(len(q), dtype=bool)
    ratio = np.where(off, (d + 1.0) / np.where(off, d, 1.0), 1.0)
    return -np.exp(-p) * ratio.prod(axis=1)


def hamiltonian(q, p, m: int) -> complex:
    """``tr Y^m`` as a function of canonical variables."""
    Y = lax(RSPhase(q, velocities(q, p))).Y
    return np.trace(np.linalg.matrix_power(Y, m))


def a_matrix(state: RSPhase, i: int) -> np.ndarray:
    """Closed-form matrix ``A^{(i)}`` (``i`` zero-based)."""
    q = state.q
    n = len(q)
    Y = lax(state).Y
    uik = q[i] - q
    delta = np.eye(n)
    A = np.zeros((n, n), dtype=complex)
    others = [l for l in range(n) if l != i]
    s = sum(1.0 / (uik[l] + 1) - 1.0 / uik[l] for l in others)
    for j in range(n):
        for k in range(n):
            # the constant is delta_ij: a bare 1 breaks every row but the i-th
            term = (1 - delta[i, j]) / (uik[k] - 1) - delta[i, k] / (q[i] - q[j] + 1) + delta[i, j]
            if k != i:
                term -= 1.0 / uik[k]
            if j == i:
                term += s
            A[j, k] = -Y[j, k] * term
    return A


def c_matrix(q, i: int) -> np.ndarray:
    q = np.asarray(q, dtype=complex)
    uli = q - q[i]
    diag = 1.0 / (uli + 1.0)
    mask = np.arange(len(q)) != i
    diag[mask] -= 1.0 / uli[mask]
    return np.diag(diag)


def a_matrix_from_definition(state: RSPhase, i: int) -> np.ndarray:
    """``A^{(i)}`` assembled from its defining expression (zero-based ``i``)."""
    lx = lax(state)
    q, v = state.q, state.v
    n = len(q)
    Tp = lx.T_tilde - np.diag(np.diag(lx.T_tilde))
    E = np.zeros((n, n))
    E[i, i] = 1.0
    A = (lx.Y @ E @ Tp - Tp @ E @ lx.Y) / v[i]
    # d/du_j log((u_il + 1)/u_il) = phi(u_il) (delta_ij - delta_lj)
    coef = np.zeros(n, dtype=complex)
    for l in range(n):
        if l == i:
            continue
        x = q[i] - q[l]
        phi = 1.0 / (x + 1.0) - 1.0 / x
        coef[i] += phi
        coef[l] -= phi
    return A - np.diag(coef) @ lx.Y


def flow_vector_field(q, p, m: int):
    """Right-hand side ``(dq/dt_m, dp/dt_m)`` of the m-th canonical flow.

    ``dq_i = -m (Y^m)_ii``; ``dp_i = -d(tr Y^m)/dq_i`` at fixed ``p``, taken
    from the closed form ``-m tr((dY/dq_i) Y^{m-1})`` with
    ``dY/dq_i|_p = -A^{(i)} - [C^{(i)}, Y]``.
    """
    state = RSPhase(q, velocities(q, p))
    Y = lax(state).Y
    n = len(state.q)
    Ym1 = np.linalg.matrix_power(Y, m - 1)
    dq = -m * np.diag(Ym1 @ Y)
    # the commutator part of dY/dq_i is traceless against Y^{m-1}
    dp = np.array([m * np.trace(a_matrix(state, i) @ Ym1) for i in range(n)])
    return dq, dp


def dY_dq_fixed_p(q, p, i: int) -> np.ndarray:
    """``dY/dq_i`` at fixed momenta, by direct differentiation (zero-based ``i``)."""
    q = np.asarray(q, dtype=complex)
    state = RSPhase(q, velocities(q, p))
    n = len(q)
    v = state.v
    Q = lax(state).Q
    # d v_k / d q_i at fixed p: v_k * d/dq_i sum_l log((q_kl+1)/q_kl)
    dlogv = np.zeros(n, dtype=complex)
    for k in range(n):
        for l in range(n):
            if l == k:
                continue
            x = q[k] - q[l]
            phi = 1.0 / (x + 1.0) - 1.0 / x
            if k == i:
                dlogv[k] += phi
            if l == i:
                dlogv[k] -= phi
    dQ = np.zeros((n, n), dtype=complex)
    dQ[i, :] -= Q[i, :] ** 2
    dQ[:, i] += Q[:, i] ** 2
    return (v * dlogv)[:, None] * Q + v[:, None] * dQ


@dataclass
class Trajectory:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return np.array([velocities(q, p) for q, p in zip(self.q, self.p)])

    def state(self, k: int) -> RSPhase:
        return RSPhase(self.q[k], velocities(self.q[k], self.p[k]))


def integrate(state: RSPhase, m: int, times, *, direction: complex = 1.0,
              rtol: float = 1e-12, atol: float = 1e-12,
              margin: float = 1e-4) -> Trajectory:
    """Integrate the m-th flow along ``t_m = s * direction`` for real ``s`` in ``times``.

    Uses scipy's DOP853 on the complex canonical state.  Raises
    :class:`CollisionError` if the configuration comes within ``margin`` of
    a collision or unit gap.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    times = np.asarray(times, dtype=float)
    if times[0] != 0:
        times = np.concatenate([[0.0], times])
        drop = True
    else:
        drop = False
    n = state.n
    lax(state)
    y0 = np.concatenate([state.q, momenta(state)])
    direction = complex(direction)

    def rhs(s, y):
        dq, dp = flow_vector_field(y[:n], y[n:], m)
        return direction * np.concatenate([dq, dp])

    def near(s, y):
        return _gap_margin(y[:n]) - margin

    near.terminal = True

    if n == 0:
        qs = np.zeros((len(times), 0), dtype=complex)
        traj = Trajectory(times, qs, qs.copy())
        return Trajectory(times[1:], qs[1:], qs[1:]) if drop else traj
    if times[-1] == 0:
        Ys = np.repeat(y0[None, :], len(times), axis=0)
    else:
        sol = solve_ivp(rhs, (0.0, times[-1]), y0.astype(complex), method="DOP853",
                        t_eval=times, rtol=rtol, atol=atol,
                        events=near if n > 1 else None)
        if sol.status == 1:
            y = sol.y_events[0][0]
            raise CollisionError(
                f"trajectory reached the non-generic set at s = {sol.t_events[0][0]:.6g}",
                closest=_gap_margin(y[:n]) + margin, time=sol.t_events[0][0] * direction)
        if sol.status != 0:
            raise RuntimeError(sol.message)
        Ys = sol.y.T
    traj = Trajectory(times, Ys[:, :n], Ys[:, n:])
    if drop:
        traj = Trajectory(traj.times[1:], traj.q[1:], traj.p[1:])
    return traj


def flow(state: RSPhase, m: int, t: float, *, direction: complex = 1.0,
         rtol: float = 1e-12, atol: float = 1e-12) -> RSPhase:
    """Phase point after flowing for time ``t`` (along ``direction``) under ``tr Y^m``."""
    traj = integrate(state, m, [0.0, t], direction=direction, rtol=rtol, atol=atol)
    return traj.state(-1)


def rs_force(q, v) -> np.ndarray:
    """Right-hand side of the equations of motion ``q'' = -W``."""
    q = np.asarray(q, dtype=complex)
    v = np.asarray(v, dtype=complex)
    d = _differences(q)
    off = ~np.eye(len(q), dtype=bool)
    K = np.zeros_like(d)
    K[off] = 2.0 / (d[off] * (d[off] ** 2 - 1.0))
    return -v * (K @ v)


def lax_residual(state: RSPhase, m: int = 1, *, samples: int = 10, horizon: float = 0.5,
                 h: float = 1e-5) -> dict:
    """Lax-equation residual along the m = 1 flow, plus the algebraic identities.

    ``Ydot`` is a fourth-order central difference of step ``h`` taken on
    short integrations around each sample point.  Returns the maximum over ``samples`` points of
    ``||Ydot - [T, Y]||``, ``||M - W Q||`` and ``||T v + W 1||``.
    """
    if m != 1:
        raise ValueError("the Lax partner T is defined for the first flow only")
    centers = np.linspace(0.0, horizon, samples)
    traj = integrate(state, 1, centers)
    lax_res = mwq = tvw = 0.0
    for k in range(len(centers)):
        here = traj.state(k)
        # short local legs keep the integrator's global error out of the difference
        fwd = integrate(here, 1, [h, 2 * h])
        bwd = integrate(here, 1, [h, 2 * h], direction=-1.0)
        Yf = [lax(fwd.state(j)).Y for j in range(2)]
        Yb = [lax(bwd.state(j)).Y for j in range(2)]
        # five-point central stencil
        Ydot = (8 * (Yf[0] - Yb[0]) - (Yf[1] - Yb[1])) / (12 * h)
        lx = lax(here)
        lax_res = max(lax_res, np.linalg.norm(Ydot - (lx.T @ lx.Y - lx.Y @ lx.T)))
        mwq = max(mwq, np.linalg.norm(lx.M - lx.W @ lx.Q))
        tvw = max(tvw, np.abs(lx.T @ np.diag(lx.Udot) + np.diag(lx.W)).max())
    return {"lax": lax_res, "M=WQ": mwq, "Tv=-W": tvw}


def y0_from_h(H, u) -> np.ndarray:
    """``Y_0`` built from energies ``H`` and inhomogeneities ``u``."""
    H = np.asarray(H, dtype=complex)
    u = np.asarray(u, dtype=complex)
    C = 1.0 / (u[None, :] - u[:, None] + 1.0)
    np.fill_diagonal(C, 1.0)
    return H[:, None] * C


def y0_from_record(rec, spec: SpinChainSpec) -> np.ndarray:
    """Lax matrix at ``t = 0`` for a spectrum record: ``q = u``, ``v = -H``."""
    Y = lax(RSPhase(np.array(spec.u), -np.asarray(rec.H))).Y
    return Y


def _time_vector(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    return t


def tau_det(rec, spec: SpinChainSpec, u: complex, t) -> complex:
    """Determinant form of one eigenvalue of the master T-operator.

    ``t`` is a finite sequence ``(t_1, t_2, ...)``.
    """
    t = _time_vector(t)
    Y0 = y0_from_record(rec, spec) if len(rec.H) else np.zeros((0, 0))
    w = np.array(spec.w)
    n = len(spec.u)
    arg = u * np.eye(n) - np.diag(np.array(spec.u))
    Yk = np.eye(n, dtype=complex)
    xi = 0j
    for k, tk in enumerate(t, start=1):
        Yk = Yk @ Y0
        arg = arg + k * tk * Yk
        xi += tk * np.sum(w**k)
    return np.exp(xi) * (np.linalg.det(arg) if n else 1.0)


def tau_det_expansion(rec, spec: SpinChainSpec, degree: int = 4) -> TimeSeries:
    """Taylor coefficients of :func:`tau_det` in ``t`` up to weighted degree ``degree``.

    Coefficients are u-polynomials (ascending), so the comparison with the
    Schur expansion is exact in ``u``.
    """
    n = len(spec.u)
    w = np.array(spec.w)
    xi = TimeSeries.constant(degree, 0.0)
    for k in range(1, degree + 1):
        xi = xi + TimeSeries.variable(degree, k, np.sum(w**k))
    prefactor = xi.exp()
    if n == 0:
        return prefactor
    Y0 = y0_from_record(rec, spec)
    powers = [np.linalg.matrix_power(Y0, k) for k in range(degree + 1)]
    mat = []
    for i in range(n):
        row = []
        for j in range(n):
            entry = TimeSeries.constant(degree, [-spec.u[i], 1.0] if i == j else 0.0)
            for k in range(1, degree + 1):
                entry = entry + TimeSeries.variable(degree, k, k * powers[k][i, j])
            row.append(entry)
        mat.append(row)
    return prefactor * det_series(mat)


@dataclass
class BARational:
    """Tau-ratio part of a stationary BA function, in two equivalent forms."""

    det_form: complex
    resolvent_form: complex

    @property
    def value(self) -> complex:
        return self.resolvent_form

    @property
    def discrepancy(self) -> float:
        return abs(self.det_form - self.resolvent_form) / max(abs(self.resolvent_form), 1e-300)


def ba_rational(rec, spec: SpinChainSpec, u: complex, z: complex,
                adjoint: bool = False) -> BARational:
    """Stationary BA tau ratio from the classical Lax data.

    For ``psi`` this is ``det(I - g/z) (1 + 1^t (u - U0)^{-1} (z - Y0)^{-1} Udot 1)``;
    for ``psi*`` it is ``det(I - g/z)^{-1} (1 - 1^t (z - Y0)^{-1} (u - U0)^{-1} Udot 1)``.
    """
    w = np.array(spec.w)
    n = len(spec.u)
    c0 = np.prod(1.0 - w / z)
    if n == 0:
        val = 1.0 / c0 if adjoint else c0
        return BARational(val, val)
    U0 = np.diag(np.array(spec.u))
    Y0 = y0_from_record(rec, spec)
    Ud1 = -np.asarray(rec.H, dtype=complex)
    one = np.ones(n)
    I = np.eye(n)
    uU = u * I - U0
    zY = z * I - Y0
    denom = np.linalg.det(uU) * np.linalg.det(zY)
    if adjoint:
        det_form = np.linalg.det(zY @ uU + Y0) / denom / c0
        res = 1.0 - one @ np.linalg.solve(zY, np.linalg.solve(uU, Ud1))
        return BARational(det_form, res / c0)
    det_form = c0 * np.linalg.det(uU @ zY - Y0) / denom
    res = 1.0 + one @ np.linalg.solve(uU, np.linalg.solve(zY, Ud1))
    return BARational(det_form, c0 * res)


def ba_residue_at_infinity(H, u_sites, u: complex, m: int) -> complex:
    """``res_inf(psi_u psi*_{u+1} z^m dz)`` at ``t = 0`` from the classical forms.

    Both BA functions are expanded at ``z = infinity`` using
    ``(z - Y)^{-1} = sum_j Y^j z^{-j-1}``; the ``det(I - g/z)`` factors cancel,
    and the residue is the coefficient of ``z^{-m}`` in the product of the
    two bracketed factors (convention ``res_inf z^{-1} dz = 1``).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    H = np.asarray(H, dtype=complex)
    n = len(H)
    if n == 0:
        return 0j
    sites = np.asarray(u_sites, dtype=complex)
    Y = y0_from_h(H, sites)
    Ud1 = -H
    one = np.ones(n)
    left = one / (u - sites)
    right = Ud1 / (u + 1.0 - sites)
    alpha = np.zeros(m + 1, dtype=complex)  # coefficient of z^{-k}
    beta = np.zeros(m + 1, dtype=complex)
    Yj_ud = Ud1.astype(complex)
    one_Yj = one.astype(complex)
    for k in range(1, m + 1):
        alpha[k] = left @ Yj_ud
        beta[k] = one_Yj @ right
        Yj_ud = Y @ Yj_ud
        one_Yj = one_Yj @ Y
    out = alpha[m] - beta[m]
    for i in range(1, m):
        out -= alpha[i] * beta[m - i]
    return out


def laurent_coefficients(f, center: complex, radius: float, orders, npts: int = 128):
    """Laurent coefficients ``c_k`` of ``f`` about ``center`` by the trapezoid rule.

    ``orders`` lists the requested ``k`` (negative for principal part).
    Accurate when ``f`` is analytic in an annulus around the circle.
    """
    theta = 2 * np.pi * np.arange(npts) / npts
    zeta = radius * np.exp(1j * theta)
    vals = np.array([f(center + x) for x in zeta])
    return {k: np.mean(vals * zeta ** (-k)) for k in orders}


def _match_roots(prev, new):
    D = np.abs(prev[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(D)
    order = np.empty(len(prev), dtype=int)
    order[rows] = cols
    picked = D[rows, cols]
    # ambiguity: some root is nearly as close to a different candidate
    ambiguous = False
    for i, j in zip(rows, cols):
        others = np.delete(D[i], j)
        if len(others) and D[i, j] > 0.5 * others.min():
            ambiguous = True
    return order, picked, ambiguous


def track_roots(rec, spec: SpinChainSpec, path, *, max_halvings: int = 30,
                collision_tol: float = 1e-9) -> np.ndarray:
    """Roots of ``det(u - U0 + t1 Y0)`` along a sequence of ``t1`` values.

    These are the eigenvalues of ``U0 - t1 Y0``.  Rows of the result follow
    the labels of ``spec.u`` at ``t1 = 0``; continuity is enforced by
    nearest-neighbour matching with step halving on ambiguous steps.
    """
    path = np.asarray(path, dtype=complex)
    n = len(spec.u)
    U0 = np.diag(np.array(spec.u))
    Y0 = y0_from_record(rec, spec) if n else np.zeros((0, 0))
    if n == 0:
        return np.zeros((len(path), 0), dtype=complex)

    def roots(t):
        r = np.linalg.eigvals(U0 - t * Y0)
        if n > 1:
            gaps = np.abs(r[:, None] - r[None, :])[~np.eye(n, dtype=bool)]
            if gaps.min() < collision_tol:
                raise RootCollisionError(f"roots collide near t1 = {t}")
        return r

    out = np.empty((len(path), n), dtype=complex)
    current = np.array(spec.u, dtype=complex)
    t_cur = 0j
    for idx, target in enumerate(path):
        stack = [target]
        halvings = 0
        while stack:
            t_next = stack[-1]
            cand = roots(t_next)
            order, _, ambiguous = _match_roots(current, cand)
            if ambiguous and halvings < max_halvings and t_next != t_cur:
                stack.append(0.5 * (t_cur + t_next))
                halvings += 1
                continue
            if ambiguous and t_next != t_cur:
                raise RootCollisionError(f"ambiguous continuation near t1 = {t_next}")
            current = cand[order]
            t_cur = t_next
            stack.pop()
        out[idx] = current
    return out


def write_trajectory_csv(path, times, roots) -> None:
    """CSV with columns ``t, Re u_1, Im u_1, ..., Re u_n, Im u_n``."""
    roots = np.asarray(roots)
    n = roots.shape[1] if roots.ndim == 2 else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["t"]
        for k in range(1, n + 1):
            header += [f"Re u_{k}", f"Im u_{k}"]
        writer.writerow(header)
        for t, row in zip(times, roots):
            rec = [repr(float(np.real(t)))]
            for x in row:
                rec += [repr(float(x.real)), repr(float(x.imag))]
            writer.writerow(rec)


def char_poly(Y: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (descending) via Newton identities."""
    n = Y.shape[0]
    p = [np.trace(np.linalg.matrix_power(Y, k)) for k in range(1, n + 1)]
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1)) / k)
    return np.array([(-1) ** k * e[k] for k in range(n + 1)])


def twist_poly(m, w) -> np.ndarray:
    """Coefficients (descending) of ``prod_a (z - w_a)^{m_a}``."""
    return np.poly(np.repeat(np.asarray(w, dtype=complex), np.asarray(m, dtype=int)))
