"""Direct constructions on the chain: R-matrix, Hamiltonians, fusion, spectrum.

Nothing here goes through co-derivatives except :func:`spectrum`, which
reads the scalar tau series of each eigenstate off :func:`master_t_coeffs`.
The fused transfer matrices are built from the trace formula with explicit
symmetric / antisymmetric power representations and serve as an oracle for
the co-derivative construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial, prod

import numpy as np
from numpy.polynomial import polynomial as P

from .coderiv import master_t_coeffs
from .model import NonGenericSpecError, SpinChainSpec
from .tensorspace import embed_site, joint_eigenbasis, permutation_op

__all__ = [
    "SpinChainSpec",
    "SpectrumRecord",
    "WeightError",
    "r_matrix",
    "hamiltonian",
    "hamiltonians",
    "weight_ops",
    "representation",
    "fused_transfer",
    "fused_transfer_poly",
    "spectrum",
]

WEIGHT_TOL = 1e-6


class WeightError(RuntimeError):
    """An eigenvector's weights are not within tolerance of integers."""


def r_matrix(u: complex, N: int) -> np.ndarray:
    """``R(u) = I (x) I + P / u`` on ``C^N (x) C^N``."""
    if u == 0:
        raise ZeroDivisionError("R(u) has a pole at u = 0")
    return np.eye(N * N, dtype=complex) + permutation_op(1, 2, 2, N) / u


def hamiltonian(i: int, spec: SpinChainSpec) -> np.ndarray:
    """Non-local Hamiltonian ``H_i`` as an ordered product (``i`` is 1-based)."""
    n, N = spec.n, spec.N
    if not 1 <= i <= n:
        raise ValueError(f"site {i} out of range 1..{n}")
    u = spec.u
    eye = np.eye(spec.dim, dtype=complex)

    def factor(j):
        if u[i - 1] == u[j - 1]:
            raise NonGenericSpecError("inhomogeneities pairwise distinct",
                                      f"u[{i - 1}] = u[{j - 1}]")
        return eye + permutation_op(i, j, n, N) / (u[i - 1] - u[j - 1])

    out = eye.copy()
    for j in range(i + 1, n + 1):
        out = out @ factor(j)
    out = out @ embed_site(spec.g, i, n)
    for j in range(1, i):
        out = out @ factor(j)
    return out


def hamiltonians(spec: SpinChainSpec) -> list[np.ndarray]:
    return [hamiltonian(i, spec) for i in range(1, spec.n + 1)]


def weight_ops(spec: SpinChainSpec) -> list[np.ndarray]:
    """Counting operators ``M_a = sum_l e_aa^{(l)}`` (diagonal)."""
    N, n = spec.N, spec.n
    if n == 0:
        return [np.zeros((1, 1), dtype=complex) for _ in range(N)]
    ops = []
    for a in range(N):
        e = np.zeros((N, N), dtype=complex)
        e[a, a] = 1.0
        ops.append(sum(embed_site(e, l, n) for l in range(1, n + 1)))
    return ops


@lru_cache(maxsize=32)
def _isometry(shape: str, r: int, N: int) -> np.ndarray:
    """Orthonormal basis of Sym^r or Lambda^r inside ``(C^N)^{(x) r}``.

    Columns are indexed by multisets (``row``) or strictly increasing tuples
    (``column``) of ``{0..N-1}``.
    """
    if shape == "row":
        labels = list(itertools.combinations_with_replacement(range(N), r))
    else:
        labels = list(itertools.combinations(range(N), r))
    B = np.zeros((N**r, len(labels)), dtype=complex)
    for col, lab in enumerate(labels):
        for perm in set(itertools.permutations(range(r))):
            idx = tuple(lab[p] for p in perm)
            flat = 0
            for a in idx:
                flat = flat * N + a
            if shape == "row":
                B[flat, col] += 1.0
            else:
                sign = 1
                for x, y in itertools.combinations(range(r), 2):
                    if perm[x] > perm[y]:
                        sign = -sign
                B[flat, col] += sign
        B[:, col] /= np.linalg.norm(B[:, col])
    return B


def representation(shape: str, r: int, N: int):
    """Generators and group action of Sym^r (``"row"``) or Lambda^r (``"column"``).

    Returns ``(gen, act)``: ``gen[a][b]`` is the matrix of ``e_ab`` (the
    induced derivation restricted to the subspace) and ``act(g)`` the matrix
    of ``g``.
    """
    if shape not in ("row", "column"):
        raise ValueError("shape must be 'row' or 'column'")
    if r == 0:
        one = np.ones((1, 1), dtype=complex)
        return [[0 * one for _ in range(N)] for _ in range(N)], lambda g: one
    B = _isometry(shape, r, N)
    gen = []
    for a in range(N):
        row = []
        for b in range(N):
            e = np.zeros((N, N), dtype=complex)
            e[a, b] = 1.0
            der = sum(embed_site(e, k, r) for k in range(1, r + 1))
            row.append(B.conj().T @ der @ B)
        gen.append(row)

    def act(g):
        big = np.ones((1, 1), dtype=complex)
        for _ in range(r):
            big = np.kron(big, np.asarray(g, dtype=complex))
        return B.conj().T @ big @ B

    return gen, act


def _fused_normalized_factors(shape: str, r: int, spec: SpinChainSpec):
    """u-linear factors ``(u - u_j) R^{j0}(u - u_j)`` on chain (x) auxiliary."""
    N, n = spec.N, spec.n
    gen, act = representation(shape, r, N)
    daux = gen[0][0].shape[0]
    d = spec.dim
    cross = np.zeros((d * daux, d * daux), dtype=complex)
    factors = []
    for j in range(1, n + 1):
        cross = np.zeros((d * daux, d * daux), dtype=complex)
        for a in range(N):
            for b in range(N):
                e = np.zeros((N, N), dtype=complex)
                e[a, b] = 1.0
                cross += np.kron(embed_site(e, j, n), gen[b][a])
        # (u - u_j) I + sum_ab e_ab^{(j)} (x) pi(e_ba) = u * I + (cross - u_j I)
        const = cross - spec.u[j - 1] * np.eye(d * daux)
        factors.append((const, np.eye(d * daux, dtype=complex)))
    twist = np.kron(np.eye(d), act(spec.g))
    return factors, twist, daux


def fused_transfer_poly(shape: str, r: int, spec: SpinChainSpec) -> np.ndarray:
    """u-polynomial coefficients of the fused transfer matrix (trace formula).

    ``shape`` is ``"row"`` for ``lam = (r)`` and ``"column"`` for ``lam = (1^r)``.
    Normalized so that every coefficient is polynomial of degree ``n``.
    """
    d = spec.dim
    if shape == "column" and r > spec.N:
        return np.zeros((spec.n + 1, d, d), dtype=complex)
    factors, twist, daux = _fused_normalized_factors(shape, r, spec)
    # product in site order 1..n, kept as a polynomial in u
    poly = [np.eye(d * daux, dtype=complex)]
    for const, lin in factors:
        new = [np.zeros_like(poly[0]) for _ in range(len(poly) + 1)]
        for k, c in enumerate(poly):
            new[k] += c @ const
            new[k + 1] += c @ lin
        poly = new
    out = np.zeros((spec.n + 1, d, d), dtype=complex)
    for k, c in enumerate(poly):
        full = (c @ twist).reshape(d, daux, d, daux)
        out[k] = np.einsum("iaja->ij", full)
    return out


def fused_transfer(shape: str, r: int, u: complex, spec: SpinChainSpec) -> np.ndarray:
    from .coderiv import polyval_op

    return polyval_op(fused_transfer_poly(shape, r, spec), u)


@dataclass
class SpectrumRecord:
    """One joint eigenstate of ``H_1..H_n`` and ``M_1..M_N``."""

    eigenvector: np.ndarray
    H: np.ndarray
    m: tuple
    tau: dict = field(default_factory=dict)
    raw_m: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.H)


def _round_weights(raw, n: int) -> tuple:
    m = np.rint(raw.real).astype(int)
    if np.max(np.abs(raw - m), initial=0.0) > WEIGHT_TOL or m.sum() != n or np.any(m < 0):
        raise WeightError(f"weights {raw} are not a valid integer composition of {n}")
    return tuple(int(x) for x in m)


def spectrum(spec: SpinChainSpec, *, with_tau: bool = True) -> list[SpectrumRecord]:
    """Joint spectrum of the Hamiltonians and weights, one record per state.

    Records are ordered by weight (descending lexicographic), then by
    ``H_1`` (real part, then imaginary part).
    """
    spec.check_generic()
    n, N = spec.n, spec.N
    Hs = hamiltonians(spec)
    Ms = weight_ops(spec)
    family = Hs + Ms if n else Ms
    pairs = joint_eigenbasis(family, seed=spec.seed)
    master = master_t_coeffs(spec) if with_tau else None
    records = []
    for v, vals in pairs:
        H = np.array(vals[:n], dtype=complex)
        raw = np.array(vals[n:], dtype=complex)
        m = _round_weights(raw, n)
        tau = master.rayleigh(v) if master is not None else {}
        records.append(SpectrumRecord(v, H, m, tau, raw))
    records.sort(key=lambda r: (tuple(-x for x in r.m),
                                tuple(np.round(r.H[:1].real, 10)),
                                tuple(np.round(r.H[:1].imag, 10))))
    return records


def sector_dimension(m) -> int:
    return factorial(sum(m)) // prod(factorial(x) for x in m)
