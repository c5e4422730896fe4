"""Dense operators on the n-fold tensor power of C^N.

Operators are plain complex ``numpy`` arrays of shape ``(N**n, N**n)``.
Basis vectors are addressed by multi-indices ``(a_1, ..., a_n)`` with
``0 <= a_k < N`` (zero-based), flattened with site 1 as the most
significant digit, i.e. the ordering produced by ``np.kron``.
"""

from __future__ import annotations

import itertools
from math import factorial, prod

import numpy as np

__all__ = [
    "NonCommutingError",
    "ResidualError",
    "flat_index",
    "multi_index",
    "check_operator",
    "embed_site",
    "permutation_op",
    "commutator",
    "relative_commutator",
    "joint_eigenbasis",
    "sector_basis",
    "weight_vectors",
]


class NonCommutingError(ValueError):
    """Raised when a family handed to :func:`joint_eigenbasis` does not commute."""


class ResidualError(RuntimeError):
    """Raised when joint eigenpairs fail the residual test on every retry."""


def flat_index(multi, N: int) -> int:
    """Position of the basis vector ``multi`` in the flattened space."""
    k = 0
    for a in multi:
        if not 0 <= a < N:
            raise ValueError(f"index {a} out of range for N={N}")
        k = k * N + a
    return k


def multi_index(k: int, N: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`flat_index`."""
    if not 0 <= k < N**n:
        raise ValueError(f"flat index {k} out of range for N={N}, n={n}")
    out = []
    for _ in range(n):
        k, a = divmod(k, N)
        out.append(a)
    return tuple(reversed(out))


def check_operator(op: np.ndarray, N: int, n: int) -> np.ndarray:
    op = np.asarray(op)
    d = N**n
    if op.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} operator, got shape {op.shape}")
    return op


def embed_site(op, site: int, n: int) -> np.ndarray:
    """Return ``I^(site-1) (x) op (x) I^(n-site)``; ``site`` is 1-based."""
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("op must be a square matrix")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    N = op.shape[0]
    left = np.eye(N ** (site - 1), dtype=complex)
    right = np.eye(N ** (n - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


def permutation_op(i: int, j: int, n: int, N: int) -> np.ndarray:
    """Operator swapping tensor factors ``i`` and ``j`` (1-based)."""
    if i == j:
        raise ValueError("permutation_op needs two distinct sites")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"sites ({i}, {j}) out of range 1..{n}")
    d = N**n
    axes = list(range(n))
    axes[i - 1], axes[j - 1] = axes[j - 1], axes[i - 1]
    # column c maps to the basis vector with sites i and j exchanged
    perm = np.arange(d).reshape((N,) * n).transpose(axes).reshape(d)
    P = np.zeros((d, d), dtype=complex)
    P[perm, np.arange(d)] = 1.0
    return P


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def relative_commutator(a: np.ndarray, b: np.ndarray) -> float:
    """``||[a, b]||_F / (||a||_F ||b||_F)``, zero when either operand vanishes."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.linalg.norm(commutator(a, b)) / (na * nb))


def _normalize_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
    return v * (abs(v[k]) / v[k])


def joint_eigenbasis(family, seed: int = 0, *, tol: float = 1e-8,
                     commute_tol: float = 1e-10, retries: int = 5):
    """Diagonalize a commuting family through one random linear combination.

    Returns a list of ``(vector, eigenvalues)`` pairs, one per basis vector,
    where ``eigenvalues[k]`` is the Rayleigh quotient of ``family[k]``.
    Vectors have unit norm with their first non-negligible entry real and
    positive.  Every pair satisfies ``||A v - lam v|| <= tol ||A|| ||v||``;
    if a combination fails that test a fresh one is drawn, up to ``retries``
    times, before :class:`ResidualError` is raised.
    """
    family = [np.asarray(a, dtype=complex) for a in family]
    if not family:
        raise ValueError("empty family")
    d = family[0].shape[0]
    for a in family:
        if a.shape != (d, d):
            raise ValueError("family members must share one square shape")
    for x, y in itertools.combinations(family, 2):
        if relative_commutator(x, y) > commute_tol:
            raise NonCommutingError(
                f"family does not commute (relative commutator "
                f"{relative_commutator(x, y):.2e})"
            )
    norms = [np.linalg.norm(a, 2) if d else 0.0 for a in family]
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(retries):
        coef = rng.normal(size=len(family)) + 1j * rng.normal(size=len(family))
        combo = sum(c * a / max(nrm, 1e-300) for c, a, nrm in zip(coef, family, norms))
        _, vecs = np.linalg.eig(combo)
        pairs = []
        worst = 0.0
        for col in vecs.T:
            v = _normalize_phase(col)
            vals = []
            for a, nrm in zip(family, norms):
                av = a @ v
                lam = np.vdot(v, av)
                res = np.linalg.norm(av - lam * v)
                worst = max(worst, res / max(nrm, 1e-300) if nrm else res)
                vals.append(complex(lam))
            pairs.append((v, vals))
        if worst <= tol:
            return pairs
    raise ResidualError(
        f"joint eigenpairs failed the residual test after {retries} attempts "
        f"(worst relative residual {worst:.2e}); parameters are likely non-generic"
    )


def sector_basis(m, N: int, n: int) -> list[tuple[int, ...]]:
    """Multi-indices in which symbol ``a`` occurs exactly ``m[a]`` times."""
    m = tuple(int(x) for x in m)
    if len(m) != N or any(x < 0 for x in m) or sum(m) != n:
        raise ValueError(f"weight {m} is not a composition of {n} into {N} parts")
    out = [idx for idx in itertools.product(range(N), repeat=n)
           if all(idx.count(a) == m[a] for a in range(N))]
    assert len(out) == factorial(n) // prod(factorial(x) for x in m)
    return out


def weight_vectors(N: int, n: int) -> list[tuple[int, ...]]:
    """All weights ``m`` with ``sum(m) == n``, in reverse-lexicographic order."""
    return sorted(
        (m for m in itertools.product(range(n + 1), repeat=N) if sum(m) == n),
        reverse=True,
    )
