"""Problem definition shared by every module."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SpinChainSpec", "NonGenericSpecError"]


class NonGenericSpecError(ValueError):
    """Chain parameters violate a genericity invariant.

    ``invariant`` names the violated condition so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


@dataclass(frozen=True)
class SpinChainSpec:
    """Inhomogeneous twisted GL(N) chain: ``N``, sites ``u``, twist ``w``.

    ``K`` is the truncation degree of the master T-series and ``seed`` drives
    every random choice made on behalf of this spec.  Instances are hashable
    so that per-spec operator caches can key on them.
    """

    N: int
    u: tuple
    w: tuple
    K: int = 6
    seed: int = 42
    tol: float = field(default=1e-8, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(complex(x) for x in self.u))
        object.__setattr__(self, "w", tuple(complex(x) for x in self.w))
        if self.N < 1:
            raise ValueError("N must be positive")
        if len(self.w) != self.N:
            raise ValueError(f"expected {self.N} twist eigenvalues, got {len(self.w)}")
        if self.K < 0:
            raise ValueError("K must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def dim(self) -> int:
        return self.N**self.n

    @property
    def g(self) -> np.ndarray:
        return np.diag(np.array(self.w, dtype=complex))

    def check_generic(self, tol: float | None = None) -> "SpinChainSpec":
        """Raise :class:`NonGenericSpecError` unless the parameters are generic."""
        tol = self.tol if tol is None else tol
        w = np.array(self.w)
        if np.any(np.abs(w) <= tol):
            raise NonGenericSpecError("twist eigenvalues nonzero", f"w = {self.w}")
        for a, b in itertools.combinations(range(self.N), 2):
            if abs(w[a] - w[b]) <= tol:
                raise NonGenericSpecError(
                    "twist eigenvalues pairwise distinct", f"w[{a}] ~ w[{b}]")
        for i, j in itertools.combinations(range(self.n), 2):
            d = self.u[i] - self.u[j]
            if abs(d) <= tol:
                raise NonGenericSpecError(
                    "inhomogeneities pairwise distinct", f"u[{i}] ~ u[{j}]")
            if abs(d - 1) <= tol or abs(d + 1) <= tol:
                raise NonGenericSpecError(
                    "no unit gaps between inhomogeneities", f"u[{i}] - u[{j}] = {d}")
        return self

    def with_K(self, K: int) -> "SpinChainSpec":
        return SpinChainSpec(self.N, self.u, self.w, K, self.seed, self.tol)

    def with_u(self, u) -> "SpinChainSpec":
        return SpinChainSpec(self.N, tuple(u), self.w, self.K, self.seed, self.tol)

    @classmethod
    def random(cls, N: int, n: int, seed: int = 0, *, K: int = 6,
               margin: float = 0.2) -> "SpinChainSpec":
        """Random complex generic spec, with all genericity gaps above ``margin``."""
        rng = np.random.default_rng(seed)
        while True:
            u = rng.normal(size=n) + 1j * rng.normal(size=n)
            w = (0.6 + 0.8 * rng.random(N)) * np.exp(2j * np.pi * rng.random(N))
            spec = cls(N, tuple(u), tuple(w), K, seed)
            try:
                spec.check_generic(margin)
            except NonGenericSpecError:
                continue
            return spec
