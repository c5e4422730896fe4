"""Co-derivatives of class functions and the transfer matrices built from them.

For a scalar function ``f`` of ``g`` and sites ``i_1 < ... < i_k`` the
iterated co-derivative ``D_{i_k} ... D_{i_1} f(g)`` is the operator

    sum over (a_p, b_p) of  prod_p e^{(i_p)}_{a_p b_p}
        * [e_1 ... e_k] f(exp(e_1 E_{b_1 a_1}) ... exp(e_k E_{b_k a_k}) g),

where ``[e_1 ... e_k]`` extracts the multilinear coefficient.  In the jet
ring ``exp(e E) = I + e E`` exactly, so every coefficient is computed without
truncation error.  The first-applied derivative (lowest site) carries the
leftmost exponential.

Since the coefficient tensor depends only on ``k`` (not on which sites were
chosen), it is memoized per ``(f, k, w)`` and merely re-embedded for each
subset of sites.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .jets import JetRing, jet_ring
from .model import SpinChainSpec
from .symfun import Partition, partitions_up_to

__all__ = [
    "ScalarFunction",
    "coderivative_entries",
    "coderivative_op",
    "chain_poly",
    "transfer_poly",
    "transfer_op",
    "polyval_op",
    "MasterTSeries",
    "master_t_coeffs",
    "StationaryBA",
    "stationary_ba_op",
    "shifted_tau_poly",
]

# jet batches are processed in chunks of at most this many bytes
_CHUNK_BYTES = 64 * 2**20


@dataclass(frozen=True)
class ScalarFunction:
    """A scalar class function evaluable on jet matrices.

    Build instances with the classmethods; ``kind`` and ``params`` make them
    hashable so results can be memoized.
    """

    kind: str
    params: tuple = ()

    @classmethod
    def character(cls, lam) -> "ScalarFunction":
        return cls("character", tuple(Partition(lam)))

    @classmethod
    def power_sum(cls, m: int) -> "ScalarFunction":
        return cls("power_sum", (int(m),))

    @classmethod
    def matrix_entry(cls, c: int, d: int) -> "ScalarFunction":
        return cls("matrix_entry", (int(c), int(d)))

    @classmethod
    def det(cls) -> "ScalarFunction":
        return cls("det")

    @classmethod
    def det_shift(cls, z: complex) -> "ScalarFunction":
        """``det(z I - g)``."""
        return cls("det_shift", (complex(z),))

    @classmethod
    def inv_det_shift(cls, z: complex) -> "ScalarFunction":
        """``1 / det(z I - g)``."""
        return cls("inv_det_shift", (complex(z),))

    @classmethod
    def exp_times(cls, t) -> "ScalarFunction":
        """``exp(sum_k t_k tr g^k)`` for finitely many times."""
        return cls("exp_times", tuple(complex(x) for x in t))

    def __mul__(self, other: "ScalarFunction") -> "ScalarFunction":
        return ScalarFunction("product", (self, other))

    def evaluate(self, ctx: "_JetContext") -> np.ndarray:
        ring = ctx.ring
        if self.kind == "character":
            return ctx.character(self.params)
        if self.kind == "power_sum":
            return ctx.power_sum(self.params[0])
        if self.kind == "matrix_entry":
            c, d = self.params
            return ctx.X[:, c, d, :]
        if self.kind == "det":
            return ctx.elementary(ctx.N)
        if self.kind in ("det_shift", "inv_det_shift"):
            z = self.params[0]
            out = ring.const(0.0, (ctx.batch,))
            for a in range(ctx.N + 1):
                out = out + (-1) ** a * z ** (ctx.N - a) * ctx.elementary(a)
            return out if self.kind == "det_shift" else ring.inv(out)
        if self.kind == "exp_times":
            arg = ring.const(0.0, (ctx.batch,))
            for k, tk in enumerate(self.params, start=1):
                if tk != 0:
                    arg = arg + tk * ctx.power_sum(k)
            return ring.exp(arg)
        if self.kind == "product":
            out = ring.const(1.0, (ctx.batch,))
            for f in self.params:
                out = ring.mul(out, f.evaluate(ctx))
            return out
        raise ValueError(f"unknown function kind {self.kind!r}")


class _JetContext:
    """Jet matrices ``X`` for a batch of index tuples, with cached invariants."""

    def __init__(self, ring: JetRing, X: np.ndarray):
        self.ring = ring
        self.X = X
        self.batch, self.N = X.shape[0], X.shape[1]
        self._powers = {1: X}
        self._p = {}
        self._e = {0: ring.const(1.0, (self.batch,))}
        self._h = {0: ring.const(1.0, (self.batch,))}

    def matrix_power(self, m: int) -> np.ndarray:
        if m not in self._powers:
            self._powers[m] = self.ring.matmul(self.matrix_power(m - 1), self.X)
        return self._powers[m]

    def power_sum(self, m: int) -> np.ndarray:
        if m not in self._p:
            self._p[m] = np.einsum("bii...->b...", self.matrix_power(m))
        return self._p[m]

    def elementary(self, a: int) -> np.ndarray:
        # Newton: a e_a = sum_{m=1}^{a} (-1)^{m-1} p_m e_{a-m}
        if a not in self._e:
            acc = self.ring.const(0.0, (self.batch,))
            for m in range(1, a + 1):
                acc = acc + (-1) ** (m - 1) * self.ring.mul(self.power_sum(m), self.elementary(a - m))
            self._e[a] = acc / a
        return self._e[a]

    def complete(self, k: int) -> np.ndarray:
        # Newton: k h_k = sum_{m=1}^{k} p_m h_{k-m}
        if k < 0:
            return self.ring.const(0.0, (self.batch,))
        if k not in self._h:
            acc = self.ring.const(0.0, (self.batch,))
            for m in range(1, k + 1):
                acc = acc + self.ring.mul(self.power_sum(m), self.complete(k - m))
            self._h[k] = acc / k
        return self._h[k]

    def character(self, lam) -> np.ndarray:
        ell = len(lam)
        if ell > self.N:
            return self.ring.const(0.0, (self.batch,))
        if ell == 0:
            return self.ring.const(1.0, (self.batch,))
        mat = [[self.complete(lam[i] - i + j) for j in range(ell)] for i in range(ell)]
        out = self.ring.const(0.0, (self.batch,))
        for perm in itertools.permutations(range(ell)):
            sign = _perm_sign(perm)
            term = mat[0][perm[0]]
            for i in range(1, ell):
                term = self.ring.mul(term, mat[i][perm[i]])
            out = out + sign * term
        return out


def _perm_sign(perm) -> int:
    sign, seen = 1, list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def _jet_matrices(ring: JetRing, w: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``(I + e_1 E_{b_1 a_1}) ... (I + e_k E_{b_k a_k}) diag(w)`` per tuple.

    ``idx`` has shape ``(2k, batch)`` holding ``a_1, b_1, ..., a_k, b_k``.
    """
    N, k = len(w), ring.k
    batch = idx.shape[1]
    G = np.zeros((batch, N, N, ring.size), dtype=complex)
    G[:, np.arange(N), np.arange(N), 0] = 1.0
    rows = np.arange(batch)
    for p in range(k):
        a, b = idx[2 * p], idx[2 * p + 1]
        bit = 1 << p
        masks = np.array([S for S in range(ring.size) if not S & bit])
        # right-multiplying by e_p E_{b a} moves column b into column a
        G[rows[:, None, None], np.arange(N)[None, :, None], a[:, None, None],
          (masks | bit)[None, None, :]] += G[rows[:, None, None], np.arange(N)[None, :, None],
                                              b[:, None, None], masks[None, None, :]]
    return G * w[None, None, :, None]


@lru_cache(maxsize=4096)
def _coderivative_tensors(fs: tuple, k: int, w: tuple) -> tuple:
    """Coefficient tensors of ``D^k f`` for each ``f`` in ``fs``, memoized."""
    N = len(w)
    ring = jet_ring(k)
    wv = np.array(w, dtype=complex)
    total = N ** (2 * k)
    per_item = N * N * (3**k) * 16 * 2
    chunk = max(1, _CHUNK_BYTES // per_item)
    out = [np.empty(total, dtype=complex) for _ in fs]
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        if k == 0:
            idx = np.zeros((0, stop - start), dtype=int)
        else:
            idx = np.array(np.unravel_index(np.arange(start, stop), (N,) * (2 * k)))
        ctx = _JetContext(ring, _jet_matrices(ring, wv, idx))
        for f, buf in zip(fs, out):
            buf[start:stop] = f.evaluate(ctx)[:, ring.full]
    shape = (N,) * (2 * k)
    return tuple(o.reshape(shape) for o in out)


def coderivative_entries(f: ScalarFunction, sites, w) -> np.ndarray:
    """Coefficient tensor of ``D_{i_k} ... D_{i_1} f`` at ``g = diag(w)``.

    ``sites`` must be strictly increasing (the order in which the
    derivatives are applied).  The result is indexed
    ``[a_1, b_1, ..., a_k, b_k]``: the coefficient of
    ``prod_p e^{(i_p)}_{a_p b_p}``.
    """
    sites = tuple(sites)
    if any(a >= b for a, b in zip(sites, sites[1:])):
        raise ValueError("sites must be strictly increasing")
    w = tuple(complex(x) for x in w)
    if f.kind == "inv_det_shift" and any(abs(f.params[0] - x) == 0 for x in w):
        raise ZeroDivisionError("1/det(zI - g) is singular at a twist eigenvalue")
    return _coderivative_tensors((f,), len(sites), w)[0]


def _embed(coef: np.ndarray, sites, n: int, N: int) -> np.ndarray:
    """Operator ``sum coef[a_1,b_1,...] prod_p e^{(site_p)}_{a_p b_p}``."""
    sites = tuple(sites)
    d = N**n
    if n == 0:
        return np.array([[coef]], dtype=complex).reshape(1, 1)
    letters = string.ascii_letters
    rows, cols = letters[:n], letters[n : 2 * n]
    operands, subs = [], []
    sub = "".join(rows[s - 1] + cols[s - 1] for s in sites)
    operands.append(coef)
    subs.append(sub)
    eye = np.eye(N)
    for j in range(1, n + 1):
        if j not in sites:
            operands.append(eye)
            subs.append(rows[j - 1] + cols[j - 1])
    expr = ",".join(subs) + "->" + rows + cols
    return np.einsum(expr, *operands).reshape(d, d).astype(complex)


def coderivative_op(f: ScalarFunction, sites, w, n: int) -> np.ndarray:
    """``D_{i_k} ... D_{i_1} f(g)`` embedded in the ``n``-site space."""
    coef = coderivative_entries(f, sites, w)
    return _embed(coef, sites, n, len(w))


def _subsets(n: int):
    for k in range(n + 1):
        for S in itertools.combinations(range(1, n + 1), k):
            yield S


def _chain_polys(fs: tuple, spec: SpinChainSpec) -> list:
    n, N, d = spec.n, spec.N, spec.dim
    tensors = {k: _coderivative_tensors(fs, k, spec.w) for k in range(n + 1)}
    out = [np.zeros((n + 1, d, d), dtype=complex) for _ in fs]
    for S in _subsets(n):
        rest = [spec.u[i - 1] for i in range(1, n + 1) if i not in S]
        pref = P.polyfromroots(rest) if rest else np.ones(1)
        for f_idx in range(len(fs)):
            op = _embed(tensors[len(S)][f_idx], S, n, N)
            out[f_idx][: len(pref)] += pref[:, None, None] * op[None]
    return out


@lru_cache(maxsize=256)
def _chain_poly_cached(f: ScalarFunction, spec: SpinChainSpec) -> np.ndarray:
    return _chain_polys((f,), spec)[0]


def chain_poly(f: ScalarFunction, spec: SpinChainSpec) -> np.ndarray:
    """``(u - u_n + D_n) ... (u - u_1 + D_1) f(g)`` as u-polynomial coefficients.

    Returns shape ``(n + 1, d, d)``; entry ``j`` multiplies ``u**j``.
    """
    return _chain_poly_cached(f, spec).copy()


def polyval_op(coeffs: np.ndarray, u: complex) -> np.ndarray:
    """Evaluate operator (or scalar) u-polynomial coefficients at ``u``."""
    coeffs = np.asarray(coeffs)
    out = np.zeros(coeffs.shape[1:], dtype=complex)
    for c in coeffs[::-1]:
        out = out * u + c
    return out


def transfer_poly(lam, spec: SpinChainSpec) -> np.ndarray:
    """Coefficients of ``T_lam(u)`` (polynomial normalization, degree ``n``)."""
    lam = Partition(lam)
    if len(lam) > spec.N:
        return np.zeros((spec.n + 1, spec.dim, spec.dim), dtype=complex)
    return chain_poly(ScalarFunction.character(lam), spec)


def transfer_op(lam, u: complex, spec: SpinChainSpec) -> np.ndarray:
    """``T_lam(u)`` evaluated at one point."""
    return polyval_op(transfer_poly(lam, spec), u)


@dataclass
class MasterTSeries:
    """``lam -> T_lam(u)`` for ``|lam| <= K``, ``l(lam) <= N``.

    ``coeffs[lam]`` has shape ``(n + 1, d, d)`` (u-polynomial coefficients).
    """

    spec: SpinChainSpec
    coeffs: dict

    @property
    def partitions(self) -> list:
        return list(self.coeffs)

    def at(self, u: complex) -> dict:
        return {lam: polyval_op(c, u) for lam, c in self.coeffs.items()}

    def evaluate(self, u: complex, t) -> np.ndarray:
        """Truncated ``sum_lam T_lam(u) s_lam(t)``."""
        from .symfun import h_series, schur_from_h

        K = max((lam.size for lam in self.coeffs), default=0)
        h = h_series(t, K + self.spec.N + 1)
        out = np.zeros((self.spec.dim, self.spec.dim), dtype=complex)
        for lam, c in self.coeffs.items():
            out += schur_from_h(lam, h) * polyval_op(c, u)
        return out

    def rayleigh(self, v: np.ndarray) -> dict:
        """Scalar tau coefficients ``<v|T_lam|v> / <v|v>`` per partition."""
        nrm = np.vdot(v, v)
        return {lam: np.einsum("i,kij,j->k", v.conj(), c, v) / nrm
                for lam, c in self.coeffs.items()}


@lru_cache(maxsize=16)
def _master_cached(spec: SpinChainSpec) -> MasterTSeries:
    lams = partitions_up_to(spec.K, spec.N)
    fs = tuple(ScalarFunction.character(lam) for lam in lams)
    polys = _chain_polys(fs, spec)
    return MasterTSeries(spec, dict(zip(lams, polys)))


def master_t_coeffs(spec: SpinChainSpec) -> MasterTSeries:
    """All ``T_lam(u)`` with ``|lam| <= spec.K`` and at most ``N`` rows."""
    cached = _master_cached(spec)
    return MasterTSeries(spec, {lam: c.copy() for lam, c in cached.coeffs.items()})


@dataclass
class StationaryBA:
    """Stationary BA operator, with the ``z**(u -+ N)`` factor kept apart.

    ``poly`` holds the u-polynomial ``prod (u - u_i + D_i) f`` with
    ``f = det(zI - g)`` (or its inverse for the adjoint).  The tau-ratio part
    is ``poly(u) / prod (u - u_i)`` and the full function multiplies it by
    ``z ** exponent``.
    """

    spec: SpinChainSpec
    z: complex
    u: complex
    adjoint: bool
    poly: np.ndarray

    @property
    def exponent(self) -> complex:
        N = self.spec.N
        return self.u - N if not self.adjoint else N - self.u

    def ratio(self) -> np.ndarray:
        denom = np.prod([self.u - ui for ui in self.spec.u]) if self.spec.n else 1.0
        return polyval_op(self.poly, self.u) / denom

    def tau_ratio(self) -> np.ndarray:
        """``T(u, -+[z^-1]) / T(u, 0)`` as an operator ratio: ``z**(-+N) * ratio()``."""
        N = self.spec.N
        return self.z ** (N if self.adjoint else -N) * self.ratio()

    def value(self) -> np.ndarray:
        """Full operator; evaluates ``z**exponent`` on the principal branch."""
        return self.z**self.exponent * self.ratio()


def stationary_ba_op(u: complex, z: complex, spec: SpinChainSpec,
                     adjoint: bool = False) -> StationaryBA:
    """Stationary BA function (or its adjoint) as an operator."""
    if z == 0:
        raise ValueError("z must be nonzero")
    if any(u == ui for ui in spec.u):
        raise ZeroDivisionError(
            "u coincides with an inhomogeneity; use StationaryBA.poly instead")
    f = ScalarFunction.inv_det_shift(z) if adjoint else ScalarFunction.det_shift(z)
    if adjoint and any(z == wa for wa in spec.w):
        raise ZeroDivisionError("adjoint BA function has poles at the twist eigenvalues")
    return StationaryBA(spec, complex(z), complex(u), adjoint, chain_poly(f, spec))


def shifted_tau_poly(spec: SpinChainSpec, z: complex, sign: int,
                     t1_derivative: bool = False) -> np.ndarray:
    """Exact ``T(u, +-[z^-1])`` at zero base times, as u-polynomial operators.

    ``T(u, -[z^-1]) = z^-N chain[det(zI - g)]`` and
    ``T(u, +[z^-1]) = z^N chain[1/det(zI - g)]``.  With ``t1_derivative``
    the ``d/dt_1`` at zero times is returned instead, obtained by inserting
    ``tr g`` into the function acted on.
    """
    N = spec.N
    base = ScalarFunction.det_shift(z) if sign < 0 else ScalarFunction.inv_det_shift(z)
    f = ScalarFunction.power_sum(1) * base if t1_derivative else base
    scale = z ** (-N) if sign < 0 else z**N
    return scale * chain_poly(f, spec)
