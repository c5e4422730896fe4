import itertools

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from mastertau.coderiv import (
    ScalarFunction,
    chain_poly,
    coderivative_entries,
    coderivative_op,
    master_t_coeffs,
    polyval_op,
    shifted_tau_poly,
    stationary_ba_op,
    transfer_op,
    transfer_poly,
)
from mastertau.model import SpinChainSpec
from mastertau.spinchain import hamiltonian
from mastertau.symfun import Partition, character, partitions_up_to
from mastertau.tensorspace import embed_site, permutation_op

from conftest import crandn, random_spec

W3 = (0.8 + 0.3j, -0.6 + 0.9j, 1.1 - 0.4j)


def test_coderivative_of_trace():
    w = np.array(W3)
    assert np.allclose(coderivative_entries(ScalarFunction.power_sum(1), (1,), w), np.diag(w))


def test_coderivative_of_det():
    w = np.array(W3)
    D = coderivative_entries(ScalarFunction.det(), (1,), w)
    assert np.allclose(D, np.prod(w) * np.eye(3), atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_coderivative_of_power_sum(m):
    w = np.array(W3)
    D = coderivative_entries(ScalarFunction.power_sum(m), (1,), w)
    assert np.allclose(D, m * np.diag(w**m), atol=1e-12)


def _p2_oracle(w):
    # f = tr X^2 with X = (1 + e1 E1)(1 + e2 E2) g and E_p = e_{b_p a_p}
    g = np.diag(w)
    N = len(w)
    out = np.zeros((N,) * 4, dtype=complex)
    for a1, b1, a2, b2 in itertools.product(range(N), repeat=4):
        E1 = np.zeros((N, N))
        E2 = np.zeros((N, N))
        E1[b1, a1] = 1
        E2[b2, a2] = 1
        out[a1, b1, a2, b2] = 2 * np.trace(E1 @ E2 @ g @ g) + 2 * np.trace(E1 @ g @ E2 @ g)
    return out


def test_order_convention_p2():
    w = np.array(W3[:2])
    got = coderivative_entries(ScalarFunction.power_sum(2), (1, 2), w)
    assert np.allclose(got, _p2_oracle(w), atol=1e-12)
    # the mirrored ordering is genuinely different
    assert not np.allclose(got, _p2_oracle(w).transpose(2, 3, 0, 1))


def test_coderivative_character_by_finite_differences(rng):
    # D_2 D_1 chi_(2,1) against a central-difference mixed derivative
    from scipy.linalg import expm

    w = np.array(W3)
    lam = (2, 1)
    got = coderivative_entries(ScalarFunction.character(lam), (1, 2), w)
    h = 1e-4

    def f(X):
        return character(lam, np.linalg.eigvals(X))

    for a1, b1, a2, b2 in [(0, 1, 1, 0), (2, 2, 0, 0), (1, 2, 2, 1), (0, 0, 0, 0)]:
        E1, E2 = np.zeros((3, 3)), np.zeros((3, 3))
        E1[b1, a1] = 1
        E2[b2, a2] = 1
        g = np.diag(w)
        val = sum(s1 * s2 * f(expm(s1 * h * E1) @ expm(s2 * h * E2) @ g)
                  for s1 in (1, -1) for s2 in (1, -1)) / (4 * h * h)
        assert abs(val - got[a1, b1, a2, b2]) < 1e-5


def test_slot_entry_functions_give_permutation():
    # D_i applied to g^{(j)} = sum e^{(j)}_{cd} g_cd equals P_ij g^{(j)}
    N, n, i, j = 2, 2, 1, 2
    w = np.array(W3[:N])
    op = np.zeros((N**n, N**n), dtype=complex)
    for c, d in itertools.product(range(N), repeat=2):
        e = np.zeros((N, N))
        e[c, d] = 1
        Di = coderivative_op(ScalarFunction.matrix_entry(c, d), (i,), w, n)
        op += Di @ embed_site(e, j, n)
    want = permutation_op(i, j, n, N) @ embed_site(np.diag(w), j, n)
    assert np.allclose(op, want, atol=1e-13)


def test_sites_must_increase():
    with pytest.raises(ValueError):
        coderivative_entries(ScalarFunction.power_sum(1), (2, 1), W3)


def test_inv_det_shift_singular():
    with pytest.raises(ZeroDivisionError):
        coderivative_entries(ScalarFunction.inv_det_shift(W3[0]), (1,), W3)


def test_t_empty_is_scalar(spec23):
    u = 0.37 - 0.2j
    T0 = transfer_op((), u, spec23)
    assert np.allclose(T0, np.prod([u - x for x in spec23.u]) * np.eye(8), atol=1e-12)


def test_empty_chain_gives_characters():
    spec = SpinChainSpec(3, (), W3)
    for lam in partitions_up_to(4, 3):
        T = transfer_poly(lam, spec)
        assert T.shape == (1, 1, 1)
        assert abs(T[0, 0, 0] - character(lam, W3)) < 1e-12


def test_too_many_rows_vanish(spec23):
    raw = chain_poly(ScalarFunction.character((1, 1, 1)), spec23)
    assert np.max(np.abs(raw)) < 1e-12
    assert not np.any(transfer_poly((1, 1, 1), spec23))
    assert all(len(lam) <= 2 for lam in master_t_coeffs(spec23).partitions)


def test_transfer_degree(spec23):
    T = transfer_poly((2, 1), spec23)
    assert T.shape == (4, 8, 8)
    assert np.allclose(T[3], character((2, 1), spec23.w) * np.eye(8))


def test_commuting_family(spec23, rng):
    lams = [lam for lam in partitions_up_to(3, 2)]
    for _ in range(3):
        u, v = crandn(rng, 2)
        for lam, mu in itertools.product(lams, repeat=2):
            A, B = transfer_op(lam, u, spec23), transfer_op(mu, v, spec23)
            assert np.linalg.norm(A @ B - B @ A) <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(B)


def test_master_series_basics(spec23, rng):
    M = master_t_coeffs(spec23)
    assert len(M.partitions) == len(partitions_up_to(6, 2))
    assert np.allclose(M.coeffs[Partition()], transfer_poly((), spec23))
    u = crandn(rng)
    eps = 1e-6
    fd = (M.evaluate(u, [eps]) - M.evaluate(u, [-eps])) / (2 * eps)
    assert np.allclose(fd, transfer_op((1,), u, spec23), atol=1e-6)


def test_residues_are_hamiltonians(spec23):
    T1 = transfer_poly((1,), spec23)
    for i, ui in enumerate(spec23.u, start=1):
        den = np.prod([ui - uj for j, uj in enumerate(spec23.u, start=1) if j != i])
        res = polyval_op(T1, ui) / den
        assert np.allclose(res, hamiltonian(i, spec23), atol=1e-10)


def test_column_series_is_exact(spec23, rng):
    u, z = crandn(rng), crandn(rng, scale=2)
    col = sum((-z) ** (-a) * transfer_op((1,) * a, u, spec23) for a in range(spec23.N + 1))
    exact = polyval_op(shifted_tau_poly(spec23, z, -1), u)
    assert np.allclose(col, exact, atol=1e-11)


def test_row_series_converges(spec23, rng):
    spec = spec23.with_K(10)
    u, z = crandn(rng), 15.0 * np.exp(0.7j)
    M = master_t_coeffs(spec)
    exact = polyval_op(shifted_tau_poly(spec, z, +1), u)
    errs = []
    for S in (2, 5, 10):
        part = sum(z ** (-s) * polyval_op(M.coeffs[Partition.row(s)], u) for s in range(S + 1))
        errs.append(np.linalg.norm(part - exact) / np.linalg.norm(exact))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-8


def test_stationary_ba_empty_chain():
    spec = SpinChainSpec(3, (), W3)
    z, u = 1.7 + 0.4j, 0.3
    ba = stationary_ba_op(u, z, spec)
    assert abs(ba.ratio()[0, 0] - np.prod([z - w for w in W3])) < 1e-12
    assert abs(ba.value()[0, 0] - z ** (u - 3) * np.prod([z - w for w in W3])) < 1e-12


def test_stationary_ba_large_u(spec23):
    z = 2.0 + 0.5j
    ba = stationary_ba_op(1e6, z, spec23)
    target = z ** (-spec23.N) * np.prod([z - w for w in spec23.w])
    assert np.allclose(ba.tau_ratio(), target * np.eye(8), atol=1e-5)


def test_stationary_ba_errors(spec23):
    with pytest.raises(ValueError):
        stationary_ba_op(0.1, 0, spec23)
    with pytest.raises(ZeroDivisionError):
        stationary_ba_op(spec23.u[0], 1.0, spec23)
    with pytest.raises(ZeroDivisionError):
        stationary_ba_op(0.1, spec23.w[0], spec23, adjoint=True)


@pytest.mark.parametrize("N,n", [(2, 2), (3, 2)])
def test_small_z_operator_limit(N, n, rng):
    # z^N T(u, -[z^-1]) -> (-1)^N det g T(u+1) and z^-N T(u, +[z^-1]) -> (-1)^N T(u-1) / det g
    spec = random_spec(N, n)
    u = crandn(rng)
    detg = np.prod(spec.w)
    T0 = transfer_poly((), spec)
    for sign, shift, fac in ((-1, 1, detg), (1, -1, 1 / detg)):
        F = lambda z: z ** (-sign * N) * polyval_op(shifted_tau_poly(spec, z, sign), u)  # noqa: E731
        z = 1e-4
        est = 2 * F(z / 2) - F(z)
        want = (-1) ** N * fac * polyval_op(T0, u + shift)
        assert np.linalg.norm(est - want) <= 1e-6 * np.linalg.norm(want)
