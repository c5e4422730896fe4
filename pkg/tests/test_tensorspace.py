import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mastertau.tensorspace import (
    NonCommutingError,
    commutator,
    embed_site,
    flat_index,
    joint_eigenbasis,
    multi_index,
    permutation_op,
    relative_commutator,
    sector_basis,
    weight_vectors,
)

from conftest import crandn


@given(st.integers(1, 4), st.integers(0, 4), st.data())
@settings(max_examples=60, deadline=None)
def test_flat_index_round_trip(N, n, data):
    k = data.draw(st.integers(0, N**n - 1))
    assert flat_index(multi_index(k, N, n), N) == k


def test_embed_identity():
    assert np.array_equal(embed_site(np.eye(2), 1, 3), np.eye(8))


def test_embed_matrix_unit():
    N, n, i = 2, 3, 2
    e = np.zeros((N, N))
    e[0, 1] = 1
    op = embed_site(e, i, n)
    for r, c in itertools.product(range(N**n), repeat=2):
        a, b = multi_index(r, N, n), multi_index(c, N, n)
        want = (a[i - 1], b[i - 1]) == (0, 1) and all(
            a[k] == b[k] for k in range(n) if k != i - 1)
        assert op[r, c] == float(want)


def test_disjoint_sites_commute(rng):
    g, h = crandn(rng, (3, 3)), crandn(rng, (3, 3))
    a, b = embed_site(g, 1, 2), embed_site(h, 2, 2)
    assert np.allclose(a @ b, b @ a, atol=1e-13)


def test_embed_respects_products(rng):
    g, h = crandn(rng, (2, 2)), crandn(rng, (2, 2))
    lhs = embed_site(g @ h, 2, 3)
    assert np.allclose(lhs, embed_site(g, 2, 3) @ embed_site(h, 2, 3), atol=1e-13)


@pytest.mark.parametrize("site", [0, 4])
def test_embed_site_out_of_range(site):
    with pytest.raises(ValueError):
        embed_site(np.eye(2), site, 3)


def test_permutation_swaps_factors(rng):
    v, w = crandn(rng, 2), crandn(rng, 2)
    P12 = permutation_op(1, 2, 2, 2)
    assert np.allclose(P12 @ np.kron(v, w), np.kron(w, v), atol=1e-14)


def test_permutation_properties(rng):
    N, n = 2, 3
    g = crandn(rng, (N, N))
    for i, j in itertools.permutations(range(1, n + 1), 2):
        P = permutation_op(i, j, n, N)
        assert np.allclose(P @ P, np.eye(N**n))
        assert np.array_equal(P, permutation_op(j, i, n, N))
        assert np.allclose(P @ embed_site(g, j, n), embed_site(g, i, n) @ P, atol=1e-13)
    P12, P23, P13 = (permutation_op(*ij, n, N) for ij in ((1, 2), (2, 3), (1, 3)))
    assert np.allclose(P12 @ P23 @ P12, P13)


def test_permutation_same_site():
    with pytest.raises(ValueError):
        permutation_op(2, 2, 3, 2)


def test_commutator_helpers(rng):
    a, b = crandn(rng, (4, 4)), crandn(rng, (4, 4))
    assert np.allclose(commutator(a, b), a @ b - b @ a)
    assert relative_commutator(a, a @ a) < 1e-14


def test_joint_eigenbasis_identity():
    pairs = joint_eigenbasis([np.eye(8)], seed=3)
    assert len(pairs) == 8
    assert all(abs(vals[0] - 1) < 1e-14 for _, vals in pairs)


def test_joint_eigenbasis_diagonal_weights():
    from mastertau.spinchain import weight_ops
    from mastertau.model import SpinChainSpec

    spec = SpinChainSpec(2, (0.1, 0.7j, -1.3), (1.0, 2.0))
    pairs = joint_eigenbasis(weight_ops(spec), seed=0)
    for v, vals in pairs:
        assert np.count_nonzero(np.abs(v) > 1e-10) == 1
        assert np.allclose(vals, np.rint(np.real(vals)), atol=1e-12)


def test_joint_eigenbasis_residuals(spec23):
    from mastertau.spinchain import hamiltonians

    Hs = hamiltonians(spec23)
    pairs = joint_eigenbasis(Hs, seed=spec23.seed)
    assert len(pairs) == 8
    for v, vals in pairs:
        for A, lam in zip(Hs, vals):
            assert np.linalg.norm(A @ v - lam * v) <= 1e-8 * np.linalg.norm(A, 2)


def test_joint_eigenbasis_rejects_noncommuting(rng):
    with pytest.raises(NonCommutingError):
        joint_eigenbasis([crandn(rng, (3, 3)), crandn(rng, (3, 3))])


def test_sector_basis_examples():
    assert sector_basis((3, 0), 2, 3) == [(0, 0, 0)]
    assert len(sector_basis((2, 1), 2, 3)) == 3
    with pytest.raises(ValueError):
        sector_basis((2, 2), 2, 3)


@pytest.mark.parametrize("N,n", [(2, 3), (3, 2), (3, 3), (2, 0)])
def test_sectors_partition_the_basis(N, n):
    seen = [idx for m in weight_vectors(N, n) for idx in sector_basis(m, N, n)]
    assert len(seen) == len(set(seen)) == N**n
