import csv

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from mastertau import rs
from mastertau.coderiv import stationary_ba_op
from mastertau.model import NonGenericSpecError
from mastertau.mkp import TauSeries, tau_expansion
from mastertau.series import weighted_monomials

from conftest import cached_spectrum, crandn, random_spec


def random_state(rng, n=3, margin=0.3):
    while True:
        q = crandn(rng, n)
        d = q[:, None] - q[None, :]
        off = ~np.eye(n, dtype=bool)
        if np.all(np.abs(d[off]) > margin) and np.all(np.abs(np.abs(d[off]) - 1) > margin) \
                and np.all(np.abs(d[off] - 1) > margin) and np.all(np.abs(d[off] + 1) > margin):
            return rs.RSPhase(q, crandn(rng, n, 0.5))


def quantum_state(spec, k):
    rec = cached_spectrum(spec)[k]
    return rec, rs.RSPhase(np.array(spec.u), -rec.H)


def test_lax_small_cases(rng):
    assert np.allclose(rs.lax(rs.RSPhase([0.3], [2.0])).Y, [[-2.0]])
    st = random_state(rng)
    lx = rs.lax(st)
    assert np.allclose(np.diag(lx.Y), -st.v)
    assert np.allclose(lx.Y, lx.Udot @ lx.Q)
    assert np.allclose(lx.T, lx.T_tilde - lx.Y)


def test_trace_y_from_momenta(rng):
    for _ in range(5):
        st = random_state(rng)
        p = rs.momenta(st)
        q = st.q
        tr = sum(np.exp(-p[i]) * np.prod([(q[i] - q[k] + 1) / (q[i] - q[k])
                                          for k in range(3) if k != i]) for i in range(3))
        assert abs(tr - np.trace(rs.lax(st).Y)) <= 1e-10 * max(1, abs(tr))
        assert abs(rs.hamiltonian(q, p, 1) - np.trace(rs.lax(st).Y)) <= 1e-10


def test_momenta_round_trip(rng):
    st = random_state(rng, 4)
    assert np.allclose(rs.velocities(st.q, rs.momenta(st)), st.v, rtol=1e-12)
    one = rs.RSPhase([0.5], [0.7 - 0.2j])
    assert np.allclose(rs.momenta(one), -np.log(-(0.7 - 0.2j)))
    with pytest.raises(ZeroDivisionError):
        rs.momenta(rs.RSPhase([0.1, 0.9j], [1.0, 0.0]))


def test_commutation_relation(rng):
    for _ in range(10):
        st = random_state(rng)
        lx = rs.lax(st)
        one = np.ones(3)
        lhs = lx.U @ lx.Y - lx.Y @ lx.U
        assert np.max(np.abs(lhs - lx.Y - lx.Udot @ np.outer(one, one))) <= 1e-12
        # the rank-one remainder
        assert np.linalg.matrix_rank(lhs - lx.Y, tol=1e-10) == 1


@pytest.mark.parametrize("k", range(5))
def test_lemma_traces(rng, k):
    for _ in range(10):
        st = random_state(rng)
        Y = rs.lax(st).Y
        lhs = np.ones(3) @ np.linalg.matrix_power(Y, k) @ st.v
        assert abs(lhs + np.trace(np.linalg.matrix_power(Y, k + 1))) <= 1e-10 * max(1, abs(lhs))


def test_algebraic_lax_identities(rng):
    for _ in range(10):
        lx = rs.lax(random_state(rng))
        assert np.max(np.abs(lx.M - lx.W @ lx.Q)) <= 1e-10
        assert np.max(np.abs(lx.T @ np.diag(lx.Udot) + np.diag(lx.W))) <= 1e-10


def test_a_matrix_and_dY_dq(rng):
    for _ in range(10):
        st = random_state(rng)
        p = rs.momenta(st)
        Y = rs.lax(st).Y
        for i in range(3):
            A = rs.a_matrix(st, i)
            assert np.max(np.abs(A - rs.a_matrix_from_definition(st, i))) <= 1e-10
            C = rs.c_matrix(st.q, i)
            dY = rs.dY_dq_fixed_p(st.q, p, i)
            assert np.max(np.abs(-A - dY - (C @ Y - Y @ C))) <= 1e-10


def test_dY_dq_against_finite_differences(rng):
    st = random_state(rng)
    p = rs.momenta(st)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        Yp = rs.lax(rs.RSPhase(st.q + e, rs.velocities(st.q + e, p))).Y
        Ym = rs.lax(rs.RSPhase(st.q - e, rs.velocities(st.q - e, p))).Y
        assert np.max(np.abs((Yp - Ym) / (2 * h) - rs.dY_dq_fixed_p(st.q, p, i))) < 1e-7


@pytest.mark.parametrize("m", [1, 2, 3])
def test_vector_field_is_hamiltonian(rng, m):
    st = random_state(rng)
    q, p = st.q, rs.momenta(st)
    dq, dp = rs.flow_vector_field(q, p, m)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        dH_dq = (rs.hamiltonian(q + e, p, m) - rs.hamiltonian(q - e, p, m)) / (2 * h)
        dH_dp = (rs.hamiltonian(q, p + e, m) - rs.hamiltonian(q, p - e, m)) / (2 * h)
        assert abs(dq[i] - dH_dp) < 1e-6 * max(1, abs(dH_dp))
        assert abs(dp[i] + dH_dq) < 1e-6 * max(1, abs(dH_dq))


def test_free_particle():
    st = rs.RSPhase([0.2 + 0.1j], [0.7 - 0.3j])
    out = rs.flow(st, 1, 0.8)
    assert np.allclose(out.q, st.q + 0.8 * st.v, atol=1e-12)
    assert np.allclose(out.v, st.v, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2])
def test_conserved_quantities(m):
    spec = random_spec(2, 3)
    _, st = quantum_state(spec, 3)
    times = np.linspace(0, 0.3, 7)
    traj = rs.integrate(st, m, times)
    Y0 = rs.lax(st).Y
    ref = rs.char_poly(Y0)
    eig0 = np.sort_complex(np.linalg.eigvals(Y0))
    for k in range(len(times)):
        Y = rs.lax(traj.state(k)).Y
        for j in range(1, 4):
            drift = np.trace(np.linalg.matrix_power(Y, j)) - np.trace(np.linalg.matrix_power(Y0, j))
            assert abs(drift) <= 1e-8
        assert np.max(np.abs(rs.char_poly(Y) - ref)) <= 1e-8
        eig = np.linalg.eigvals(Y)
        r, c = linear_sum_assignment(np.abs(eig0[:, None] - eig[None, :]))
        assert np.max(np.abs(eig0[r] - eig[c])) <= 1e-6  # eigenvalues of a Jordan block are ill-conditioned


@pytest.mark.parametrize("N,n,k", [(2, 3, 3), (3, 3, 13), (3, 2, 1)])
def test_first_flow_matches_spectral_curve(N, n, k):
    spec = random_spec(N, n)
    rec, st = quantum_state(spec, k)
    times = np.linspace(0, 0.5, 11)
    traj = rs.integrate(st, 1, times)
    roots = rs.track_roots(rec, spec, times)
    assert np.max(np.abs(traj.q - roots)) <= 1e-6


def test_second_flow_matches_spectral_curve():
    # roots of det(u - U0 + 2 t_2 Y0^2) follow the t_2 flow
    spec = random_spec(2, 3)
    rec, st = quantum_state(spec, 4)
    Y0 = rs.y0_from_record(rec, spec)
    U0 = np.diag(spec.u)
    times = np.linspace(0, 0.1, 5)
    traj = rs.integrate(st, 2, times)
    for k, s in enumerate(times):
        roots = np.linalg.eigvals(U0 - 2 * s * Y0 @ Y0)
        r, c = linear_sum_assignment(np.abs(traj.q[k][:, None] - roots[None, :]))
        assert np.max(np.abs(traj.q[k][r] - roots[c])) <= 1e-6


def test_higher_flow_slopes():
    spec = random_spec(2, 3)
    for rec in cached_spectrum(spec):
        Y0 = rs.y0_from_record(rec, spec)
        U0 = np.diag(spec.u)
        for m in (1, 2):
            Ym = np.linalg.matrix_power(Y0, m)
            order = lambda r: r[np.argmin(np.abs(r[None, :] - np.array(spec.u)[:, None]), axis=1)]  # noqa: E731
            # roots are analytic in complex t_m: Cauchy derivative on a small circle
            s = 1e-3 * np.exp(2j * np.pi * np.arange(16) / 16)
            roots = np.array([order(np.linalg.eigvals(U0 - m * x * Ym)) for x in s])
            slope = np.mean(roots / s[:, None], axis=0)
            assert np.max(np.abs(slope + m * np.diag(Ym))) <= 1e-8
            dq, _ = rs.flow_vector_field(np.array(spec.u), rs.momenta(rs.RSPhase(spec.u, -rec.H)), m)
            assert np.max(np.abs(dq + m * np.diag(Ym))) <= 1e-12 * max(1, np.abs(Ym).max())


def test_root_dynamics_obey_equations_of_motion():
    spec = random_spec(2, 3)
    rec, _ = quantum_state(spec, 3)
    h = 1e-3
    centers = np.linspace(0.05, 0.45, 5)
    path = np.sort(np.concatenate([centers + j * h for j in (-2, -1, 0, 1, 2)]))
    roots = rs.track_roots(rec, spec, path).reshape(len(centers), 5, 3)
    for R in roots:
        v = (R[0] - 8 * R[1] + 8 * R[3] - R[4]) / (12 * h)
        acc = (-R[0] + 16 * R[1] - 30 * R[2] + 16 * R[3] - R[4]) / (12 * h * h)
        assert np.max(np.abs(acc - rs.rs_force(R[2], v))) <= 1e-6
    first = rs.track_roots(rec, spec, [1e-7])[0]
    assert np.allclose((first - np.array(spec.u)) / 1e-7, -rec.H, atol=1e-5)


def test_lax_residual():
    spec = random_spec(2, 3)
    _, st = quantum_state(spec, 3)
    res = rs.lax_residual(st, samples=10)
    assert res["lax"] <= 1e-7 and res["M=WQ"] <= 1e-10 and res["Tv=-W"] <= 1e-10
    with pytest.raises(ValueError):
        rs.lax_residual(st, m=2)


def test_collision_is_reported():
    # two particles heading straight at a unit gap
    st = rs.RSPhase([0.0, 1.5], [1.0, 0.0001])
    with pytest.raises(rs.CollisionError) as exc:
        rs.integrate(st, 1, np.linspace(0, 2, 5))
    assert exc.value.closest < 1e-3
    with pytest.raises(NonGenericSpecError):
        rs.lax(rs.RSPhase([0.0, 1.0], [1.0, 1.0]))


@pytest.mark.parametrize("N,n", [(2, 3), (3, 2), (3, 3)])
def test_quantum_classical_theorem(N, n):
    spec = random_spec(N, n)
    for rec in cached_spectrum(spec):
        Y0 = rs.y0_from_record(rec, spec)
        assert np.allclose(Y0, rs.y0_from_h(rec.H, spec.u))
        assert np.max(np.abs(rs.char_poly(Y0) - rs.twist_poly(rec.m, spec.w))) <= 1e-8
        for j in range(1, n + 1):
            want = sum(k * w**j for k, w in zip(rec.m, spec.w))
            assert abs(np.trace(np.linalg.matrix_power(Y0, j)) - want) <= 1e-8
        assert abs(np.trace(Y0) - sum(rec.H)) <= 1e-12


def test_highest_weight_jordan_block():
    spec = random_spec(2, 3)
    top = cached_spectrum(spec)[0]
    Y0 = rs.y0_from_record(top, spec)
    s = np.linalg.svd(Y0 - spec.w[0] * np.eye(3), compute_uv=False)
    # a single Jordan block: exactly one vanishing singular value
    assert s[-1] < 1e-10 and s[-2] > 1e-3


def test_char_poly_matches_numpy(rng):
    Y = crandn(rng, (4, 4))
    assert np.allclose(rs.char_poly(Y), np.poly(Y))


def test_tau_det_basics():
    spec = random_spec(2, 3)
    for rec in cached_spectrum(spec):
        tau = TauSeries.from_record(rec, spec)
        u = 0.3 - 0.1j
        assert abs(rs.tau_det(rec, spec, u, []) - np.prod([u - x for x in spec.u])) < 1e-12
        h = 1e-6
        d1 = (rs.tau_det(rec, spec, u, [h]) - rs.tau_det(rec, spec, u, [-h])) / (2 * h)
        assert abs(d1 - tau.value((1,), u)) <= 1e-7 * max(1, abs(d1))


@pytest.mark.parametrize("N,n", [(2, 3), (3, 2)])
def test_determinant_formula_coefficients(N, n):
    spec = random_spec(N, n)
    for rec in cached_spectrum(spec):
        d = rs.tau_det_expansion(rec, spec, 4)
        s = tau_expansion(TauSeries.from_record(rec, spec), 4)
        for e in weighted_monomials(4):
            a, b = d.coefficient(e), s.coefficient(e)
            size = max(len(a), len(b))
            a, b = np.pad(a, (0, size - len(a))), np.pad(b, (0, size - len(b)))
            assert np.max(np.abs(a - b)) <= 1e-8 * max(np.max(np.abs(b)), 1e-300)


def test_ba_rational_forms(rng):
    spec = random_spec(2, 3)
    for rec in cached_spectrum(spec):
        for _ in range(3):
            u, z = crandn(rng), crandn(rng, scale=2)
            for adjoint in (False, True):
                out = rs.ba_rational(rec, spec, u, z, adjoint)
                assert out.discrepancy <= 1e-12
                op = stationary_ba_op(u, z, spec, adjoint).tau_ratio()
                v = rec.eigenvector
                quantum = np.vdot(v, op @ v)
                assert abs(quantum - out.value) <= 1e-10 * max(1, abs(out.value))


def test_ba_rational_large_u():
    spec = random_spec(2, 3)
    z = 2.2 + 0.4j
    c0 = np.prod([1 - w / z for w in spec.w])
    for rec in cached_spectrum(spec):
        Y0 = rs.y0_from_record(rec, spec)
        want = -np.trace(Y0 @ np.linalg.inv(z * np.eye(3) - Y0)) * c0
        u = 1e5
        got = (rs.ba_rational(rec, spec, u, z).value - c0) * u
        assert abs(got - want) <= 1e-4 * max(1, abs(want))


@pytest.mark.parametrize("m", [(2, 1), (1, 2), (3, 0)])
def test_adjoint_multiple_pole(m):
    # 1/det(I - g/z) adds a simple pole to the m_a x m_a Jordan block of the resolvent
    spec = random_spec(2, 3)
    rec = next(r for r in cached_spectrum(spec) if r.m == m)
    u = 0.25 + 0.4j
    f = lambda z: rs.ba_rational(rec, spec, u, z, adjoint=True).value  # noqa: E731
    radius = 0.3 * abs(spec.w[0] - spec.w[1])
    for a in range(2):
        if m[a] == 0:
            continue
        order = m[a] + 1
        c = rs.laurent_coefficients(f, spec.w[a], radius, [-order - 1, -order])
        assert abs(c[-order]) > 1e-6 and abs(c[-order - 1]) < 1e-8 * abs(c[-order])


def test_empty_chain_ba_rational():
    from mastertau.model import SpinChainSpec

    spec = SpinChainSpec(2, (), (0.9, -0.5 + 0.7j))
    rec = cached_spectrum(spec)[0]
    z = 1.1 + 0.3j
    c0 = np.prod([1 - w / z for w in spec.w])
    assert abs(rs.ba_rational(rec, spec, 0.4, z).value - c0) < 1e-15
    assert abs(rs.ba_rational(rec, spec, 0.4, z, adjoint=True).value - 1 / c0) < 1e-14
    assert rs.ba_residue_at_infinity([], [], 0.4, 2) == 0


def test_trajectory_csv(tmp_path):
    path = tmp_path / "traj.csv"
    times = [0.0, 0.5]
    roots = np.array([[1 + 2j, 3 - 4j], [0.5, -1j]])
    rs.write_trajectory_csv(path, times, roots)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "Re u_1", "Im u_1", "Re u_2", "Im u_2"]
    assert [float(x) for x in rows[1]] == [0.0, 1.0, 2.0, 3.0, -4.0]
    assert len(rows) == 3
