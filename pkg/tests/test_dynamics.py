import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import four_cycle_matrix, random_network, random_wr_network
from gmas_stab.catalog import four_cycle, reversible_chain, xy_unique
from gmas_stab.dynamics import (
    construct_rates,
    cycle_limit_matrix,
    epsilon_family,
    integrate,
    is_complex_balanced,
    jacobian,
    kernel_lemma_check,
    monomials,
    rhs,
    rhs_matrix_form,
)
from gmas_stab.errors import PreconditionError, StiffnessError
from gmas_stab.network import GmasNetwork, enumerate_cycles, stoichiometric_subspace

seeds = st.integers(0, 2**32 - 1)


def edge_sum_rhs(net, k, x):
    """Reference vector field: one term per reaction, written out explicitly."""
    out = np.zeros(net.n)
    for (i, j), kk in zip(net.edges, k):
        rate = kk * np.prod(x ** net.Ytilde[:, i])
        out += rate * (net.Y[:, j] - net.Y[:, i])
    return out


def fd_jacobian(net, k, x, h=1e-6):
    J = np.zeros((net.n, net.n))
    for j in range(net.n):
        e = np.zeros(net.n)
        e[j] = h * x[j]
        J[:, j] = (edge_sum_rhs(net, k, x + e) - edge_sum_rhs(net, k, x - e)) / (2 * e[j])
    return J


def test_monomials():
    np.testing.assert_allclose(monomials(np.array([[1.0, 0.0, -1.0], [2.0, 0.5, 0.0]]), [2.0, 4.0]),
                               [32.0, 2.0, 0.5])


def test_rhs_hand_example():
    # X (X) <-> Y (0): dx/dt = -k1 x + k2
    f = rhs(xy_unique(), [2.0, 3.0], [5.0, 7.0])
    np.testing.assert_allclose(f, [-7.0, 7.0])


def test_rhs_rejects_nonpositive_state():
    with pytest.raises(PreconditionError):
        rhs(xy_unique(), [1.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        rhs(xy_unique(), [1.0, 1.0], [1.0])


@given(seeds)
def test_rhs_forms_agree(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    k = rng.uniform(0.1, 5, net.n_edges)
    x = rng.uniform(0.2, 3, net.n)
    ref = edge_sum_rhs(net, k, x)
    tol = 1e-12 * max(1.0, np.abs(ref).max())
    np.testing.assert_allclose(rhs(net, k, x), ref, atol=tol)
    np.testing.assert_allclose(rhs_matrix_form(net, k, x), ref, atol=tol)


@given(seeds)
def test_jacobian_finite_differences(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    k = rng.uniform(0.1, 5, net.n_edges)
    x = rng.uniform(0.5, 2, net.n)
    J = jacobian(net, k, x)
    ref = fd_jacobian(net, k, x)
    assert np.linalg.norm(J - ref) <= 1e-6 * max(np.linalg.norm(ref), 1e-12) + 1e-9


def test_jacobian_unit_four_cycle():
    for row in [(0, 0, 0), (3, 4, -4)]:
        J = jacobian(four_cycle(*row), np.ones(4), np.ones(3))
        np.testing.assert_allclose(J, four_cycle_matrix(*row), atol=1e-14)


class TestComplexBalance:
    def test_xy(self):
        ok, res = is_complex_balanced(xy_unique(), [2.0, 3.0], [1.5, 1.0])
        assert ok and res == pytest.approx(0.0, abs=1e-15)
        ok, _ = is_complex_balanced(xy_unique(), [2.0, 3.0], [1.0, 1.0])
        assert not ok

    def test_unit_cycle_at_ones(self):
        assert is_complex_balanced(four_cycle(3, 4, -4), np.ones(4), np.ones(3))[0]

    @given(seeds)
    def test_construct_rates(self, seed):
        rng = np.random.default_rng(seed)
        net = random_wr_network(rng)
        x = np.exp(rng.uniform(-2, 2, net.n))
        cert = construct_rates(net, x)
        assert cert.ok
        assert np.all(cert.k > 0)
        assert np.linalg.norm(edge_sum_rhs(net, cert.k, x)) <= 1e-9 * max(cert.scale, 1.0)

    def test_construct_rates_needs_weak_reversibility(self):
        net = GmasNetwork.from_matrices(np.eye(2), np.eye(2), [(0, 1)])
        with pytest.raises(PreconditionError):
            construct_rates(net, [1.0, 1.0])


@given(seeds)
def test_kernel_lemma(seed):
    rng = np.random.default_rng(seed)
    net = random_wr_network(rng)
    x = np.exp(rng.uniform(-1, 1, net.n))
    out = kernel_lemma_check(net, construct_rates(net, x).k, x)
    assert out["holds"], out


def test_kernel_lemma_rejects_unbalanced():
    with pytest.raises(PreconditionError):
        kernel_lemma_check(xy_unique(), [1.0, 1.0], [2.0, 1.0])


class TestEpsilonFamily:
    def test_limit_and_balance(self):
        net = reversible_chain(np.eye(4), np.eye(4))
        cycles = enumerate_cycles(net)
        x = np.array([0.5, 1.0, 2.0, 3.0])
        errs = []
        for eps in (1e-1, 1e-2, 1e-3):
            mem = epsilon_family(net, cycles[1], x, eps, cycles)
            assert mem.balanced
            errs.append(mem.error)
        assert 5 <= errs[0] / errs[1] <= 20 and 5 <= errs[1] / errs[2] <= 20

    def test_limit_matrix_subspace(self):
        net = reversible_chain(np.eye(3), np.eye(3))
        c = enumerate_cycles(net)[0]
        A_C, S_C = cycle_limit_matrix(net, c)
        assert S_C.dim == 1
        assert S_C.contains(A_C)

    def test_rejects_foreign_cycle(self):
        net = reversible_chain(np.eye(3), np.eye(3))
        other = enumerate_cycles(four_cycle(0, 0, 0))[0]
        with pytest.raises(PreconditionError):
            epsilon_family(net, other, np.ones(3), 0.1)

    def test_rejects_nonpositive_eps(self):
        net = reversible_chain(np.eye(3), np.eye(3))
        with pytest.raises(ValueError):
            epsilon_family(net, enumerate_cycles(net)[0], np.ones(3), 0.0)


class TestIntegrate:
    def test_equilibrium_stays(self):
        traj = integrate(xy_unique(), [2.0, 3.0], [1.5, 1.0], 10.0)
        assert traj.status == "completed"
        np.testing.assert_allclose(traj.x[-1], [1.5, 1.0], atol=1e-9)

    def test_convergence_and_conservation(self):
        # x + y is conserved and dx/dt = 1 - x, so the class x + y = 3 ends at (1, 2)
        traj = integrate(xy_unique(), [1.0, 1.0], [2.5, 0.5], 100.0)
        assert np.linalg.norm(traj.x[-1] - [1.0, 2.0]) < 1e-4
        assert traj.max_drift <= 1e-6

    def test_four_cycle_converges(self):
        net = four_cycle(0, 0, 0)
        traj = integrate(net, np.ones(4), [1.2, 0.9, 1.1], 100.0)
        assert np.linalg.norm(traj.x[-1] - 1.0) < 1e-4

    def test_stoichiometric_class(self):
        rng = np.random.default_rng(3)
        net = reversible_chain([[0, 1, 1, 0], [0, 0, 1, 2]], [[0, 1, 1, 0], [0, 0, 1, 2]])
        S = stoichiometric_subspace(net)
        traj = integrate(net, rng.uniform(0.5, 2, net.n_edges), [1.0, 2.0], 20.0)
        assert S.contains(traj.x[-1] - traj.x[0], rtol=1e-12) or S.is_full

    def test_positivity_floor(self):
        # X (0) -> 0 at unit rate: x(t) = x0 - t
        net = GmasNetwork.from_matrices(np.array([[1.0, 0.0]]), np.array([[0.0, 0.0]]), [(0, 1)])
        traj = integrate(net, [1.0], [0.5], 5.0)
        assert traj.status == "positivity_floor"
        assert traj.t[-1] == pytest.approx(0.5, rel=1e-6)

    def test_blowup_raises(self):
        # 0 (2X) -> X: dx/dt = x^2 explodes at t = 1 / x0
        net = GmasNetwork.from_matrices(np.array([[0.0, 1.0]]), np.array([[2.0, 0.0]]), [(0, 1)])
        with pytest.raises(StiffnessError) as info:
            integrate(net, [1.0], [1.0], 5.0)
        assert info.value.trajectory.t[-1] <= 1.0 + 1e-6

    def test_csv(self):
        traj = integrate(xy_unique(), [1.0, 1.0], [1.0, 1.0], 1.0)
        lines = traj.to_csv().splitlines()
        assert lines[0] == "t,x1,x2"
        assert len(lines) == len(traj.t) + 1
        assert traj.to_csv(["X", "Y"]).startswith("t,X,Y\n")
