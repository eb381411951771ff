import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_network, random_wr_network
from gmas_stab.catalog import four_cycle, reversible_chain, three_species_cycle, xy_unique
from gmas_stab.errors import NetworkSyntaxError, NetworkValidationError, ResourceLimitError
from gmas_stab.network import (
    Cycle,
    GmasNetwork,
    enumerate_cycles,
    incidence_matrices,
    is_single_cycle,
    kinetic_subspace,
    laplacian,
    parse_network,
    serialize_network,
    stoichiometric_subspace,
    structural_matrices,
    weakly_reversible,
)

FOUR_CYCLE_TEXT = """
species: X Y Z
vertex v1: stoich = 0        , kinetic = -3 Z
vertex v2: stoich = X        , kinetic = X
vertex v3: stoich = Y        , kinetic = 3 X + Y
vertex v4: stoich = Z        , kinetic = 4 Y + Z
edge v1 -> v2 : k = 1.0
edge v2 -> v3 : k = 1.0
edge v3 -> v4 : k = 1.0
edge v4 -> v1 : k = 1.0
"""

XY_TEXT = """# X (X) <-> Y (0)
species: X Y
vertex a: stoich = X, kinetic = X
vertex b: stoich = Y, kinetic = 0
edge a <-> b : k = 1, 2
"""


def three_cycle(Yt=None):
    Y = np.eye(3)
    return GmasNetwork.from_matrices(Y, Y if Yt is None else Yt, [(0, 1), (1, 2), (2, 0)])


class TestParse:
    def test_four_cycle_file(self):
        net = parse_network(FOUR_CYCLE_TEXT)
        assert (net.n, net.m, net.n_edges) == (3, 4, 4)
        np.testing.assert_array_equal(net.Ytilde[:, 2], [3, 1, 0])
        np.testing.assert_array_equal(net.Ytilde[:, 0], [0, 0, -3])
        np.testing.assert_array_equal(net.rate_vector(), np.ones(4))

    def test_reversible_shorthand(self):
        net = parse_network(XY_TEXT)
        assert (net.n, net.m, net.n_edges) == (2, 2, 2)
        assert net.edges == ((0, 1), (1, 0))
        assert net.rates == (1.0, 2.0)

    def test_no_vertices(self):
        with pytest.raises(NetworkValidationError, match="no vertices"):
            parse_network("species: X\n")

    def test_fractional_and_implicit_coefficients(self):
        net = parse_network("species: A B\nvertex p: stoich = 0.5 A + B, kinetic = -1.5 A - B\n"
                            "vertex q: stoich = 0\nedge p -> q\n")
        np.testing.assert_array_equal(net.Y[:, 0], [0.5, 1])
        np.testing.assert_array_equal(net.Ytilde[:, 0], [-1.5, -1])
        assert net.rates == (None,)
        assert net.rate_vector() is None

    @pytest.mark.parametrize("text, line, col", [
        ("species: X\nvertex a: stoich = Q\n", 2, 20),
        ("species: X\nvertex a: stoich = X\nedge a -> b\n", 3, 11),
        ("species: X\nfoo bar\n", 2, 1),
        ("species: X\nvertex a: stoich = X +\n", 2, 22),
    ])
    def test_syntax_error_location(self, text, line, col):
        with pytest.raises(NetworkSyntaxError) as info:
            parse_network(text)
        assert info.value.line == line
        assert info.value.column == col

    def test_missing_kinetic_on_source(self):
        with pytest.raises(NetworkValidationError, match="kinetic"):
            parse_network("species: X\nvertex a: stoich = X\nvertex b: stoich = 0\nedge a -> b\n")

    def test_self_loop(self):
        with pytest.raises(NetworkValidationError, match="self-loop"):
            parse_network("species: X\nvertex a: stoich = X, kinetic = X\nedge a -> a\n")

    def test_duplicate_edge(self):
        with pytest.raises(NetworkValidationError, match="duplicate edge"):
            parse_network("species: X\nvertex a: stoich = X, kinetic = X\n"
                          "vertex b: stoich = 0, kinetic = 0\nedge a -> b\nedge a <-> b\n")

    def test_negative_stoichiometry(self):
        with pytest.raises(NetworkSyntaxError):
            parse_network("species: X\nvertex a: stoich = -X, kinetic = X\n")

    def test_nonpositive_rate(self):
        with pytest.raises(NetworkSyntaxError, match="positive"):
            parse_network("species: X\nvertex a: stoich = X, kinetic = X\n"
                          "vertex b: stoich = 0\nedge a -> b : k = 0\n")


@given(st.integers(0, 2**32 - 1))
def test_serialize_roundtrip(seed):
    net = random_network(np.random.default_rng(seed))
    k = np.random.default_rng(seed).uniform(0.1, 5, net.n_edges)
    net = net.with_rates(k)
    back = parse_network(serialize_network(net))
    assert back == net
    assert back.rates == net.rates
    assert serialize_network(back) == serialize_network(net)


class TestMatrices:
    def test_three_cycle_incidence(self):
        IE, IEs = incidence_matrices(3, [(0, 1), (1, 2), (2, 0)])
        np.testing.assert_array_equal(IE, [[-1, 0, 1], [1, -1, 0], [0, 1, -1]])
        np.testing.assert_array_equal(IEs, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])

    def test_xy_matrices(self):
        M = structural_matrices(xy_unique())
        np.testing.assert_array_equal(M.Y, np.eye(2))
        np.testing.assert_array_equal(M.Ytilde, [[1, 0], [0, 0]])

    def test_nonsource_kinetic_is_zero(self):
        net = parse_network("species: X\nvertex a: stoich = X, kinetic = X\n"
                            "vertex b: stoich = 0, kinetic = 7 X\nedge a -> b\n")
        np.testing.assert_array_equal(net.Ytilde, [[1, 0]])

    def test_laplacian_unit_three_cycle(self):
        np.testing.assert_array_equal(laplacian(three_cycle(), np.ones(3)),
                                      [[-1, 0, 1], [1, -1, 0], [0, 1, -1]])

    def test_laplacian_reversible_pair(self):
        np.testing.assert_array_equal(laplacian(xy_unique(), [2, 3]), [[-2, 3], [2, -3]])

    def test_laplacian_rejects_bad_rates(self):
        with pytest.raises(ValueError):
            laplacian(xy_unique(), [1.0])
        with pytest.raises(ValueError):
            laplacian(xy_unique(), [1.0, -1.0])

    @given(st.integers(0, 2**32 - 1))
    def test_laplacian_structure(self, seed):
        rng = np.random.default_rng(seed)
        net = random_network(rng)
        k = rng.uniform(0.01, 10, net.n_edges)
        A = laplacian(net, k)
        assert np.abs(A.sum(axis=0)).max() <= 1e-12
        off = A - np.diag(np.diag(A))
        assert off.min() >= 0
        IE, _ = incidence_matrices(net.m, net.edges)
        np.testing.assert_array_equal(IE.sum(axis=0), 0)
        assert ((IE == -1).sum(axis=0) == 1).all() and ((IE == 1).sum(axis=0) == 1).all()

    @given(st.integers(0, 2**32 - 1))
    def test_image_of_YA_in_S(self, seed):
        rng = np.random.default_rng(seed)
        net = random_network(rng)
        M = net.Y @ laplacian(net, rng.uniform(0.1, 5, net.n_edges))
        S = stoichiometric_subspace(net)
        assert S.contains(M, rtol=1e-10)


class TestGraph:
    def test_weak_reversibility(self):
        assert weakly_reversible(three_cycle())
        single = GmasNetwork.from_matrices(np.eye(2), np.eye(2), [(0, 1)])
        assert not weakly_reversible(single)
        two_pairs = GmasNetwork.from_matrices(np.eye(4), np.eye(4), [(0, 1), (1, 0), (2, 3), (3, 2)])
        assert weakly_reversible(two_pairs)

    def test_four_cycle_has_one_cycle(self):
        cycles = enumerate_cycles(four_cycle(0, 0, 0))
        assert len(cycles) == 1 and len(cycles[0]) == 4
        assert is_single_cycle(four_cycle(0, 0, 0))

    def test_chain_cycles(self):
        m = 5
        net = reversible_chain(np.eye(m), np.eye(m))
        cycles = enumerate_cycles(net)
        assert len(cycles) == m - 1
        assert all(len(c) == 2 for c in cycles)
        assert not is_single_cycle(net)

    def test_complete_reversible_triangle(self):
        edges = [(i, j) for i in range(3) for j in range(3) if i != j]
        cycles = enumerate_cycles(GmasNetwork.from_matrices(np.eye(3), np.eye(3), edges))
        assert sorted(len(c) for c in cycles) == [2, 2, 2, 3, 3]

    def test_cycle_cap(self):
        edges = [(i, j) for i in range(4) for j in range(4) if i != j]
        net = GmasNetwork.from_matrices(np.eye(4), np.eye(4), edges)
        with pytest.raises(ResourceLimitError):
            enumerate_cycles(net, cap=5)

    @given(st.integers(0, 2**32 - 1))
    def test_cycles_are_canonical_and_unique(self, seed):
        net = random_wr_network(np.random.default_rng(seed))
        cycles = enumerate_cycles(net)
        seen = set()
        for c in cycles:
            assert c.vertex_indices[0] == min(c.vertex_indices)
            assert len(set(c.vertex_indices)) == len(c)
            for t, e in enumerate(c.edge_indices):
                i, j = net.edges[e]
                assert i == c.vertex_indices[t]
                assert j == c.vertex_indices[(t + 1) % len(c)]
            seen.add(c.vertex_indices)
        assert len(seen) == len(cycles)
        assert cycles == sorted(cycles, key=lambda c: c.vertex_indices)
        # every edge of a weakly reversible graph lies on a cycle
        assert set().union(*(set(c.edge_indices) for c in cycles)) == set(range(net.n_edges))


class TestSubspaces:
    def test_four_cycle_dimension(self):
        assert stoichiometric_subspace(four_cycle(0, 0, 0)).dim == 3

    def test_three_species_cycle_dimension(self):
        assert stoichiometric_subspace(three_species_cycle((1, 0, 0), (0, 1, 0), (0, 0, 1))).dim == 2

    def test_xy_subspace(self):
        S = stoichiometric_subspace(xy_unique())
        assert S.dim == 1
        np.testing.assert_allclose(np.abs(S.basis[:, 0]), [2**-0.5, 2**-0.5])
        assert S.basis[0, 0] * S.basis[1, 0] < 0
        St = kinetic_subspace(xy_unique())
        np.testing.assert_allclose(np.abs(St.basis[:, 0]), [1, 0])
