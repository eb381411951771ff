import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import TABLE_ROWS, four_cycle_matrix
from gmas_stab import stability as stab
from gmas_stab.errors import LatticeViolationError, PreconditionError
from gmas_stab.linalg import Subspace
from gmas_stab.stability import (
    Method,
    Notion,
    SearchOptions,
    Status,
    StabilityVerdict,
    check_diagonal_certificate,
    diagonal_stability_3x3_clause,
    find_destabilizing_D,
    implications,
    is_D_semistable,
    is_D_stable,
    is_diagonally_D_stable_on,
    is_diagonally_semistable,
    is_diagonally_stable,
    is_semistable,
    is_stable,
    lyapunov_certificate,
    notion_lattice_check,
    verify_dual_witness,
)

seeds = st.integers(0, 2**32 - 1)
FAST = SearchOptions(samples=2000)


def random_square(rng, n):
    A = rng.standard_normal((n, n))
    return A - np.diag(np.abs(rng.standard_normal(n))) * rng.integers(0, 3)


def abscissa_AD(A, d, B=None):
    M = A * d[None, :]
    if B is not None:
        M = B.T @ M @ B
    ev = np.linalg.eigvals(M)
    return ev.real.max(), np.linalg.norm(A * d[None, :], 2)


def d_violates(A, d, semi=False, B=None, tau=1e-9):
    top, nrm = abscissa_AD(A, np.asarray(d, dtype=float), B)
    return top > tau * nrm if semi else top >= -tau * nrm


def d_stable_2x2_oracle(A):
    a, b, c, e = A.ravel()
    return a <= 0 and e <= 0 and (a < 0 or e < 0) and a * e - b * c > 0


def diag_stable_2x2_oracle(A):
    a, b, c, e = A.ravel()
    return a < 0 and e < 0 and a * e - b * c > 0


def grid_diag_certificate(A, pts=41):
    """Brute-force search for P = diag(1, p2, ...) on a log grid."""
    n = A.shape[0]
    g = np.logspace(-3, 3, pts)
    mesh = np.meshgrid(*([g] * (n - 1)), indexing="ij")
    P = np.stack([np.ones(mesh[0].size)] + [m.ravel() for m in mesh], axis=1)
    H = P[:, :, None] * A[None]
    H = H + np.transpose(H, (0, 2, 1))
    top = np.linalg.eigvalsh(H)[:, -1]
    nrm = np.linalg.norm(H, 2, axis=(1, 2))
    ok = top < -1e-9 * nrm
    return P[np.argmax(ok)] if ok.any() else None


class TestPlain:
    def test_eigenvalue_threshold(self):
        assert is_stable(-np.eye(2)).holds
        assert is_stable(np.zeros((2, 2))).fails
        assert is_semistable(np.zeros((2, 2))).holds
        v = is_stable(np.diag([-1.0, 1e-3]))
        assert v.fails and v.certificate["offending_eigenvalue"] == pytest.approx(1e-3)

    def test_subspace_requires_invariance(self):
        with pytest.raises(PreconditionError):
            is_stable(np.eye(2), Subspace.from_span([[1], [0]]))

    def test_full_subspace_is_dropped(self):
        v = is_stable(-np.eye(2), Subspace.full(2))
        assert v.on_subspace is None

    def test_restricted_to_kernel_complement(self):
        # A = -v v^T is singular on R^2 but stable on span(v)
        A = -np.outer([1, 2], [1, 2])
        S = Subspace.from_span([[1], [2]])
        assert is_stable(A).fails
        assert is_stable(A, S).holds

    @given(seeds)
    def test_lyapunov_certificate(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 5))
        A = rng.standard_normal((n, n))
        A -= (np.linalg.eigvals(A).real.max() + 0.1) * np.eye(n)
        P = lyapunov_certificate(A)
        assert np.linalg.eigvalsh(P).min() > 0
        assert np.linalg.eigvalsh(P @ A + A.T @ P).max() < 0

    def test_lyapunov_certificate_unstable(self):
        assert lyapunov_certificate(np.eye(2)) is None

    def test_lyapunov_semistable_rotation(self):
        P = lyapunov_certificate(np.array([[0.0, 1.0], [-1.0, 0.0]]), strict=False)
        H = P @ np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert np.abs(H + H.T).max() < 1e-10


class TestDStability:
    @settings(max_examples=200)
    @given(seeds)
    def test_2x2_against_closed_form(self, seed):
        A = random_square(np.random.default_rng(seed), 2)
        v = is_D_stable(A, options=FAST)
        assert v.method is Method.CRITERION_2X2
        assert v.holds == d_stable_2x2_oracle(A)
        if v.fails:
            assert d_violates(A, v.certificate["D"])

    @given(seeds)
    def test_3x3_holds_survives_sampling(self, seed):
        rng = np.random.default_rng(seed)
        A = random_square(rng, 3)
        v = is_D_stable(A, options=FAST)
        assert v.method is Method.CRITERION_3X3
        if v.holds:
            for d in np.exp(rng.uniform(-7, 7, size=(500, 3))):
                assert not d_violates(A, d)
        else:
            assert d_violates(A, v.certificate["D"])

    def test_table_rows(self):
        expected = {(0, 0, 0): True, (5, 0, -3): True, (3, 4, -4): False,
                    (2, -2, 1): False, (0, -2, -3): False}
        for row in TABLE_ROWS:
            v = is_D_stable(four_cycle_matrix(*row))
            assert v.method is Method.CRITERION_3X3
            assert v.holds == expected[row], row

    def test_3x3_failure_names_clause(self):
        v = is_D_stable(four_cycle_matrix(3, 4, -4))
        assert v.clauses["violated"] == "(b) domination inequality"
        assert d_violates(four_cycle_matrix(3, 4, -4), v.certificate["D"])
        v = is_D_stable(four_cycle_matrix(2, -2, 1))
        assert v.clauses["violated"] == "(a) P0+ matrix"

    @given(seeds)
    def test_dim1_against_rank_one_oracle(self, seed):
        # A = b c^T maps R^n onto span(b); AD on span(b) is multiplication by c.Db
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        b = rng.standard_normal(n)
        c = rng.standard_normal(n) * (rng.random(n) < 0.7)
        signs = np.sign(b * c)
        if rng.random() < 0.5:
            c = -np.abs(c) * np.sign(b)
            signs = np.sign(b * c)
        A = np.outer(b, c)
        S = Subspace.from_span(b[:, None])
        for semi in (False, True):
            v = (is_D_semistable if semi else is_D_stable)(A, S, FAST)
            assert v.method is Method.CRITERION_DIMS1
            expect = np.all(signs <= 0) and (semi or np.any(signs < 0))
            assert v.holds == expect
            if v.fails:
                assert d_violates(A, v.certificate["D"], semi, S.basis)

    @given(seeds)
    def test_dim2_agrees_with_sampling(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 5))
        B = rng.standard_normal((n, 2))
        W = rng.standard_normal((2, n))
        A = B @ W
        # bias towards the interesting region
        A -= B @ np.linalg.pinv(B) * rng.uniform(0, 3)
        S = Subspace.from_span(B)
        v = is_D_stable(A, S, FAST)
        assert v.method is Method.CRITERION_DIMS2
        if v.holds:
            for d in np.exp(rng.uniform(-7, 7, size=(500, n))):
                assert not d_violates(A, d, False, S.basis)
        else:
            assert d_violates(A, v.certificate["D"], False, S.basis)

    def test_sampling_is_deterministic(self):
        A = four_cycle_matrix(3, 4, -4)
        a = find_destabilizing_D(A, semi=True, options=FAST)
        b = find_destabilizing_D(A, semi=True, options=FAST)
        np.testing.assert_array_equal(a[0], b[0])

    def test_sampling_never_certifies(self):
        A = -np.eye(4) + 0.1 * np.ones((4, 4))
        v = is_D_stable(A, options=SearchOptions(samples=500))
        assert v.status in (Status.INCONCLUSIVE, Status.FAILS)
        assert v.method is Method.SAMPLING_FALSIFIER
        assert not v.certified or v.fails


class TestDiagonal:
    @settings(max_examples=200)
    @given(seeds)
    def test_2x2_against_closed_form(self, seed):
        A = random_square(np.random.default_rng(seed), 2)
        v = is_diagonally_stable(A, options=FAST)
        assert v.holds == diag_stable_2x2_oracle(A)
        if v.holds:
            assert check_diagonal_certificate(A, v.certificate["P"])
        else:
            assert verify_dual_witness(A, v.certificate["X"])

    @given(seeds)
    def test_3x3_against_grid(self, seed):
        A = random_square(np.random.default_rng(seed), 3)
        v = is_diagonally_stable(A, options=FAST)
        P = grid_diag_certificate(A)
        if v.fails:
            assert P is None
            assert verify_dual_witness(A, v.certificate["X"])
        else:
            assert check_diagonal_certificate(A, v.certificate["P"])

    def test_3x3_clause_interval(self):
        ok, clauses = diagonal_stability_3x3_clause(four_cycle_matrix(0, 0, 0))
        assert ok and "y" in clauses
        ok, clauses = diagonal_stability_3x3_clause(four_cycle_matrix(5, 0, -3))
        assert not ok

    def test_table_rows(self):
        assert is_diagonally_stable(four_cycle_matrix(0, 0, 0)).holds
        for row in TABLE_ROWS[1:]:
            v = is_diagonally_stable(four_cycle_matrix(*row))
            assert v.fails and v.method is Method.CRITERION_3X3

    @given(seeds)
    def test_dual_witness_blocks_every_P(self, seed):
        rng = np.random.default_rng(seed)
        A = random_square(rng, 3)
        v = is_diagonally_stable(A, options=FAST)
        if not v.fails:
            return
        X = v.certificate["X"]
        for p in np.exp(rng.uniform(-5, 5, size=(200, 3))):
            H = p[:, None] * A
            assert np.trace((H + H.T) @ X) >= -1e-9 * np.linalg.norm(H)

    def test_witness_rejects_indefinite(self):
        assert not verify_dual_witness(-np.eye(2), np.diag([1.0, -1.0]))
        assert not verify_dual_witness(-np.eye(2), np.eye(2))

    def test_semistable_rotation(self):
        v = is_diagonally_semistable(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert v.holds
        assert check_diagonal_certificate(np.array([[0.0, 1.0], [-1.0, 0.0]]), v.certificate["P"],
                                          semi=True)

    def test_semistable_nilpotent_fails(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        v = is_diagonally_semistable(A)
        assert v.fails and verify_dual_witness(A, v.certificate["X"], semi=True)

    def test_boundary_row_is_inconclusive(self):
        # semistable only at an isolated P; numerical search cannot reach it
        A = four_cycle_matrix(5, 0, -3)
        v = is_diagonally_semistable(A, options=SearchOptions(diag_starts=5))
        assert v.status is Status.INCONCLUSIVE
        p = np.array([4.0, 1.0, 4.0])
        H = p[:, None] * A
        ev = np.linalg.eigvalsh(H + H.T)
        assert ev.max() == pytest.approx(0.0, abs=1e-12)

    def test_dim1_subspace(self):
        A = -np.outer([1, -1], [1, -1])
        S = Subspace.from_span([[1], [-1]])
        v = is_diagonally_stable(A, S)
        assert v.holds
        assert check_diagonal_certificate(A, v.certificate["P"], S)

    def test_diag_D_full_space(self):
        v = is_diagonally_D_stable_on(four_cycle_matrix(0, 0, 0))
        assert v.notion is Notion.DIAG_D_STABLE and v.holds


class TestLattice:
    def test_negative_identity(self):
        assert all(v.holds for v in notion_lattice_check(-np.eye(3)))

    def test_zero_matrix(self):
        got = {v.notion: v.status for v in notion_lattice_check(np.zeros((2, 2)))}
        for n in (Notion.SEMISTABLE, Notion.D_SEMISTABLE, Notion.DIAG_SEMISTABLE, Notion.DIAG_D_SEMISTABLE):
            assert got[n] is Status.HOLDS
        for n in (Notion.STABLE, Notion.D_STABLE, Notion.DIAG_STABLE, Notion.DIAG_D_STABLE):
            assert got[n] is Status.FAILS

    def test_table_row_three(self):
        got = {v.notion: v.status for v in notion_lattice_check(four_cycle_matrix(3, 4, -4))}
        assert got[Notion.STABLE] is Status.HOLDS
        assert got[Notion.D_STABLE] is Status.FAILS
        assert got[Notion.DIAG_STABLE] is Status.FAILS

    def test_order_and_implications(self):
        out = notion_lattice_check(-np.eye(2))
        assert [v.notion for v in out] == list(Notion)
        assert len(implications(True)) == len(implications(False)) + 2

    @given(seeds)
    def test_random_matrices_are_consistent(self, seed):
        rng = np.random.default_rng(seed)
        A = random_square(rng, int(rng.integers(2, 4)))
        got = {v.notion: v for v in notion_lattice_check(A, options=SearchOptions(samples=500, diag_starts=5))}
        for lhs, rhs in implications(True):
            assert not (got[lhs].holds and got[rhs].fails)

    def test_violation_raises(self, monkeypatch):
        def liar(A, S=None, options=None):
            return StabilityVerdict(Notion.D_STABLE, Status.HOLDS, Method.CRITERION_2X2, S)

        monkeypatch.setattr(stab, "is_D_stable", liar)
        with pytest.raises(LatticeViolationError):
            notion_lattice_check(np.eye(2))

    def test_propagation_settles_inconclusive(self):
        # diag_semistable is inconclusive for the boundary row; D-semistability holds
        out = {v.notion: v for v in notion_lattice_check(four_cycle_matrix(5, 0, -3),
                                                          options=SearchOptions(samples=500, diag_starts=5))}
        assert out[Notion.D_SEMISTABLE].holds
        assert out[Notion.DIAG_STABLE].fails


def test_verdict_to_dict():
    d = is_D_stable(four_cycle_matrix(3, 4, -4)).to_dict()
    assert d["status"] == "fails" and d["method"] == "criterion_3x3" and d["certified"]
    assert len(d["certificate"]["D"]) == 3


def test_unstable_matrix_with_complex_spectrum_gets_dual_witness():
    # every principal minor has the right sign, so only an eigenvector blocks P
    A = np.array([[-1.0, 0.0, 1.86526555],
                  [6.93914344, -1.0, 0.0],
                  [-5.93914344, -3.53645166, -1.0]])
    v = is_diagonally_stable(A)
    assert v.status is Status.FAILS
    X = v.certificate["X"]
    assert np.linalg.eigvalsh(X).min() > -1e-12
    assert np.einsum("ij,ji->i", A, X).min() >= 0
