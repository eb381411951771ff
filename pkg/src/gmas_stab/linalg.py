"""Dense linear algebra restricted to a linear subspace.

Everything here works on small dense matrices. Subspaces are carried as
orthonormal bases; operators with image inside a subspace are compressed to
``B.T @ A @ B`` before any spectral question is asked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalError, PreconditionError, ResourceLimitError

#: relative tolerance used for every sign decision on eigenvalues and minors
TAU = 1e-9
#: singular values below RANK_RTOL * largest are treated as zero
RANK_RTOL = 1e-10
#: relative residual allowed for ``im A`` to count as contained in ``S``
CONTAINMENT_RTOL = 1e-8
#: margin that an LP must exceed for a sign pattern to count as realizable
LP_MARGIN = 1e-9

MAX_MINOR_DIM = 14
MAX_SIGN_DIM = 12


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n given by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def from_span(cls, M, rtol=RANK_RTOL):
        """Orthonormal basis of the column space of ``M``."""
        M = np.atleast_2d(np.asarray(M, dtype=float))
        n = M.shape[0]
        if M.size == 0:
            return cls(n, np.zeros((n, 0)))
        U, s, _ = np.linalg.svd(M, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return cls(n, np.zeros((n, 0)))
        r = int(np.sum(s > rtol * s[0]))
        return cls(n, U[:, :r])

    @classmethod
    def full(cls, n):
        return cls(n, np.eye(n))

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def is_full(self):
        return self.dim == self.ambient_dim

    def projector(self):
        return self.basis @ self.basis.T

    def contains(self, v, rtol=CONTAINMENT_RTOL):
        """True if every column of ``v`` lies in the subspace up to ``rtol``."""
        v = np.asarray(v, dtype=float)
        scale = np.linalg.norm(v)
        if scale == 0.0:
            return True
        resid = v - self.basis @ (self.basis.T @ v)
        return np.linalg.norm(resid) <= rtol * scale

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return subspace_distance(self, other) <= 1e-8

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


class Definiteness(str, Enum):
    NEGATIVE_DEFINITE = "negative_definite"
    NEGATIVE_SEMIDEFINITE = "negative_semidefinite"
    INDEFINITE_OR_POSITIVE = "indefinite_or_positive"


def subspace_distance(S1, S2):
    """Sine of the largest principal angle between two subspaces of equal dimension."""
    if S1.dim != S2.dim:
        return 1.0
    if S1.dim == 0:
        return 0.0
    # residual of S2's basis off S1; avoids the cancellation in sqrt(1 - cos^2)
    R = S2.basis - S1.basis @ (S1.basis.T @ S2.basis)
    return float(min(1.0, np.linalg.norm(R, 2)))


def orthogonal_complement(S):
    """Orthonormal basis of S-perp."""
    n, s = S.ambient_dim, S.dim
    if s == 0:
        return Subspace.full(n)
    if s == n:
        return Subspace(n, np.zeros((n, 0)))
    Q, _ = np.linalg.qr(S.basis, mode="complete")
    # re-orthogonalize against S to clean rounding
    C = Q[:, s:]
    C = C - S.basis @ (S.basis.T @ C)
    C, _ = np.linalg.qr(C)
    return Subspace(n, C)


def _basis_of(S, n):
    return np.eye(n) if S is None else S.basis


def check_image_in(A, S, rtol=CONTAINMENT_RTOL):
    A = np.asarray(A, dtype=float)
    if S is None:
        return
    if S.ambient_dim != A.shape[0]:
        raise PreconditionError(
            f"matrix is {A.shape[0]}x{A.shape[1]} but subspace lives in R^{S.ambient_dim}")
    if not S.contains(A, rtol):
        raise PreconditionError("image of the matrix is not contained in the subspace")


def restrict(A, S):
    """Compress ``A`` to the subspace: returns ``B.T A B``.

    Raises PreconditionError when ``im A`` is not contained in ``S``.
    """
    A = np.asarray(A, dtype=float)
    if S is None:
        return A.copy()
    check_image_in(A, S)
    B = S.basis
    return B.T @ A @ B


def eigenvalues(M):
    """Eigenvalues sorted by (real part, imaginary part)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise NumericalError("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc
    ev = np.asarray(ev, dtype=complex)
    order = np.lexsort((ev.imag, ev.real))
    return ev[order]


def spectral_abscissa(M):
    ev = eigenvalues(M)
    return float(ev.real.max()) if ev.size else -np.inf


def definiteness_on(H, S=None, tau=TAU):
    """Classify the quadratic form of symmetric ``H`` on ``S``."""
    H = np.asarray(H, dtype=float)
    scale = np.linalg.norm(H, 2) if H.size else 0.0
    if np.max(np.abs(H - H.T), initial=0.0) > 1e-10 * max(scale, 1.0):
        raise PreconditionError("matrix is not symmetric")
    B = _basis_of(S, H.shape[0])
    if B.shape[1] == 0:
        return Definiteness.NEGATIVE_DEFINITE
    R = B.T @ H @ B
    top = float(np.linalg.eigvalsh(0.5 * (R + R.T)).max())
    if top < -tau * scale:
        return Definiteness.NEGATIVE_DEFINITE
    if top <= tau * scale:
        return Definiteness.NEGATIVE_SEMIDEFINITE
    return Definiteness.INDEFINITE_OR_POSITIVE


def max_eig_on(H, S=None):
    """Largest eigenvalue of the compression of symmetric ``H`` to ``S``."""
    B = _basis_of(S, H.shape[0])
    if B.shape[1] == 0:
        return -np.inf
    R = B.T @ H @ B
    return float(np.linalg.eigvalsh(0.5 * (R + R.T)).max())


# ---------------------------------------------------------------------------
# principal minors
# ---------------------------------------------------------------------------

def signed_principal_minors(A, max_order=None):
    """All ``(alpha, (-1)^|alpha| det A[alpha, alpha])`` for nonempty index sets.

    Ordered by size, then lexicographically. ``max_order`` truncates the list.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n > MAX_MINOR_DIM:
        raise ResourceLimitError(f"principal minors capped at n={MAX_MINOR_DIM}, got n={n}")
    top = n if max_order is None else min(n, max_order)
    out = []
    for k in range(1, top + 1):
        for alpha in itertools.combinations(range(n), k):
            sub = A[np.ix_(alpha, alpha)]
            out.append((alpha, float((-1) ** k * np.linalg.det(sub))))
    return out


def minor_is_zero(A, alpha, value, tau=TAU):
    sub = np.asarray(A, dtype=float)[np.ix_(alpha, alpha)]
    bound = float(np.prod(np.linalg.norm(sub, axis=1)))
    return abs(value) <= tau * bound


def classify_minors(A, max_order=None, tau=TAU):
    """Split signed minors into negative / zero / positive under the zero tolerance."""
    neg, zero, pos = [], [], []
    for alpha, val in signed_principal_minors(A, max_order):
        if minor_is_zero(A, alpha, val, tau):
            zero.append((alpha, val))
        elif val > 0:
            pos.append((alpha, val))
        else:
            neg.append((alpha, val))
    return neg, zero, pos


def is_P_matrix(A, tau=TAU):
    """All signed principal minors positive (i.e. ``-A`` is a P-matrix)."""
    neg, zero, _ = classify_minors(A, tau=tau)
    return not neg and not zero


def is_P0plus_matrix(A, max_order=None, tau=TAU):
    """Signed minors non-negative, with a positive one of every order up to ``max_order``."""
    return p0plus_violation(A, max_order, tau) is None


def p0plus_violation(A, max_order=None, tau=TAU):
    """First violated P0+ clause as a dict, or None."""
    A = np.asarray(A, dtype=float)
    neg, zero, pos = classify_minors(A, max_order, tau)
    if neg:
        alpha, val = neg[0]
        return {"clause": "negative signed minor", "index_set": list(alpha), "value": val}
    top = A.shape[0] if max_order is None else min(A.shape[0], max_order)
    orders = {len(a) for a, _ in pos}
    for k in range(1, top + 1):
        if k not in orders:
            return {"clause": "no positive signed minor of order", "order": k}
    return None


def p0_violation(A, max_order=None, tau=TAU):
    neg, _, _ = classify_minors(A, max_order, tau)
    if neg:
        alpha, val = neg[0]
        return {"clause": "negative signed minor", "index_set": list(alpha), "value": val}
    return None


# ---------------------------------------------------------------------------
# sign vectors
# ---------------------------------------------------------------------------

def sign_vector(v, atol=0.0):
    v = np.asarray(v, dtype=float)
    s = np.sign(v).astype(int)
    s[np.abs(v) <= atol] = 0
    return s


def realize_sign_pattern(S, sigma, margin=LP_MARGIN):
    """Vector in ``S`` with sign pattern ``sigma``, or None.

    Solves ``max t`` subject to ``sigma_i (Bc)_i >= t`` on the support,
    ``(Bc)_i = 0`` off it and ``|c|_inf <= 1``.
    """
    sigma = np.asarray(sigma, dtype=int)
    B = S.basis
    n, s = B.shape
    if s == 0 or not sigma.any():
        return None
    on = sigma != 0
    off = ~on
    if off.any():
        # cheap rejection: support pattern must leave a nontrivial kernel
        Boff = B[off]
        if np.linalg.matrix_rank(Boff, tol=1e-10 * max(1.0, np.abs(B).max())) >= s:
            return None
    # variables: c (s), t (1); minimize -t
    cost = np.zeros(s + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-(sigma[on, None] * B[on]), np.ones((on.sum(), 1))])
    b_ub = np.zeros(on.sum())
    A_eq = np.hstack([B[off], np.zeros((off.sum(), 1))]) if off.any() else None
    b_eq = np.zeros(off.sum()) if off.any() else None
    bounds = [(-1.0, 1.0)] * s + [(None, 1.0)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= margin:
        return None
    v = B @ res.x[:s]
    v[off] = 0.0
    if not np.array_equal(sign_vector(v), sigma):
        return None
    return v


def _sign_patterns(n):
    """Nonzero patterns with first nonzero entry +1, in lexicographic order."""
    for sigma in itertools.product((-1, 0, 1), repeat=n):
        nz = [x for x in sigma if x]
        if nz and nz[0] == 1:
            yield np.array(sigma, dtype=int)


def sign_vectors_intersect(S1, S2, margin=LP_MARGIN):
    """Find ``u in S1``, ``v in S2`` with ``sign(u) == sign(v) != 0``.

    Returns ``(u, v)`` for the lexicographically first such pattern, or None
    when the two subspaces share no nonzero sign vector.
    """
    if S1.ambient_dim != S2.ambient_dim:
        raise PreconditionError("subspaces live in different ambient spaces")
    n = S1.ambient_dim
    if n > MAX_SIGN_DIM:
        raise ResourceLimitError(f"sign-vector enumeration capped at n={MAX_SIGN_DIM}, got n={n}")
    if S1.dim == 0 or S2.dim == 0:
        return None
    for sigma in _sign_patterns(n):
        u = realize_sign_pattern(S1, sigma, margin)
        if u is None:
            continue
        v = realize_sign_pattern(S2, sigma, margin)
        if v is not None:
            return u, v
    return None
