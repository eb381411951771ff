"""Matrix stability notions, plain and on a subspace.

Eight notions are decided here: (semi)stability, D-(semi)stability,
diagonal (semi)stability and diagonal D-(semi)stability. Exact criteria are
used where they exist (dimension two and three, subspaces of dimension one
and two). Elsewhere the answer comes from a certificate search or from a
seeded falsifier; sampling never upgrades to ``holds``.

Failure of diagonal stability is certified by a dual witness: a nonzero
positive semidefinite ``X`` supported on ``S`` with ``diag(A X) >= 0``.
For any positive diagonal ``P`` this gives
``tr((PA + A.T P) X) = 2 sum p_i (AX)_ii >= 0``, so no ``P`` can work.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import solve_continuous_lyapunov
from scipy.optimize import minimize

from .errors import LatticeViolationError, NumericalError
from .linalg import (
    TAU,
    Definiteness,
    Subspace,
    check_image_in,
    classify_minors,
    definiteness_on,
    eigenvalues,
    is_P_matrix,
    max_eig_on,
    minor_is_zero,
    p0_violation,
    p0plus_violation,
    restrict,
)

DEFAULT_SEED = 0x5EED


class Notion(str, Enum):
    STABLE = "stable"
    SEMISTABLE = "semistable"
    D_STABLE = "D_stable"
    D_SEMISTABLE = "D_semistable"
    DIAG_STABLE = "diag_stable"
    DIAG_SEMISTABLE = "diag_semistable"
    DIAG_D_STABLE = "diag_D_stable"
    DIAG_D_SEMISTABLE = "diag_D_semistable"


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class Method(str, Enum):
    EIGENVALUE = "eigenvalue"
    CRITERION_2X2 = "criterion_2x2"
    CRITERION_3X3 = "criterion_3x3"
    CRITERION_DIMS1 = "criterion_dimS1"
    CRITERION_DIMS2 = "criterion_dimS2"
    LYAPUNOV_SEARCH = "lyapunov_search"
    SAMPLING_FALSIFIER = "sampling_falsifier"
    MINOR_SCREEN = "minor_screen"
    DUAL_WITNESS = "dual_witness"
    IMPLICATION = "implication"


@dataclass(frozen=True)
class SearchOptions:
    """Knobs for the non-exact procedures. Defaults are the documented contract."""

    seed: int = DEFAULT_SEED
    samples: int = 100_000
    tau: float = TAU
    diag_starts: int = 50
    diag_iters: int = 500
    sweep_samples: int = 200
    d_low: float = 1e-3
    d_high: float = 1e3


DEFAULT_OPTIONS = SearchOptions()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Enum):
        return obj.value
    return obj


@dataclass
class StabilityVerdict:
    """Outcome of one stability decision.

    ``certificate`` holds a diagonal or symmetric ``P`` for ``holds``, and a
    counterexample ``D`` (with the offending eigenvalue) or a dual witness
    ``X`` for ``fails``. ``clauses`` holds the evaluated criterion values.
    """

    notion: Notion
    status: Status
    method: Method
    on_subspace: Optional[Subspace] = None
    certificate: dict = field(default_factory=dict)
    clauses: dict = field(default_factory=dict)
    samples: int = 0
    notes: list = field(default_factory=list)

    @property
    def holds(self):
        return self.status is Status.HOLDS

    @property
    def fails(self):
        return self.status is Status.FAILS

    @property
    def certified(self):
        return self.status is not Status.INCONCLUSIVE

    def to_dict(self):
        out = {
            "notion": self.notion.value,
            "status": self.status.value,
            "method": self.method.value,
            "certified": self.certified,
            "subspace_dim": None if self.on_subspace is None else self.on_subspace.dim,
            "certificate": _jsonable(self.certificate),
            "clauses": _jsonable(self.clauses),
            "samples": int(self.samples),
            "notes": list(self.notes),
        }
        return out


def _effective(A, S):
    """Validate the pair and drop a full-space subspace."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix required")
    if S is not None:
        check_image_in(A, S)
        if S.is_full:
            S = None
    return A, S


def _basis(S, n):
    return np.eye(n) if S is None else S.basis


def _norm(M):
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


# ---------------------------------------------------------------------------
# plain (semi)stability and Lyapunov certificates
# ---------------------------------------------------------------------------

def _eig_verdict(A, S, semi, options):
    A, S = _effective(A, S)
    M = restrict(A, S)
    notion = Notion.SEMISTABLE if semi else Notion.STABLE
    ev = eigenvalues(M)
    if ev.size == 0:
        return StabilityVerdict(notion, Status.HOLDS, Method.EIGENVALUE, S,
                                certificate={"eigenvalues": []}, notes=["zero-dimensional subspace"])
    # scale by the full operator: the restriction can vanish up to roundoff
    scale = _norm(A)
    top = ev[np.argmax(ev.real)]
    ok = top.real <= options.tau * scale if semi else top.real < -options.tau * scale
    cert = {"eigenvalues": ev, "abscissa": float(top.real)}
    if not ok:
        cert["offending_eigenvalue"] = top
    return StabilityVerdict(notion, Status.HOLDS if ok else Status.FAILS, Method.EIGENVALUE, S,
                            certificate=cert)


def is_stable(A, S=None, options=DEFAULT_OPTIONS):
    """All eigenvalues of ``A|_S`` have real part below ``-tau * ||A|_S||``."""
    return _eig_verdict(A, S, False, options)


def is_semistable(A, S=None, options=DEFAULT_OPTIONS):
    return _eig_verdict(A, S, True, options)


def lyapunov_certificate(A, S=None, strict=True, tau=TAU):
    """Symmetric ``P`` (positive definite on S) with ``PA + A.T P`` negative on S.

    Returns None when ``A`` is not stable on ``S`` (``strict``) or when no
    semidefinite certificate can be built for a semistable ``A``.
    """
    A = np.asarray(A, dtype=float)
    S0 = S
    A, S = _effective(A, S)
    B = _basis(S, A.shape[0])
    M = B.T @ A @ B
    if M.size == 0:
        return np.zeros_like(A)
    ev = eigenvalues(M)
    scale = _norm(M)
    stable = ev.real.max() < -tau * scale
    if stable:
        Q = solve_continuous_lyapunov(M.T, -np.eye(M.shape[0]))
        Q = 0.5 * (Q + Q.T)
        want = Definiteness.NEGATIVE_DEFINITE
    elif not strict and ev.real.max() <= tau * scale:
        w, V = np.linalg.eig(M)
        if np.linalg.cond(V) > 1e8:
            return None
        Q = np.linalg.inv(V @ V.conj().T).real
        Q = 0.5 * (Q + Q.T)
        want = Definiteness.NEGATIVE_SEMIDEFINITE
    else:
        return None
    P = B @ Q @ B.T
    H = P @ A + A.T @ P
    got = definiteness_on(0.5 * (H + H.T), S0, tau)
    if np.linalg.eigvalsh(Q).min() <= 0:
        raise NumericalError("Lyapunov solution is not positive definite")
    if want is Definiteness.NEGATIVE_DEFINITE and got is not want:
        raise NumericalError("Lyapunov solution failed verification")
    if want is Definiteness.NEGATIVE_SEMIDEFINITE and got is Definiteness.INDEFINITE_OR_POSITIVE:
        return None
    return P


# ---------------------------------------------------------------------------
# D-(semi)stability
# ---------------------------------------------------------------------------

def _batch_abscissa(A, B, d):
    """Spectral abscissa of ``B.T A diag(d) B`` and norm of ``A diag(d)`` for each row of ``d``."""
    T = B.T @ A
    M = (T[None, :, :] * d[:, None, :]) @ B
    ev = np.linalg.eigvals(M)
    idx = np.argmax(ev.real, axis=1)
    top = ev[np.arange(len(d)), idx]
    norms = np.linalg.norm(A[None, :, :] * d[:, None, :], ord=2, axis=(1, 2))
    return top, norms


def _is_violation(top_real, norm, semi, tau):
    if semi:
        return top_real > tau * norm
    return top_real >= -tau * norm


def _score(A, B, logd):
    d = np.exp(np.clip(logd, -30, 30))
    top, nrm = _batch_abscissa(A, B, d[None, :])
    return float(top[0].real / max(nrm[0], 1e-300))


def _structured_candidates(n):
    rows = [np.ones(n)]
    if n <= 10:
        for k in range(1, n):
            for alpha in itertools.combinations(range(n), k):
                for delta in (1e-2, 1e-4, 1e-6):
                    d = np.full(n, delta)
                    d[list(alpha)] = 1.0
                    rows.append(d)
    return np.array(rows)


def _refine(A, B, logd, iters=400, box=np.log(1e6)):
    # the score is scale invariant; keep log d within a box around its max
    def f(z):
        return -_score(A, B, np.clip(z, z.max() - box, None))

    res = minimize(f, logd, method="Nelder-Mead",
                   options={"maxiter": iters, "xatol": 1e-10, "fatol": 1e-14})
    z = res.x
    return np.clip(z, z.max() - box, None)


def find_destabilizing_D(A, S=None, semi=False, options=DEFAULT_OPTIONS, samples=None):
    """Search for positive diagonal ``D`` with ``AD`` not (semi)stable on ``S``.

    Tries structured candidates, then log-uniform samples, then a local
    maximization of the normalized spectral abscissa. Returns
    ``(d, eigenvalue, tried)`` with a verified violation, or ``(None, None, tried)``.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    B = _basis(S, n)
    tau = options.tau
    samples = options.samples if samples is None else samples
    tried = 0

    def verified(d):
        top, nrm = _batch_abscissa(A, B, d[None, :])
        return _is_violation(top[0].real, nrm[0], semi, tau), top[0]

    def polish(d):
        z = _refine(A, B, np.log(d), iters=300)
        d2 = np.exp(np.clip(z, -30, 30))
        d2 = d2 / d2.max()
        ok, lam = verified(d2)
        d1 = d / d.max()
        ok1, lam1 = verified(d1)
        if ok and _score(A, B, np.log(d2)) >= _score(A, B, np.log(d1)):
            return d2, lam
        return d1, lam1

    cand = _structured_candidates(n)
    top, nrm = _batch_abscissa(A, B, cand)
    tried += len(cand)
    viol = _is_violation(top.real, nrm, semi, tau)
    if viol.any():
        best = np.argmax(np.where(viol, top.real / np.maximum(nrm, 1e-300), -np.inf))
        d, lam = polish(cand[best])
        return d, lam, tried

    rng = np.random.default_rng(options.seed)
    lo, hi = np.log(options.d_low), np.log(options.d_high)
    chunk = 20_000
    best_scores = []
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        d = np.exp(rng.uniform(lo, hi, size=(size, n)))
        top, nrm = _batch_abscissa(A, B, d)
        tried += size
        done += size
        score = top.real / np.maximum(nrm, 1e-300)
        viol = _is_violation(top.real, nrm, semi, tau)
        if viol.any():
            first = int(np.argmax(viol))
            dd, lam = polish(d[first])
            return dd, lam, tried
        for j in np.argsort(score)[-5:]:
            best_scores.append((score[j], d[j]))
    best_scores.sort(key=lambda t: -t[0])
    for _, d0 in best_scores[:5]:
        z = _refine(A, B, np.log(d0))
        tried += 1
        d = np.exp(np.clip(z, -30, 30))
        d = d / d.max()
        ok, lam = verified(d)
        if ok:
            return d, lam, tried
    return None, None, tried


def _dominance_3x3(A, tau):
    a = np.diag(A)
    M12 = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    M13 = A[0, 0] * A[2, 2] - A[0, 2] * A[2, 0]
    M23 = A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1]
    pairs = [(-a[0], M23, (1, 2)), (-a[1], M13, (0, 2)), (-a[2], M12, (0, 1))]
    lhs = sum(np.sqrt(max(p * q, 0.0)) for p, q, _ in pairs) ** 2
    rhs = -float(np.linalg.det(A))
    scale = _norm(A) ** 3
    gap = lhs - rhs
    clauses = {"lhs": lhs, "minus_det": rhs, "M12": M12, "M13": M13, "M23": M23}
    if gap > tau * scale:
        return True, clauses
    if gap < -tau * scale:
        clauses["violated"] = "(b) domination inequality"
        return False, clauses
    # equality: some pair must have exactly one zero member
    nA = _norm(A)
    one_zero = []
    for p, q, idx in pairs:
        pz = abs(p) <= tau * nA
        qz = minor_is_zero(A, idx, q, tau)
        one_zero.append(pz != qz)
    clauses["equality"] = True
    clauses["pairs_with_one_zero"] = one_zero
    if any(one_zero):
        return True, clauses
    clauses["violated"] = "(b) equality side-condition"
    return False, clauses


def _dims1_clauses(A, semi, tau):
    a = np.diag(A)
    t = tau * _norm(A)
    clauses = {"diagonal": a}
    if np.any(a > t):
        clauses["violated"] = "a_ii <= 0 for all i"
        clauses["index"] = int(np.argmax(a))
        return False, clauses
    if not semi and not np.any(a < -t):
        clauses["violated"] = "a_ii < 0 for some i"
        return False, clauses
    return True, clauses


def _dims2_clauses(A, semi, tau):
    ok, clauses = _dims1_clauses(A, semi, tau)
    n = A.shape[0]
    minors = {}
    neg = None
    any_pos = False
    for i, j in itertools.combinations(range(n), 2):
        val = A[i, i] * A[j, j] - A[i, j] * A[j, i]
        minors[f"{i},{j}"] = val
        if minor_is_zero(A, (i, j), val, tau):
            continue
        if val < 0 and neg is None:
            neg = (i, j)
        elif val > 0:
            any_pos = True
    clauses["M"] = minors
    if not ok:
        return False, clauses
    if neg is not None:
        clauses["violated"] = "M_ij >= 0 for all i != j"
        clauses["index_set"] = list(neg)
        return False, clauses
    if not semi and not any_pos:
        clauses["violated"] = "M_ij > 0 for some i != j"
        return False, clauses
    return True, clauses


def _attach_counterexample(verdict, A, S, semi, options):
    d, lam, tried = find_destabilizing_D(A, S, semi, options)
    if d is not None:
        verdict.certificate.update({"D": d, "eigenvalue": lam})
    else:
        verdict.notes.append("criterion violated but no counterexample D was found")
    return verdict


def _d_verdict(A, S, semi, options):
    A, S = _effective(A, S)
    n = A.shape[0]
    s = n if S is None else S.dim
    notion = Notion.D_SEMISTABLE if semi else Notion.D_STABLE
    tau = options.tau
    if s == 0:
        return StabilityVerdict(notion, Status.HOLDS, Method.EIGENVALUE, S,
                                notes=["zero-dimensional subspace"])

    if S is None and n == 2 and not semi:
        viol = p0plus_violation(A, tau=tau)
        method = Method.CRITERION_2X2
        ok, clauses = viol is None, ({} if viol is None else {"violated": viol})
    elif S is None and n == 3 and not semi:
        method = Method.CRITERION_3X3
        viol = p0plus_violation(A, tau=tau)
        if viol is not None:
            ok, clauses = False, {"violated": "(a) P0+ matrix", "detail": viol}
        else:
            ok, clauses = _dominance_3x3(A, tau)
    elif s == 1:
        method = Method.CRITERION_DIMS1
        ok, clauses = _dims1_clauses(A, semi, tau)
    elif s == 2:
        method = Method.CRITERION_DIMS2
        ok, clauses = _dims2_clauses(A, semi, tau)
    else:
        if semi and S is None and n == 3:
            strict = _d_verdict(A, None, False, options)
            if strict.holds:
                strict.notion = notion
                strict.notes.append("implied by D-stability")
                return strict
        return _screen_and_sample(A, S, semi, options)

    v = StabilityVerdict(notion, Status.HOLDS if ok else Status.FAILS, method, S, clauses=clauses)
    if semi and method is Method.CRITERION_DIMS2:
        v.notes.append("derived criterion: D-semistability on a 2-dimensional subspace")
    if not ok:
        _attach_counterexample(v, A, S, semi, options)
    return v


def _screen_and_sample(A, S, semi, options):
    n = A.shape[0]
    s = n if S is None else S.dim
    notion = Notion.D_SEMISTABLE if semi else Notion.D_STABLE
    # coefficients of the restricted characteristic polynomial are sums of
    # signed minors of order <= s weighted by products of d
    viol = (p0_violation if semi else p0plus_violation)(A, max_order=s, tau=options.tau)
    if viol is not None:
        v = StabilityVerdict(notion, Status.FAILS, Method.MINOR_SCREEN, S,
                             clauses={"violated": viol, "max_order": s})
        return _attach_counterexample(v, A, S, semi, options)
    d, lam, tried = find_destabilizing_D(A, S, semi, options)
    if d is not None:
        return StabilityVerdict(notion, Status.FAILS, Method.SAMPLING_FALSIFIER, S,
                                certificate={"D": d, "eigenvalue": lam}, samples=tried)
    return StabilityVerdict(notion, Status.INCONCLUSIVE, Method.SAMPLING_FALSIFIER, S,
                            samples=tried,
                            notes=[f"no destabilizing D among {tried} candidates; not a proof"])


def is_D_stable(A, S=None, options=DEFAULT_OPTIONS):
    """``AD`` stable on ``S`` for every positive diagonal ``D``."""
    return _d_verdict(A, S, False, options)


def is_D_semistable(A, S=None, options=DEFAULT_OPTIONS):
    return _d_verdict(A, S, True, options)


# ---------------------------------------------------------------------------
# diagonal (semi)stability
# ---------------------------------------------------------------------------

def diagonal_lyapunov_value(A, p, S=None):
    """Largest eigenvalue of ``PA + A.T P`` on ``S`` and the norm used for thresholds."""
    A = np.asarray(A, dtype=float)
    H = p[:, None] * A
    H = H + H.T
    return max_eig_on(H, S), _norm(H)


def check_diagonal_certificate(A, p, S=None, semi=False, tau=TAU):
    p = np.asarray(p, dtype=float)
    if not np.all(p > 0):
        return False
    top, scale = diagonal_lyapunov_value(A, p, S)
    return top <= tau * scale if semi else top < -tau * scale


def _smooth_max_grad(q, A, B, beta):
    """Soft maximum of eig(B.T (PA + A.T P) B) with ``p = softmax(q)`` and its gradient."""
    w = np.exp(q - q.max())
    p = w / w.sum()
    H = p[:, None] * A
    H = H + H.T
    R = B.T @ H @ B
    lam, V = np.linalg.eigh(0.5 * (R + R.T))
    z = beta * (lam - lam.max())
    pi = np.exp(z)
    pi /= pi.sum()
    f = lam.max() + np.log(np.exp(z).sum()) / beta
    Z = B @ V
    AZ = A @ Z
    # d lambda_j / d p_i = 2 Z_ij (A Z)_ij
    dp = 2.0 * (Z * AZ) @ pi
    # chain rule through softmax
    dq = p * (dp - p @ dp)
    return f, dq


def search_diagonal_certificate(A, S=None, semi=False, options=DEFAULT_OPTIONS, extra_starts=()):
    """Multi-start descent for positive diagonal ``p`` with ``PA + A.T P < 0`` on S.

    Returns ``(p, value)``; ``p`` is None when nothing was certified.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    B = _basis(S, n)
    tau = options.tau
    scale = max(_norm(A), 1e-300)
    starts = [np.asarray(p, dtype=float) for p in extra_starts]
    starts.append(np.ones(n))
    diag = np.abs(np.diag(A))
    if np.all(diag > 0):
        starts.append(1.0 / diag)
    rng = np.random.default_rng(options.seed)
    while len(starts) < options.diag_starts:
        starts.append(np.exp(rng.uniform(-3, 3, n)))
    best_p, best_val = None, np.inf
    for p0 in starts:
        if np.all(p0 > 0) and check_diagonal_certificate(A, p0, S, semi, tau):
            return p0 / p0.max(), diagonal_lyapunov_value(A, p0, S)[0]
        q = np.log(p0 / p0.sum())
        for beta in (10.0 / scale, 1e3 / scale, 1e6 / scale):
            res = minimize(_smooth_max_grad, q, args=(A, B, beta), jac=True, method="L-BFGS-B",
                           options={"maxiter": options.diag_iters})
            q = res.x
            p = np.exp(q - q.max())
            if check_diagonal_certificate(A, p, S, semi, tau):
                return p, diagonal_lyapunov_value(A, p, S)[0]
        val = diagonal_lyapunov_value(A, p, S)[0] / max(np.abs(p).max(), 1e-300)
        if val < best_val:
            best_p, best_val = p, val
    return None, best_val


def _witness_values(A, X):
    return np.einsum("ij,ji->i", A, X) / max(np.trace(X), 1e-300)


def verify_dual_witness(A, X, S=None, semi=False, tau=TAU):
    """Check that ``X`` proves the absence of a diagonal (semi)certificate."""
    A = np.asarray(A, dtype=float)
    X = np.asarray(X, dtype=float)
    tr = np.trace(X)
    if not tr > 0 or np.max(np.abs(X - X.T)) > 1e-10 * tr:
        return False
    if np.linalg.eigvalsh(0.5 * (X + X.T)).min() < -1e-10 * tr:
        return False
    if S is not None and not S.is_full:
        Pj = S.projector()
        if np.linalg.norm(X - Pj @ X @ Pj) > 1e-8 * tr:
            return False
    g = _witness_values(A, X)
    t = tau * _norm(A)
    if semi:
        return bool(g.min() >= -t and g.max() > t)
    return bool(g.min() >= -t)


def _minor_witness(A, semi, tau):
    """Rank-one witness from a non-positive (or negative) signed principal minor."""
    neg, zero, _ = classify_minors(A, tau=tau)
    cands = neg if semi else neg + zero
    n = A.shape[0]
    for alpha, _ in cands:
        sub = A[np.ix_(alpha, alpha)]
        w, V = np.linalg.eig(sub)
        scale = max(_norm(sub), 1e-300)
        real = np.abs(w.imag) <= 1e-9 * scale
        if not real.any():
            continue
        j = np.flatnonzero(real)[np.argmax(w.real[real])]
        z = np.zeros(n)
        z[list(alpha)] = V[:, j].real
        X = np.outer(z, z) / (z @ z)
        if verify_dual_witness(A, X, None, semi, tau):
            return X
    return None


def _eigen_witness(A, semi, tau, max_subsets=2000):
    """Witness ``Re(z z*)`` from an eigenvector of a principal submatrix.

    If ``sub z = lam z`` with ``Re lam >= 0`` then ``diag(A X)`` restricted to
    the support equals ``Re lam |z_i|^2``, which blocks every diagonal ``P``.
    """
    n = A.shape[0]
    subsets = [tuple(range(n))]
    for k in range(1, n):
        subsets.extend(itertools.combinations(range(n), k))
        if len(subsets) > max_subsets:
            break
    for alpha in subsets[:max_subsets]:
        sub = A[np.ix_(alpha, alpha)]
        w, V = np.linalg.eig(sub)
        j = int(np.argmax(w.real))
        z = np.zeros(n, dtype=complex)
        z[list(alpha)] = V[:, j]
        X = np.real(np.outer(z, z.conj()))
        X = 0.5 * (X + X.T) / np.trace(X)
        if verify_dual_witness(A, X, None, semi, tau):
            return X
    return None


def _softmin_grad(V, A, B, beta):
    nv = np.linalg.norm(V)
    U = V / nv
    Z = B @ U
    G = A @ Z
    g = np.sum(G * Z, axis=1)
    z = -beta * (g - g.min())
    w = np.exp(z)
    w /= w.sum()
    f = g.min() - np.log(np.exp(z).sum()) / beta
    gradZ = A.T @ (w[:, None] * Z) + w[:, None] * G
    gradU = B.T @ gradZ
    gradV = (gradU - np.sum(gradU * U) * U) / nv
    return -f, -gradV.ravel()


def search_dual_witness(A, S=None, semi=False, options=DEFAULT_OPTIONS, starts=8):
    """Maximize ``min_i (A X)_ii`` over ``X = B V V.T B.T`` with unit trace.

    Returns a verified witness ``X`` or None.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    B = _basis(S, n)
    s = B.shape[1]
    scale = max(_norm(A), 1e-300)
    rng = np.random.default_rng(options.seed + 1)
    for start in range(starts):
        V = np.eye(s) if start == 0 else rng.standard_normal((s, s))
        x = V.ravel()
        for beta in (10.0 / scale, 1e3 / scale, 1e5 / scale, 1e8 / scale):
            res = minimize(lambda v: _softmin_grad(v.reshape(s, s), A, B, beta), x, jac=True,
                           method="L-BFGS-B", options={"maxiter": 500})
            x = res.x
        Z = B @ x.reshape(s, s)
        X = Z @ Z.T
        X = 0.5 * (X + X.T) / np.trace(X)
        if verify_dual_witness(A, X, S, semi, options.tau):
            return X
    return None


def _interval(a, b, c):
    """Open set where ``a y^2 + b y + c < 0`` (``a >= 0``) as ``(lo, hi)`` or None."""
    if a == 0.0:
        if b < 0:
            return (-c / b, np.inf)
        if b > 0:
            return (-np.inf, -c / b)
        return (-np.inf, np.inf) if c < 0 else None
    disc = b * b - 4 * a * c
    if disc <= 0:
        return None
    q = -0.5 * (b + np.copysign(np.sqrt(disc), b))
    r1, r2 = q / a, c / q if q != 0 else 0.0
    return (min(r1, r2), max(r1, r2))


def diagonal_stability_3x3_clause(A, tol=1e-12):
    """Evaluate the quadratic-interval clause for 3x3 diagonal stability."""
    a = A
    M12 = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    M23 = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    b1 = a[0, 1] * a[1, 2] - a[1, 1] * a[0, 2]
    b2 = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    I1 = _interval(a[0, 2] ** 2, 2 * a[0, 2] * a[2, 0] - 4 * a[0, 0] * a[2, 2], a[2, 0] ** 2)
    I2 = _interval(b1 ** 2, 2 * b1 * b2 - 4 * M12 * M23, b2 ** 2)
    clauses = {"b1": b1, "b2": b2, "interval_1": I1, "interval_2": I2}
    if I1 is None or I2 is None:
        return False, clauses
    lo, hi = max(I1[0], I2[0]), min(I1[1], I2[1])
    clauses["intersection"] = (lo, hi)
    width_tol = tol * max(1.0, abs(lo) if np.isfinite(lo) else 1.0, abs(hi) if np.isfinite(hi) else 1.0)
    ok = hi - lo > width_tol
    if ok:
        if np.isfinite(lo) and np.isfinite(hi):
            y = 0.5 * (lo + hi)
        elif np.isfinite(lo):
            y = max(2 * lo, lo + 1.0)
        elif np.isfinite(hi):
            y = min(2 * hi, hi - 1.0)
        else:
            y = 1.0
        clauses["y"] = y
    return ok, clauses


def _diag_verdict(A, S, semi, options, search=True):
    A, S = _effective(A, S)
    n = A.shape[0]
    s = n if S is None else S.dim
    tau = options.tau
    notion = Notion.DIAG_SEMISTABLE if semi else Notion.DIAG_STABLE
    if s == 0:
        return StabilityVerdict(notion, Status.HOLDS, Method.EIGENVALUE, S,
                                certificate={"P": np.ones(n)}, notes=["zero-dimensional subspace"])

    def fails(method, clauses, X=None):
        v = StabilityVerdict(notion, Status.FAILS, method, S, clauses=clauses)
        if X is None:
            X = _minor_witness(A, semi, tau) if S is None else None
        if X is None and S is None:
            X = _eigen_witness(A, semi, tau)
        if X is None:
            X = search_dual_witness(A, S, semi, options)
        if X is not None:
            v.certificate.update({"X": X, "diag_AX": _witness_values(A, X)})
        else:
            v.notes.append("no dual witness found")
        return v

    def holds(method, clauses):
        v = StabilityVerdict(notion, Status.HOLDS, method, S, clauses=clauses)
        if search:
            p, _ = search_diagonal_certificate(A, S, semi, replace(options, diag_starts=5))
            if p is not None:
                v.certificate["P"] = p
        return v

    if s == 1:
        # A maps the line S into itself, so (PA + A.T P) on S has the sign of
        # the single restricted eigenvalue for every positive P
        ev = _eig_verdict(A, S, semi, options)
        v = StabilityVerdict(notion, ev.status, Method.EIGENVALUE, S,
                             clauses={"restricted_eigenvalue": ev.certificate["abscissa"]},
                             notes=["one-dimensional subspace: any positive P is a certificate"])
        if ev.holds:
            v.certificate["P"] = np.ones(n)
        else:
            z = _basis(S, n)[:, 0]
            v.certificate.update({"X": np.outer(z, z), "diag_AX": _witness_values(A, np.outer(z, z))})
        return v
    if S is None and n == 2 and not semi:
        if is_P_matrix(A, tau):
            return holds(Method.CRITERION_2X2, {"P_matrix": True})
        return fails(Method.CRITERION_2X2, {"P_matrix": False, "violated": "P-matrix"})
    if S is None and n == 3 and not semi:
        if not is_P_matrix(A, tau):
            return fails(Method.CRITERION_3X3, {"P_matrix": False, "violated": "(a) P-matrix"})
        ok, clauses = diagonal_stability_3x3_clause(A)
        clauses["P_matrix"] = True
        if ok:
            return holds(Method.CRITERION_3X3, clauses)
        clauses["violated"] = "(b) no common y"
        return fails(Method.CRITERION_3X3, clauses)

    if S is None:
        viol = p0_violation(A, tau=tau) if semi else (None if is_P_matrix(A, tau) else {"clause": "P-matrix"})
        if viol is not None:
            return fails(Method.MINOR_SCREEN, {"violated": viol})
    p, val = search_diagonal_certificate(A, S, semi, options)
    if p is not None:
        return StabilityVerdict(notion, Status.HOLDS, Method.LYAPUNOV_SEARCH, S,
                                certificate={"P": p, "max_eig": diagonal_lyapunov_value(A, p, S)[0]})
    X = search_dual_witness(A, S, semi, options)
    if X is not None:
        return StabilityVerdict(notion, Status.FAILS, Method.DUAL_WITNESS, S,
                                certificate={"X": X, "diag_AX": _witness_values(A, X)})
    if S is not None:
        dv = _d_verdict(A, S, semi, options)
        if dv.fails:
            return StabilityVerdict(notion, Status.FAILS, Method.IMPLICATION, S,
                                    certificate=dict(dv.certificate),
                                    notes=[f"{dv.notion.value} fails ({dv.method.value})"])
    return StabilityVerdict(notion, Status.INCONCLUSIVE, Method.LYAPUNOV_SEARCH, S,
                            clauses={"best_value": val},
                            notes=["no diagonal certificate and no dual witness found"])


def is_diagonally_stable(A, S=None, options=DEFAULT_OPTIONS):
    """Positive diagonal ``P`` with ``PA + A.T P`` negative definite on ``S``."""
    return _diag_verdict(A, S, False, options)


def is_diagonally_semistable(A, S=None, options=DEFAULT_OPTIONS):
    return _diag_verdict(A, S, True, options)


# ---------------------------------------------------------------------------
# diagonal D-(semi)stability
# ---------------------------------------------------------------------------

def is_diagonally_D_stable_on(A, S=None, semi=False, options=DEFAULT_OPTIONS):
    """For every positive diagonal ``D`` a positive diagonal ``P`` with ``PAD + DA.T P < 0`` on S.

    On the full space this coincides with diagonal stability (take ``DP``).
    On a proper subspace the answer is a sampled sweep over ``D``.
    """
    A, S = _effective(A, S)
    notion = Notion.DIAG_D_SEMISTABLE if semi else Notion.DIAG_D_STABLE
    if S is None:
        v = _diag_verdict(A, None, semi, options)
        v.notion = notion
        v.notes.append("equivalent to diagonal stability on the full space")
        return v
    if S.dim == 0:
        return StabilityVerdict(notion, Status.HOLDS, Method.EIGENVALUE, S,
                                notes=["zero-dimensional subspace"])
    n = A.shape[0]
    dv = _d_verdict(A, S, semi, options)
    if S.dim == 1:
        # on a line, P A D restricted to S has the sign of the eigenvalue of AD
        v = StabilityVerdict(notion, dv.status, dv.method, S, certificate=dict(dv.certificate),
                             clauses=dict(dv.clauses),
                             notes=["one-dimensional subspace: equivalent to D-(semi)stability"])
        if dv.holds:
            v.certificate["P"] = np.ones(n)
        return v
    if dv.fails and "D" in dv.certificate:
        return StabilityVerdict(notion, Status.FAILS, Method.IMPLICATION, S,
                                certificate=dict(dv.certificate),
                                notes=[f"{dv.notion.value} fails ({dv.method.value})"])
    n = A.shape[0]
    rng = np.random.default_rng(options.seed)
    lo, hi = np.log(options.d_low), np.log(options.d_high)
    Ds = [np.ones(n)] + [np.exp(rng.uniform(lo, hi, n)) for _ in range(options.sweep_samples - 1)]
    light = replace(options, diag_starts=8, diag_iters=200)
    n_ok = 0
    inconclusive = 0
    for d in Ds:
        AD = A * d[None, :]
        found = False
        for p in (d, 1.0 / d, np.ones(n)):
            if check_diagonal_certificate(AD, p, S, semi, options.tau):
                found = True
                break
        if not found:
            p, _ = search_diagonal_certificate(AD, S, semi, light)
            found = p is not None
        if found:
            n_ok += 1
            continue
        X = search_dual_witness(AD, S, semi, light, starts=4)
        if X is not None:
            return StabilityVerdict(notion, Status.FAILS, Method.DUAL_WITNESS, S,
                                    certificate={"D": d, "X": X,
                                                 "diag_ADX": _witness_values(AD, X)},
                                    samples=n_ok + inconclusive + 1)
        inconclusive += 1
    note = f"diagonal certificate found for {n_ok} of {len(Ds)} sampled D; not a proof"
    return StabilityVerdict(notion, Status.INCONCLUSIVE, Method.SAMPLING_FALSIFIER, S,
                            samples=len(Ds), clauses={"certified_samples": n_ok,
                                                      "undecided_samples": inconclusive},
                            notes=[note])


# ---------------------------------------------------------------------------
# the lattice of notions
# ---------------------------------------------------------------------------

_IMPLICATIONS = [
    (Notion.DIAG_D_STABLE, Notion.DIAG_D_SEMISTABLE),
    (Notion.DIAG_D_STABLE, Notion.D_STABLE),
    (Notion.DIAG_D_STABLE, Notion.DIAG_STABLE),
    (Notion.DIAG_D_SEMISTABLE, Notion.D_SEMISTABLE),
    (Notion.DIAG_D_SEMISTABLE, Notion.DIAG_SEMISTABLE),
    (Notion.DIAG_STABLE, Notion.DIAG_SEMISTABLE),
    (Notion.DIAG_STABLE, Notion.STABLE),
    (Notion.DIAG_SEMISTABLE, Notion.SEMISTABLE),
    (Notion.D_STABLE, Notion.D_SEMISTABLE),
    (Notion.D_STABLE, Notion.STABLE),
    (Notion.D_SEMISTABLE, Notion.SEMISTABLE),
    (Notion.STABLE, Notion.SEMISTABLE),
]
_FULL_SPACE_IMPLICATIONS = [
    (Notion.DIAG_STABLE, Notion.D_STABLE),
    (Notion.DIAG_SEMISTABLE, Notion.D_SEMISTABLE),
]


def implications(full_space):
    return _IMPLICATIONS + (_FULL_SPACE_IMPLICATIONS if full_space else [])


def notion_lattice_check(A, S=None, options=DEFAULT_OPTIONS):
    """Evaluate all eight notions and check the implications between them.

    Inconclusive verdicts are settled by implication where possible.
    Raises LatticeViolationError when two certified verdicts disagree.
    """
    A, S = _effective(A, S)
    full = S is None
    v = {
        Notion.STABLE: is_stable(A, S, options),
        Notion.SEMISTABLE: is_semistable(A, S, options),
        Notion.D_STABLE: is_D_stable(A, S, options),
        Notion.D_SEMISTABLE: is_D_semistable(A, S, options),
        Notion.DIAG_STABLE: is_diagonally_stable(A, S, options),
        Notion.DIAG_SEMISTABLE: is_diagonally_semistable(A, S, options),
        Notion.DIAG_D_STABLE: is_diagonally_D_stable_on(A, S, False, options),
        Notion.DIAG_D_SEMISTABLE: is_diagonally_D_stable_on(A, S, True, options),
    }
    rules = implications(full)
    for lhs, rhs in rules:
        if v[lhs].holds and v[rhs].fails:
            raise LatticeViolationError(
                f"{lhs.value} holds ({v[lhs].method.value}) but {rhs.value} fails ({v[rhs].method.value})")
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            if v[lhs].holds and v[rhs].status is Status.INCONCLUSIVE:
                v[rhs] = StabilityVerdict(rhs, Status.HOLDS, Method.IMPLICATION, S,
                                          certificate=dict(v[lhs].certificate),
                                          notes=[f"implied by {lhs.value}"])
                changed = True
            elif v[rhs].fails and v[lhs].status is Status.INCONCLUSIVE:
                v[lhs] = StabilityVerdict(lhs, Status.FAILS, Method.IMPLICATION, S,
                                          certificate=dict(v[rhs].certificate),
                                          notes=[f"{rhs.value} fails"])
                changed = True
    return [v[notion] for notion in Notion]
