"""Network-level stability analysis built on the matrix notions.

A network is first classified. Classical weakly reversible networks get an
explicit diagonal Lyapunov certificate for every positive diagonal scaling.
Single cycles are decided by D-stability of the unit-rate matrix
``Y A_1 Ytilde.T`` on the stoichiometric subspace. General weakly reversible
networks get the per-cycle D-semistability screen, which is only necessary.
Every reported failure comes with rate constants and an equilibrium that
were re-checked to be complex balanced and linearly unstable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .dynamics import (
    construct_rates,
    cycle_limit_matrix,
    epsilon_family,
    is_complex_balanced,
    jacobian,
)
from .errors import ConsistencyError, GmasError, NumericalError, PreconditionError, ResourceLimitError
from .linalg import (
    TAU,
    Definiteness,
    definiteness_on,
    eigenvalues,
    max_eig_on,
    orthogonal_complement,
    restrict,
    sign_vectors_intersect,
)
from .network import (
    DEFAULT_CYCLE_CAP,
    GmasNetwork,
    edge_laplacian,
    enumerate_cycles,
    is_single_cycle,
    kinetic_subspace,
    laplacian,
    stoichiometric_subspace,
    weakly_reversible,
)
from .stability import (
    DEFAULT_OPTIONS,
    SearchOptions,
    StabilityVerdict,
    _jsonable,
    is_D_semistable,
    is_D_stable,
    is_diagonally_D_stable_on,
)

#: cap on halvings of the perturbation size when concretizing a witness
MAX_HALVINGS = 60
#: relative tolerance for ``||J v|| <= tol ||J|| ||v||``
DEGENERACY_RTOL = 1e-9


class NetworkClass(str, Enum):
    CLASSICAL = "classical"
    SINGLE_CYCLE = "single_cycle"
    WEAKLY_REVERSIBLE = "weakly_reversible"
    GENERAL = "general"


def is_classical(net: GmasNetwork) -> bool:
    """Kinetic orders equal stoichiometry at every source vertex."""
    src = sorted(net.sources)
    return bool(np.array_equal(net.Y[:, src], net.Ytilde[:, src]))


def classify(net: GmasNetwork) -> NetworkClass:
    if is_classical(net):
        return NetworkClass.CLASSICAL
    if is_single_cycle(net):
        return NetworkClass.SINGLE_CYCLE
    if weakly_reversible(net):
        return NetworkClass.WEAKLY_REVERSIBLE
    return NetworkClass.GENERAL


def unit_rate_matrix(net: GmasNetwork):
    """``Y A_{k=1} Ytilde.T``."""
    return net.Y @ laplacian(net, np.ones(net.n_edges)) @ net.Ytilde.T


def restricted_abscissa(J, S):
    """Eigenvalue of ``J|_S`` with the largest real part."""
    ev = eigenvalues(restrict(J, S))
    if ev.size == 0:
        return 0j
    return complex(ev[np.argmax(ev.real)])


def _unstable(J, S, tau=TAU):
    lam = restricted_abscissa(J, S)
    return lam.real > tau * np.linalg.norm(J, 2), lam


# ---------------------------------------------------------------------------
# classical networks
# ---------------------------------------------------------------------------

@dataclass
class ClassicalCertificate:
    P: np.ndarray
    H: np.ndarray
    definiteness: Definiteness
    max_eig: float
    route_mismatch: float

    @property
    def ok(self):
        return self.definiteness is Definiteness.NEGATIVE_DEFINITE


def classical_certificate(net: GmasNetwork, x_star, D=None, k=None, tau=TAU):
    """Diagonal certificate ``P = diag(d / x*)`` for ``J D`` on S.

    ``H = P J D + D J.T P`` is formed directly and through the symmetrized
    Laplacian of the rates ``k_e * x*^{y(source)}``; both must agree and
    ``H`` must be negative definite on S.
    """
    if not is_classical(net):
        raise PreconditionError("certificate needs kinetic orders equal to stoichiometry")
    if not weakly_reversible(net):
        raise PreconditionError("certificate needs a weakly reversible network")
    x_star = np.asarray(x_star, dtype=float)
    if not np.all(x_star > 0):
        raise PreconditionError("x_star must be positive")
    d = np.ones(net.n) if D is None else np.asarray(D, dtype=float).reshape(-1)
    if d.shape != (net.n,) or not np.all(d > 0):
        raise PreconditionError("D must be a positive vector of length n")
    if k is None:
        k = construct_rates(net, x_star).k
    else:
        ok, res = is_complex_balanced(net, k, x_star)
        if not ok:
            raise PreconditionError(f"x_star is not complex balanced (residual {res:.3g})")
    J = jacobian(net, k, x_star)
    p = d / x_star
    PJD = p[:, None] * J * d[None, :]
    H = PJD + PJD.T
    mono = np.exp(net.Y.T @ np.log(x_star))
    kbar = np.asarray(k) * mono[[i for i, _ in net.edges]]
    Abar = edge_laplacian(net.m, net.edges, kbar)
    H2 = p[:, None] * (net.Y @ (Abar + Abar.T) @ net.Y.T) * p[None, :]
    mismatch = float(np.linalg.norm(H - H2) / max(np.linalg.norm(H), 1e-300))
    S = stoichiometric_subspace(net)
    H = 0.5 * (H + H.T)
    verdict = definiteness_on(H, S, tau)
    cert = ClassicalCertificate(np.diag(p), H, verdict, max_eig_on(H, S), mismatch)
    if not cert.ok or mismatch > 1e-8:
        raise NumericalError(
            f"classical certificate did not verify ({verdict.value}, route mismatch {mismatch:.2e})")
    return cert


def entropy_lyapunov(p, x_star, x):
    """``sum_i p_i x*_i [x_i (log(x_i / x*_i) - 1) + x*_i]``."""
    p = np.asarray(p, dtype=float)
    if p.ndim == 2:
        p = np.diag(p)
    x_star = np.asarray(x_star, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(x > 0) and np.all(x_star > 0) and np.all(p > 0)):
        raise PreconditionError("entropy function needs positive arguments")
    return float(np.sum(p * x_star * (x * (np.log(x / x_star) - 1.0) + x_star)))


# ---------------------------------------------------------------------------
# uniqueness
# ---------------------------------------------------------------------------

@dataclass
class UniquenessResult:
    unique: bool
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    x_star: Optional[np.ndarray] = None
    k: Optional[np.ndarray] = None
    Jv_norm: Optional[float] = None
    bound: Optional[float] = None

    @property
    def degeneracy_certified(self):
        return self.Jv_norm is not None and self.Jv_norm <= self.bound

    def to_dict(self):
        out = {"unique": self.unique}
        if not self.unique:
            out.update({"u": self.u, "v": self.v, "x_star": self.x_star, "k": self.k,
                        "Jv_norm": self.Jv_norm, "bound": self.bound,
                        "degeneracy_certified": self.degeneracy_certified})
        return _jsonable(out)


def uniqueness_check(net: GmasNetwork, cap=DEFAULT_CYCLE_CAP):
    """Sign-vector test for at most one complex-balanced equilibrium per class.

    When a common sign vector of ``S`` and the orthogonal complement of the
    kinetic subspace exists, rates are built for which the Jacobian at the
    constructed equilibrium annihilates a vector of ``S``.
    """
    if not weakly_reversible(net):
        raise PreconditionError("uniqueness test needs a weakly reversible network")
    S = stoichiometric_subspace(net)
    St_perp = orthogonal_complement(kinetic_subspace(net))
    hit = sign_vectors_intersect(St_perp, S)
    if hit is None:
        return UniquenessResult(True)
    u, v = hit
    x_star = np.ones(net.n)
    nz = u != 0
    x_star[nz] = v[nz] / u[nz]
    cert = construct_rates(net, x_star, cap=cap)
    if not cert.ok:
        raise NumericalError("constructed rates do not balance the witness equilibrium")
    J = jacobian(net, cert.k, x_star)
    jv = float(np.linalg.norm(J @ v))
    bound = DEGENERACY_RTOL * np.linalg.norm(J, 2) * np.linalg.norm(v)
    return UniquenessResult(False, u, v, x_star, cert.k, jv, float(bound))


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------

def _normalize_scaling(A, S, d):
    """Rescale ``d`` so the leading eigenvalue of ``A diag(d)`` on S has real part one."""
    lam = restricted_abscissa(A * d[None, :], S)
    if lam.real <= 0:
        return d
    return d / lam.real


def _witness_dict(net, k, x_star, J, lam, **extra):
    out = {"k": k, "x_star": x_star, "eigenvalue": lam,
           "jacobian_norm": float(np.linalg.norm(J, 2))}
    out.update(extra)
    return out


def cycle_network_witness(net: GmasNetwork, d, A=None):
    """Rates and equilibrium ``x* = 1/d`` that realize ``J = A diag(d)``.

    Verifies complex balance, the identity ``J = A diag(1/x*)`` and the
    instability of ``J`` on S.
    """
    A = unit_rate_matrix(net) if A is None else A
    S = stoichiometric_subspace(net)
    d = _normalize_scaling(A, S, np.asarray(d, dtype=float))
    x_star = 1.0 / d
    cert = construct_rates(net, x_star)
    if not cert.ok:
        raise NumericalError("witness equilibrium is not complex balanced")
    J = jacobian(net, cert.k, x_star)
    ref = A / x_star[None, :]
    ident = float(np.linalg.norm(J - ref) / max(np.linalg.norm(ref), 1e-300))
    bad, lam = _unstable(J, S)
    if not bad or ident > 1e-10:
        raise NumericalError("counterexample scaling did not yield an unstable equilibrium")
    return _witness_dict(net, cert.k, x_star, J, lam, residual=cert.residual,
                         jacobian_identity_error=ident)


def epsilon_witness(net: GmasNetwork, cycle, d, cycles=None, A_C=None, S_C=None):
    """Concretize a failing cycle into an unstable ``(k_eps, x*)`` of the whole network.

    Starts at ``eps = 1`` and halves until the Jacobian is unstable on S.
    """
    if A_C is None or S_C is None:
        A_C, S_C = cycle_limit_matrix(net, cycle)
    d = _normalize_scaling(A_C, S_C, np.asarray(d, dtype=float))
    x_star = 1.0 / d
    S = stoichiometric_subspace(net)
    eps = 1.0
    for _ in range(MAX_HALVINGS + 1):
        member = epsilon_family(net, cycle, x_star, eps, cycles=cycles)
        if member.balanced:
            bad, lam = _unstable(member.J, S)
            if bad:
                return _witness_dict(net, member.k, x_star, member.J, lam, eps=eps,
                                     residual=member.residual, limit_error=member.error)
        eps /= 2
    return None


# ---------------------------------------------------------------------------
# per-class analyses
# ---------------------------------------------------------------------------

CYCLE_BASIS = "single cycle: stability for all rates iff D-stability of Y A_1 Ytilde.T on S"
CYCLE_DIAG_BASIS = "single cycle: diagonal stability for all rates iff diagonal D-stability on S"
WR_BASIS = "weakly reversible: every cycle matrix must be D-semistable on its subspace (necessary only)"
CLASSICAL_BASIS = "kinetic orders equal stoichiometry: P = diag(D / x*) certifies diagonal D-stability on S"
UNIQUE_BASIS = "sign vectors of S and the orthogonal complement of the kinetic subspace"


def _verdict_entry(v: StabilityVerdict, basis):
    out = v.to_dict()
    out["basis"] = basis
    return out


def analyze_cycle_network(net: GmasNetwork, options: SearchOptions = DEFAULT_OPTIONS):
    """Decide linear stability of all complex-balanced equilibria of a single cycle."""
    if not is_single_cycle(net):
        raise PreconditionError("network is not a single directed cycle")
    A = unit_rate_matrix(net)
    S = stoichiometric_subspace(net)
    dv = is_D_stable(A, S, options)
    ddv = is_diagonally_D_stable_on(A, S, False, options)
    out = {
        "A": A,
        "subspace_dim": S.dim,
        "D_stable": _verdict_entry(dv, CYCLE_BASIS),
        "diag_D_stable": _verdict_entry(ddv, CYCLE_DIAG_BASIS),
    }
    if dv.holds:
        out["conclusion"] = "all complex-balanced equilibria are linearly stable for all rate constants"
    elif dv.fails:
        out["conclusion"] = "some complex-balanced equilibrium is linearly unstable for some rate constants"
        if "D" in dv.certificate:
            out["witness"] = cycle_network_witness(net, dv.certificate["D"], A)
    else:
        out["conclusion"] = "undecided: no destabilizing scaling found by sampling"
    return _jsonable(out)


def analyze_weakly_reversible(net: GmasNetwork, options: SearchOptions = DEFAULT_OPTIONS,
                              cap=DEFAULT_CYCLE_CAP):
    """Per-cycle D-semistability screen with concrete witnesses for failures."""
    if not weakly_reversible(net):
        raise PreconditionError("network is not weakly reversible")
    cycles = enumerate_cycles(net, cap)
    entries = []
    failed = False
    undecided = False
    notes = []
    for c in cycles:
        A_C, S_C = cycle_limit_matrix(net, c)
        v = is_D_semistable(A_C, S_C, options)
        e = {
            "vertices": [net.vertices[i].name for i in c.vertex_indices],
            "edges": list(c.edge_indices),
            "A": A_C,
            "subspace_dim": S_C.dim,
            "D_semistable": _verdict_entry(v, WR_BASIS),
        }
        if v.fails:
            failed = True
            if "D" in v.certificate:
                w = epsilon_witness(net, c, v.certificate["D"], cycles, A_C, S_C)
                if w is None:
                    notes.append(f"cycle {e['vertices']}: no unstable member within {MAX_HALVINGS} halvings")
                e["witness"] = w
        elif not v.certified:
            undecided = True
        entries.append(_jsonable(e))
    if failed:
        conclusion = "NOT linearly stable for all rate constants"
    elif undecided:
        conclusion = "undecided: some cycle matrices were only screened by sampling"
    else:
        conclusion = "necessary conditions satisfied (not sufficient)"
    return {"cycles": entries, "conclusion": conclusion, "notes": notes}


def classical_summary(net, options=DEFAULT_OPTIONS, trials=5):
    """Check the diagonal certificate at ``x* = 1, D = I`` and at seeded random pairs."""
    rng = np.random.default_rng(options.seed)
    worst = -np.inf
    pairs = [(np.ones(net.n), np.ones(net.n))]
    for _ in range(trials):
        pairs.append((np.exp(rng.uniform(-2, 2, net.n)), np.exp(rng.uniform(-2, 2, net.n))))
    for x_star, d in pairs:
        cert = classical_certificate(net, x_star, d, tau=options.tau)
        worst = max(worst, cert.max_eig / max(np.linalg.norm(cert.H, 2), 1e-300))
    return {
        "diag_D_stable": "holds",
        "certified": True,
        "basis": CLASSICAL_BASIS,
        "P": "diag(D / x*)",
        "checked_pairs": len(pairs),
        "worst_normalized_max_eig": float(worst),
        "conclusion": "every complex-balanced equilibrium is linearly stable for all rate constants",
    }


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class AnalysisReport:
    """JSON-native analysis result.

    Field names in ``to_dict`` are stable: ``network_class``, ``uniqueness``,
    ``cycles``, ``global``, ``classical``, ``conclusion``, ``notes``, ``errors``.
    """

    network_class: str
    uniqueness: Optional[dict] = None
    cycles: list = field(default_factory=list)
    global_: Optional[dict] = None
    classical: Optional[dict] = None
    conclusion: str = ""
    notes: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def to_dict(self):
        return {
            "network_class": self.network_class,
            "uniqueness": self.uniqueness,
            "cycles": self.cycles,
            "global": self.global_,
            "classical": self.classical,
            "conclusion": self.conclusion,
            "notes": self.notes,
            "errors": self.errors,
        }

    def to_json(self, indent=2):
        return json.dumps(_jsonable(self.to_dict()), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(d["network_class"], d.get("uniqueness"), d.get("cycles", []), d.get("global"),
                   d.get("classical"), d.get("conclusion", ""), d.get("notes", []), d.get("errors", []))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_text(self):
        return render_text(self)


def _error_entry(section, exc):
    kind = "resource_limit" if isinstance(exc, ResourceLimitError) else type(exc).__name__
    return {"section": section, "kind": kind, "message": str(exc)}


def full_report(net: GmasNetwork, options: SearchOptions = DEFAULT_OPTIONS, cap=DEFAULT_CYCLE_CAP):
    """Run every analysis that applies to ``net`` and collect the results."""
    cls = classify(net)
    rep = AnalysisReport(cls.value)
    wr = weakly_reversible(net)
    single = is_single_cycle(net)
    classical = is_classical(net)
    if not wr:
        rep.notes.append("network is not weakly reversible: no complex-balanced analysis applies")
        rep.conclusion = "no conclusion (not weakly reversible)"
        return _finish(rep)

    try:
        rep.uniqueness = uniqueness_check(net, cap).to_dict()
        rep.uniqueness["basis"] = UNIQUE_BASIS
    except GmasError as exc:
        rep.errors.append(_error_entry("uniqueness", exc))

    if classical:
        try:
            rep.classical = classical_summary(net, options)
        except GmasError as exc:
            rep.errors.append(_error_entry("classical", exc))

    if single:
        try:
            rep.global_ = analyze_cycle_network(net, options)
        except GmasError as exc:
            rep.errors.append(_error_entry("global", exc))

    try:
        wr_part = analyze_weakly_reversible(net, options, cap)
        rep.cycles = wr_part["cycles"]
        rep.notes.extend(wr_part["notes"])
        wr_conclusion = wr_part["conclusion"]
    except GmasError as exc:
        rep.errors.append(_error_entry("cycles", exc))
        wr_conclusion = None

    for e in rep.cycles:
        v = e["D_semistable"]
        if v["method"] == "criterion_dimS2" and v["notes"]:
            rep.notes.append("derived dim-2 semistable criterion used")
            break

    if rep.classical is not None:
        rep.conclusion = rep.classical["conclusion"]
    elif rep.global_ is not None:
        rep.conclusion = rep.global_["conclusion"]
    elif wr_conclusion is not None:
        rep.conclusion = wr_conclusion
    else:
        rep.conclusion = "no conclusion (see errors)"

    if rep.global_ is not None and rep.uniqueness is not None:
        if rep.global_["D_stable"]["status"] == "holds" and not rep.uniqueness["unique"]:
            raise ConsistencyError("stable for all rates but equilibria are not unique")
    return _finish(rep)


def _finish(rep):
    # normalize through JSON so in-memory and reloaded reports compare equal
    return AnalysisReport.from_json(rep.to_json())


def _fmt_status(v):
    tag = "certified" if v.get("certified") else "sampled"
    return f"{v['status']} [{v['method']}, {tag}]"


def render_text(rep: AnalysisReport) -> str:
    lines = [f"network class: {rep.network_class}"]
    u = rep.uniqueness
    if u is not None:
        if u["unique"]:
            lines.append("uniqueness: unique complex-balanced equilibrium in every class")
        else:
            lines.append("uniqueness: NOT unique; witness u = {}, v = {}, |Jv| = {:.3g}".format(
                np.round(u["u"], 6).tolist(), np.round(u["v"], 6).tolist(), u["Jv_norm"]))
    if rep.classical is not None:
        c = rep.classical
        lines.append(f"classical: diagonally D-stable on S, P = {c['P']} "
                     f"(checked {c['checked_pairs']} pairs) [certified]")
    g = rep.global_
    if g is not None:
        lines.append(f"cycle: D-stable on S: {_fmt_status(g['D_stable'])}")
        lines.append(f"cycle: diagonally D-stable on S: {_fmt_status(g['diag_D_stable'])}")
        if "witness" in g:
            w = g["witness"]
            lam = w["eigenvalue"]
            lines.append(f"  witness x* = {np.round(w['x_star'], 6).tolist()}, "
                         f"eigenvalue {lam[0]:.6g}{lam[1]:+.6g}i")
    for e in rep.cycles:
        v = e["D_semistable"]
        line = f"cycle {' -> '.join(e['vertices'])}: D-semistable on S^C (dim {e['subspace_dim']}): {_fmt_status(v)}"
        lines.append(line)
        w = e.get("witness")
        if w:
            lam = w["eigenvalue"]
            lines.append(f"  witness eps = {w['eps']:.3g}, x* = {np.round(w['x_star'], 6).tolist()}, "
                         f"eigenvalue {lam[0]:.6g}{lam[1]:+.6g}i")
    lines.append(f"conclusion: {rep.conclusion}")
    for n in rep.notes:
        lines.append(f"note: {n}")
    for e in rep.errors:
        lines.append(f"error in {e['section']}: {e['message']}")
    return "\n".join(lines) + "\n"
