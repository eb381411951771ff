"""Vector field, Jacobian and equilibria of generalized mass-action systems.

The ODE is ``dx/dt = Y A_k x^Ytilde`` with monomials ``x^y = prod x_i^y_i``.
Monomials are evaluated as ``exp(Ytilde.T @ log x)`` so that negative and
fractional kinetic orders behave uniformly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import null_space

from .errors import PreconditionError, StiffnessError
from .linalg import Subspace, orthogonal_complement, subspace_distance
from .network import (
    GmasNetwork,
    connected_components,
    edge_laplacian,
    enumerate_cycles,
    incidence_matrices,
    laplacian,
    stoichiometric_subspace,
    subnetwork_subspace,
    weakly_reversible,
    DEFAULT_CYCLE_CAP,
)

#: relative residual for complex balance
BALANCE_RTOL = 1e-10
#: concentrations are clipped here before taking logarithms
LOG_FLOOR = 1e-300
#: integration halts once a coordinate drops below this value
POSITIVITY_FLOOR = 1e-12


def _state(x, n):
    x = np.asarray(x, dtype=float).ravel()
    if x.shape != (n,):
        raise ValueError(f"state must have length {n}, got {x.size}")
    if not np.all(x > 0):
        raise PreconditionError("concentrations must be strictly positive")
    return x


def monomials(Ytilde, x):
    """Vector ``x^Ytilde`` with one entry per column of ``Ytilde``."""
    logx = np.log(np.maximum(np.asarray(x, dtype=float), LOG_FLOOR))
    return np.exp(np.asarray(Ytilde).T @ logx)


def rhs(net: GmasNetwork, k, x):
    """Right-hand side as a sum over reactions."""
    x = _state(x, net.n)
    k = np.asarray(k, dtype=float)
    mono = monomials(net.Ytilde, x)
    Y = net.Y
    out = np.zeros(net.n)
    for (i, j), kij in zip(net.edges, k):
        out += kij * mono[i] * (Y[:, j] - Y[:, i])
    return out


def rhs_matrix_form(net: GmasNetwork, k, x):
    """Same vector field as ``rhs`` in the factored form ``Y A_k x^Ytilde``."""
    x = _state(x, net.n)
    return net.Y @ laplacian(net, k) @ monomials(net.Ytilde, x)


def _unchecked_rhs(net, A, x):
    return net.Y @ (A @ monomials(net.Ytilde, x))


def jacobian(net: GmasNetwork, k, x):
    """``J(x) = Y A_k diag(x^Ytilde) Ytilde.T diag(1/x)``."""
    x = _state(x, net.n)
    A = laplacian(net, k)
    mono = monomials(net.Ytilde, x)
    return net.Y @ A @ (mono[:, None] * net.Ytilde.T) / x[None, :]


def vertex_throughput(net, k, x):
    """Largest total outflow ``sum_out k * x^ytilde(i)`` over vertices."""
    mono = monomials(net.Ytilde, x)
    out = np.zeros(net.m)
    for (i, _), kij in zip(net.edges, np.asarray(k, dtype=float)):
        out[i] += kij * mono[i]
    return float(out.max()) if out.size else 0.0


def complex_balance_residual(net, k, x):
    x = _state(x, net.n)
    return float(np.max(np.abs(laplacian(net, k) @ monomials(net.Ytilde, x)), initial=0.0))


def is_complex_balanced(net: GmasNetwork, k, x, rtol=BALANCE_RTOL):
    """Return ``(balanced, residual)`` for ``A_k x^Ytilde = 0``."""
    res = complex_balance_residual(net, k, x)
    scale = vertex_throughput(net, k, x)
    return res <= rtol * scale, res


@dataclass(frozen=True)
class EquilibriumCertificate:
    x_star: np.ndarray
    k: np.ndarray
    residual: float
    scale: float

    @property
    def ok(self):
        return self.residual <= BALANCE_RTOL * self.scale


def cycle_rates(net: GmasNetwork, cycle, x_star):
    """Rates ``1/x*^ytilde(i)`` on the edges of ``cycle``, zero elsewhere."""
    mono = monomials(net.Ytilde, x_star)
    k = np.zeros(net.n_edges)
    for e in cycle.edge_indices:
        k[e] = 1.0 / mono[net.edges[e][0]]
    return k


def construct_rates(net: GmasNetwork, x_star, cycles=None, cap=DEFAULT_CYCLE_CAP):
    """Rate constants for which ``x_star`` is complex balanced.

    Sums the unit cycle flows of every simple cycle, so every edge of a
    weakly reversible graph gets a positive rate.
    """
    x_star = _state(x_star, net.n)
    if not weakly_reversible(net):
        raise PreconditionError("rate construction needs a weakly reversible network")
    if cycles is None:
        cycles = enumerate_cycles(net, cap)
    k = np.zeros(net.n_edges)
    for c in cycles:
        k += cycle_rates(net, c, x_star)
    ok, res = is_complex_balanced(net, k, x_star)
    return EquilibriumCertificate(x_star, k, res, vertex_throughput(net, k, x_star))


def cycle_laplacian(net: GmasNetwork, cycle):
    """Unit-rate Laplacian of the cycle subgraph (m x m)."""
    edges = [net.edges[e] for e in cycle.edge_indices]
    return edge_laplacian(net.m, edges, np.ones(len(edges)))


def cycle_limit_matrix(net: GmasNetwork, cycle):
    """``(A_C, S_C)`` with ``A_C = Y A^C_{k=1} Ytilde.T`` and ``S_C = im(Y I_E(C))``."""
    A_C = net.Y @ cycle_laplacian(net, cycle) @ net.Ytilde.T
    S_C = subnetwork_subspace(net, cycle.edge_indices)
    return A_C, S_C


@dataclass(frozen=True)
class EpsilonMember:
    eps: float
    k: np.ndarray
    J: np.ndarray
    limit: np.ndarray
    balanced: bool
    residual: float

    @property
    def error(self):
        return float(np.linalg.norm(self.J - self.limit, 2))


def epsilon_family(net: GmasNetwork, cycle, x_star, eps, cycles=None, cap=DEFAULT_CYCLE_CAP):
    """Rates ``k^C + eps * sum_{C' != C} k^{C'}`` and the Jacobian at ``x_star``.

    ``x_star`` is complex balanced for every ``eps``; as ``eps -> 0`` the
    Jacobian tends to ``A_C diag(1/x_star)``.
    """
    x_star = _state(x_star, net.n)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not weakly_reversible(net):
        raise PreconditionError("epsilon family needs a weakly reversible network")
    if cycles is None:
        cycles = enumerate_cycles(net, cap)
    if cycle not in cycles:
        raise PreconditionError("cycle does not belong to the network")
    k = cycle_rates(net, cycle, x_star)
    for c in cycles:
        if c != cycle:
            k = k + eps * cycle_rates(net, c, x_star)
    J = jacobian(net, k, x_star)
    A_C, _ = cycle_limit_matrix(net, cycle)
    limit = A_C / x_star[None, :]
    ok, res = is_complex_balanced(net, k, x_star)
    return EpsilonMember(float(eps), k, J, limit, ok, res)


def kernel_lemma_check(net: GmasNetwork, k, x_star, tol=1e-8):
    """Compare ``ker(A_k diag(x*^Ytilde))`` with ``ker I_E.T``.

    Returns a dict with both dimensions, the component count and the
    principal-angle distance; ``holds`` summarizes the comparison.
    """
    x_star = _state(x_star, net.n)
    ok, res = is_complex_balanced(net, k, x_star)
    if not ok:
        raise PreconditionError(f"x_star is not complex balanced (residual {res:.3g})")
    M = laplacian(net, k) * monomials(net.Ytilde, x_star)[None, :]
    IE, _ = incidence_matrices(net.m, net.edges)
    scale = max(np.abs(M).max(), 1.0)
    K1 = Subspace(net.m, null_space(M, rcond=1e-10)) if M.size else Subspace.full(net.m)
    K2 = Subspace(net.m, null_space(IE.T, rcond=1e-10)) if IE.size else Subspace.full(net.m)
    n_comp = len(connected_components(net))
    dist = subspace_distance(K1, K2)
    return {
        "holds": K1.dim == K2.dim == n_comp and dist <= tol,
        "dim_laplacian_kernel": K1.dim,
        "dim_incidence_kernel": K2.dim,
        "components": n_comp,
        "distance": dist,
        "scale": float(scale),
    }


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    status: str = "completed"
    message: str = ""
    max_drift: float = 0.0
    events: list = field(default_factory=list)

    def to_csv(self, species=None):
        n = self.x.shape[1]
        names = species or [f"x{i + 1}" for i in range(n)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *names])
        for ti, xi in zip(self.t, self.x):
            w.writerow([repr(float(ti)), *(repr(float(v)) for v in xi)])
        return buf.getvalue()


def integrate(net: GmasNetwork, k, x0, t_end, rtol=1e-8, atol=1e-10,
              floor=POSITIVITY_FLOOR, max_step=np.inf):
    """Integrate the ODE with the explicit Dormand-Prince 4(5) pair.

    One row per accepted step. Hitting the positivity floor stops the run
    with ``status == "positivity_floor"``; step-size collapse raises
    StiffnessError carrying the partial trajectory.
    """
    x0 = _state(x0, net.n)
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    A = laplacian(net, k)

    def f(_t, x):
        return _unchecked_rhs(net, A, x)

    def hit_floor(_t, x):
        return np.min(x) - floor

    hit_floor.terminal = True
    hit_floor.direction = -1

    sol = solve_ivp(f, (0.0, float(t_end)), x0, method="RK45", rtol=rtol, atol=atol,
                    events=hit_floor, max_step=max_step)
    traj = Trajectory(sol.t, sol.y.T)
    S = stoichiometric_subspace(net)
    C = orthogonal_complement(S).basis
    if C.shape[1]:
        drift = np.abs((traj.x - x0) @ C).max()
        traj.max_drift = float(drift / max(np.linalg.norm(x0), 1.0))
    if sol.status == 1:
        traj.status = "positivity_floor"
        traj.message = f"coordinate fell below {floor:g} at t={sol.t[-1]:.6g}"
        traj.events.append(traj.message)
    elif sol.status < 0:
        traj.status = "stiff"
        traj.message = sol.message
        raise StiffnessError(f"integration failed: {sol.message}", traj)
    return traj
