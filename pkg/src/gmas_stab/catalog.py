"""Builders for the standard example networks and the bundled ``.gcrn`` files."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .network import GmasNetwork, parse_network, serialize_network

#: the five kinetic-order settings of the irreversible four-cycle
FOUR_CYCLE_ROWS = {
    (0, 0, 0): "diagonally stable",
    (5, 0, -3): "D-stable, not diagonally stable",
    (3, 4, -4): "stable and P0+, not D-stable",
    (2, -2, 1): "stable, not P0+",
    (0, -2, -3): "unstable, P0+",
}


def _tag(x):
    x = float(x)
    s = f"{abs(x):g}".replace(".", "p")
    return ("m" if x < 0 else "") + s


def four_cycle_name(alpha, beta, gamma):
    return f"fourcycle_a{_tag(alpha)}_b{_tag(beta)}_g{_tag(gamma)}"


def four_cycle_matrix(alpha, beta, gamma):
    """Unit-rate matrix ``Y A_1 Ytilde.T`` of the four-cycle, in closed form."""
    return np.array([[-1.0, 0.0, gamma], [1.0 - alpha, -1.0, 0.0], [alpha, 1.0 - beta, -1.0]])


def four_cycle(alpha, beta, gamma):
    """``0 -> X -> Y -> Z -> 0`` with kinetic orders ``gZ``, ``X``, ``aX + Y``, ``bY + Z``."""
    Y = np.array([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)
    Yt = np.array([[0, 1, alpha, 0], [0, 0, 1, beta], [gamma, 0, 0, 1]], dtype=float)
    return GmasNetwork.from_matrices(Y, Yt, [(0, 1), (1, 2), (2, 3), (3, 0)],
                                     ("X", "Y", "Z"), ("v0", "vX", "vY", "vZ"))


def planar_three_cycle(a, b, alpha, beta):
    """Three-cycle in two species; vertex ``i`` is ``a_i X + b_i Y`` with kinetic ``alpha_i X + beta_i Y``."""
    Y = np.array([a, b], dtype=float)
    Yt = np.array([alpha, beta], dtype=float)
    return GmasNetwork.from_matrices(Y, Yt, [(0, 1), (1, 2), (2, 0)], ("X", "Y"), ("c1", "c2", "c3"))


def three_species_cycle(alpha, beta, gamma):
    """``X -> Y -> Z -> X``; vertex ``i`` has kinetic ``alpha_i X + beta_i Y + gamma_i Z``."""
    Y = np.eye(3)
    Yt = np.array([alpha, beta, gamma], dtype=float)
    return GmasNetwork.from_matrices(Y, Yt, [(0, 1), (1, 2), (2, 0)], ("X", "Y", "Z"), ("cX", "cY", "cZ"))


def reversible_chain(Y, Ytilde, species=None):
    """Chain ``1 <-> 2 <-> ... <-> m`` from column complexes."""
    Y = np.asarray(Y, dtype=float)
    Yt = np.asarray(Ytilde, dtype=float)
    m = Y.shape[1]
    edges = []
    for i in range(m - 1):
        edges += [(i, i + 1), (i + 1, i)]
    return GmasNetwork.from_matrices(Y, Yt, edges, species, tuple(f"c{i + 1}" for i in range(m)))


def s_system(G, H, alpha=None, beta=None):
    """Pairs ``0_i <-> X_i``; ``0_i`` has kinetic row ``i`` of G, ``X_i`` row ``i`` of H.

    ``alpha`` and ``beta`` are stored as the production and degradation rates.
    """
    G = np.asarray(G, dtype=float)
    H = np.asarray(H, dtype=float)
    n = G.shape[0]
    Y = np.zeros((n, 2 * n))
    Yt = np.zeros((n, 2 * n))
    edges = []
    names = []
    for i in range(n):
        Y[i, 2 * i + 1] = 1.0
        Yt[:, 2 * i] = G[i]
        Yt[:, 2 * i + 1] = H[i]
        edges += [(2 * i, 2 * i + 1), (2 * i + 1, 2 * i)]
        names += [f"zero{i + 1}", f"x{i + 1}"]
    rates = None
    if alpha is not None and beta is not None:
        rates = [r for pair in zip(alpha, beta) for r in pair]
    return GmasNetwork.from_matrices(Y, Yt, edges, tuple(f"X{i + 1}" for i in range(n)), names, rates)


def s_system_matrices(net: GmasNetwork):
    """Recover ``(G, H)`` from a network built by ``s_system``."""
    n = net.n
    Yt = net.Ytilde
    return Yt[:, 0::2].T.copy(), Yt[:, 1::2].T.copy()


def xy_unique():
    """``X (X) <-> Y (0)``: one species degrades into another at constant back rate."""
    Y = np.eye(2)
    Yt = np.array([[1.0, 0.0], [0.0, 0.0]])
    return GmasNetwork.from_matrices(Y, Yt, [(0, 1), (1, 0)], ("X", "Y"), ("a", "b"))


def overlap_nonunique():
    """``0 (0) <-> X + Y (X - Y)``: S equals the complement of the kinetic subspace."""
    Y = np.array([[0.0, 1.0], [0.0, 1.0]])
    Yt = np.array([[0.0, 1.0], [0.0, -1.0]])
    return GmasNetwork.from_matrices(Y, Yt, [(0, 1), (1, 0)], ("X", "Y"), ("zero", "XY"))


# default parameters used for the bundled templates
PLANAR_DEFAULT = dict(a=(0, 1, 0), b=(0, 0, 1), alpha=(0, 2, 0), beta=(0, 0, 0.5))
THREE_SPECIES_DEFAULT = dict(alpha=(2, 0, 0), beta=(0, 1, 0), gamma=(0, 0, 1))
REVCHAIN_DEFAULT = dict(Y=[[0, 1, 1, 0], [0, 0, 1, 2]], Ytilde=[[0, 1, 1, 0], [0, 0, 1, 2]])
SSYSTEM_DEFAULT = dict(G=[[0, -0.5], [1, 0]], H=[[0.5, 0], [0, 1]], alpha=(1, 1), beta=(1, 1))


def _with_header(net, lines):
    return "".join(f"# {ln}\n" for ln in lines) + serialize_network(net)


def template_texts(name):
    """``{filename: text}`` for one example family."""
    if name == "fourcycle":
        out = {}
        for (a, b, g), label in FOUR_CYCLE_ROWS.items():
            hdr = [f"irreversible four-cycle, alpha={a}, beta={b}, gamma={g}",
                   f"unit-rate matrix is {label}"]
            out[four_cycle_name(a, b, g) + ".gcrn"] = _with_header(four_cycle(a, b, g), hdr)
        return out
    if name == "planar3cycle":
        p = PLANAR_DEFAULT
        hdr = ["three-cycle in two species",
               "slots: vertex c_i has stoich a_i X + b_i Y and kinetic alpha_i X + beta_i Y",
               f"defaults: a={p['a']} b={p['b']} alpha={p['alpha']} beta={p['beta']}"]
        return {"planar3cycle.gcrn": _with_header(planar_three_cycle(**p), hdr)}
    if name == "ivanova3cycle":
        p = THREE_SPECIES_DEFAULT
        hdr = ["three-cycle X -> Y -> Z -> X, stoichiometric subspace of dimension two",
               "slots: vertex cX, cY, cZ has kinetic alpha_i X + beta_i Y + gamma_i Z",
               f"defaults: alpha={p['alpha']} beta={p['beta']} gamma={p['gamma']}"]
        return {"ivanova3cycle.gcrn": _with_header(three_species_cycle(**p), hdr)}
    if name == "revchain":
        p = REVCHAIN_DEFAULT
        hdr = ["reversible chain c1 <-> c2 <-> c3 <-> c4",
               "slots: stoich y(i) and kinetic ytilde(i) per vertex",
               "a cycle i <-> i+1 fails when (y(i+1)-y(i))_s (ytilde(i+1)-ytilde(i))_s < 0 for some s"]
        net = reversible_chain(p["Y"], p["Ytilde"], ("X", "Y"))
        return {"revchain.gcrn": _with_header(net, hdr)}
    if name == "ssystem":
        p = SSYSTEM_DEFAULT
        hdr = ["S-system dx_i/dt = alpha_i x^G[i] - beta_i x^H[i] as pairs zero_i <-> x_i",
               "slots: kinetic of zero_i is row i of G, kinetic of x_i is row i of H,",
               "rate of zero_i -> x_i is alpha_i, rate of x_i -> zero_i is beta_i",
               "a pair fails when G[i][i] > H[i][i]"]
        net = s_system(p["G"], p["H"], p["alpha"], p["beta"])
        return {"ssystem.gcrn": _with_header(net, hdr)}
    raise KeyError(name)


EXAMPLE_NAMES = ("planar3cycle", "ivanova3cycle", "fourcycle", "revchain", "ssystem")


def bundled_files():
    """Names of the ``.gcrn`` files shipped with the package."""
    root = resources.files("gmas_stab") / "data"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".gcrn"))


def load_bundled(name):
    if not name.endswith(".gcrn"):
        name += ".gcrn"
    text = (resources.files("gmas_stab") / "data" / name).read_text()
    return parse_network(text)


def regenerate_bundle(directory):
    """Write every template plus the two uniqueness examples into ``directory``."""
    from pathlib import Path

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for name in EXAMPLE_NAMES:
        for fn, text in template_texts(name).items():
            (d / fn).write_text(text)
            written.append(fn)
    extra = {
        "xy_unique.gcrn": _with_header(xy_unique(), ["X (X) <-> Y (0): unique complex-balanced equilibrium"]),
        "overlap_nonunique.gcrn": _with_header(
            overlap_nonunique(), ["0 (0) <-> X + Y (X - Y): equilibria are not unique"]),
    }
    for fn, text in extra.items():
        (d / fn).write_text(text)
        written.append(fn)
    return written
