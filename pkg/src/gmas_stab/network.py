"""Generalized chemical reaction networks and their structural matrices.

A network is a digraph on "vertices"; every vertex carries a stoichiometric
complex ``y(i)`` and, if it is the source of some edge, a kinetic-order
complex ``ytilde(i)``. The text format is line oriented::

    species: X Y Z
    vertex v1: stoich = 0 , kinetic = -3 Z
    vertex v2: stoich = X , kinetic = X
    edge v1 -> v2 : k = 1.0
    edge v2 <-> v3 : k = 2.0, 0.5
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .errors import NetworkSyntaxError, NetworkValidationError, ResourceLimitError
from .linalg import Subspace

DEFAULT_CYCLE_CAP = 10**6

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"


@dataclass(frozen=True)
class ComplexPair:
    """Stoichiometric complex and optional kinetic-order complex of one vertex."""

    name: str
    stoich: tuple
    kinetic: Optional[tuple] = None


@dataclass(frozen=True)
class Cycle:
    """Directed simple cycle; ``vertex_indices[0]`` is the smallest vertex."""

    vertex_indices: tuple
    edge_indices: tuple

    def __len__(self):
        return len(self.edge_indices)


@dataclass(frozen=True)
class StructuralMatrices:
    Y: np.ndarray
    Ytilde: np.ndarray
    IE: np.ndarray
    IEs: np.ndarray


@dataclass(frozen=True)
class GmasNetwork:
    """Generalized mass-action network ``(G, y, ytilde)``.

    ``rates`` holds the rate constants given in the source text (``None``
    for edges without one); analyses take rates as a separate argument.
    """

    species: tuple
    vertices: tuple
    edges: tuple
    rates: tuple = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.species)
        if len(set(self.species)) != n:
            raise NetworkValidationError("duplicate species name")
        if not self.vertices:
            raise NetworkValidationError("no vertices")
        names = [v.name for v in self.vertices]
        if len(set(names)) != len(names):
            raise NetworkValidationError("duplicate vertex name")
        m = len(self.vertices)
        for v in self.vertices:
            if len(v.stoich) != n or (v.kinetic is not None and len(v.kinetic) != n):
                raise NetworkValidationError(f"vertex {v.name!r}: complex has wrong length")
            if any(c < 0 for c in v.stoich):
                raise NetworkValidationError(
                    f"vertex {v.name!r}: stoichiometric coefficients must be >= 0")
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < m and 0 <= j < m):
                raise NetworkValidationError(f"edge ({i}, {j}) references an unknown vertex")
            if i == j:
                raise NetworkValidationError(f"self-loop at vertex {names[i]!r}")
            if (i, j) in seen:
                raise NetworkValidationError(
                    f"duplicate edge {names[i]} -> {names[j]} (merge parallel reactions)")
            seen.add((i, j))
        for i in {i for i, _ in self.edges}:
            if self.vertices[i].kinetic is None:
                raise NetworkValidationError(
                    f"source vertex {names[i]!r} has no kinetic-order complex")
        if self.rates is None:
            object.__setattr__(self, "rates", (None,) * len(self.edges))
        elif len(self.rates) != len(self.edges):
            raise NetworkValidationError("one rate entry per edge required")

    @classmethod
    def from_matrices(cls, Y, Ytilde, edges, species=None, vertex_names=None, rates=None):
        """Build a network from column-complex matrices (n x m)."""
        Y = np.asarray(Y, dtype=float)
        Yt = np.asarray(Ytilde, dtype=float)
        n, m = Y.shape
        species = tuple(species or (f"X{i + 1}" for i in range(n)))
        vertex_names = tuple(vertex_names or (f"v{i + 1}" for i in range(m)))
        edges = tuple((int(i), int(j)) for i, j in edges)
        sources = {i for i, _ in edges}
        vertices = tuple(
            ComplexPair(vertex_names[i], tuple(float(c) for c in Y[:, i]),
                        tuple(float(c) for c in Yt[:, i]) if (i in sources or np.any(Yt[:, i])) else None)
            for i in range(m))
        if rates is not None:
            rates = tuple(None if r is None else float(r) for r in rates)
        return cls(species, vertices, edges, rates)

    @property
    def n(self):
        return len(self.species)

    @property
    def m(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @cached_property
    def sources(self):
        return frozenset(i for i, _ in self.edges)

    @cached_property
    def Y(self):
        Y = np.array([v.stoich for v in self.vertices], dtype=float).T.reshape(self.n, self.m)
        Y.setflags(write=False)
        return Y

    @cached_property
    def Ytilde(self):
        # kinetic columns of non-sources are set to zero
        Yt = np.zeros((self.n, self.m))
        for i, v in enumerate(self.vertices):
            if v.kinetic is not None and i in self.sources:
                Yt[:, i] = v.kinetic
        Yt.setflags(write=False)
        return Yt

    def rate_vector(self):
        """Rates from the source text as an array, or None if any is missing."""
        if any(r is None for r in self.rates):
            return None
        return np.array(self.rates, dtype=float)

    def with_rates(self, k):
        return GmasNetwork(self.species, self.vertices, self.edges,
                           tuple(float(x) for x in k))

    def vertex_index(self, name):
        for i, v in enumerate(self.vertices):
            if v.name == name:
                return i
        raise KeyError(name)

    def digraph(self):
        G = nx.DiGraph()
        G.add_nodes_from(range(self.m))
        G.add_edges_from(self.edges)
        return G


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TERM = re.compile(rf"\s*(?P<sign>[+-])?\s*(?P<coef>{_NUMBER})?\s*(?P<sp>{_IDENT})?\s*")


def _parse_complex(text, species_index, lineno, col0):
    """Parse ``c1 S1 + c2 S2 - ...`` into a coefficient vector."""
    n = len(species_index)
    vec = np.zeros(n)
    s = text.strip()
    offset = col0 + (len(text) - len(text.lstrip()))
    if not s:
        raise NetworkSyntaxError("empty complex", lineno, offset + 1)
    if re.fullmatch(r"0+(?:\.0*)?", s):
        return tuple(vec)
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise NetworkSyntaxError(f"cannot parse complex near {s[pos:]!r}", lineno, offset + pos + 1)
        sign, coef, sp = m.group("sign"), m.group("coef"), m.group("sp")
        if not first and sign is None:
            raise NetworkSyntaxError("expected '+' or '-' between terms", lineno, offset + pos + 1)
        if sp is None:
            raise NetworkSyntaxError("term without species", lineno, offset + pos + 1)
        if sp not in species_index:
            raise NetworkSyntaxError(f"undeclared species {sp!r}", lineno, offset + m.start("sp") + 1)
        c = float(coef) if coef is not None else 1.0
        if sign == "-":
            c = -c
        vec[species_index[sp]] += c
        pos = m.end()
        first = False
    return tuple(float(x) for x in vec)


def _split_rates(text, lineno, col):
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        try:
            val = float(piece)
        except ValueError:
            raise NetworkSyntaxError(f"bad rate constant {piece!r}", lineno, col) from None
        if not val > 0:
            raise NetworkSyntaxError("rate constants must be positive", lineno, col)
        out.append(val)
    return out


_SPECIES_RE = re.compile(r"species\s*:(?P<rest>.*)$")
_VERTEX_RE = re.compile(rf"vertex\s+(?P<name>{_IDENT})\s*:(?P<rest>.*)$")
_EDGE_RE = re.compile(
    rf"edge\s+(?P<a>{_IDENT})\s*(?P<arrow><->|->)\s*(?P<b>{_IDENT})\s*(?::\s*k\s*=\s*(?P<k>.*))?$")


def parse_network(text: str) -> GmasNetwork:
    """Parse the line-oriented network format.

    Vertex and edge order follow declaration order. Syntax problems raise
    NetworkSyntaxError with line and column; structural problems raise
    NetworkValidationError.
    """
    species = None
    species_index = {}
    vertices = []
    vertex_index = {}
    edges = []
    rates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        if (m := _SPECIES_RE.match(body)):
            if species is not None:
                raise NetworkSyntaxError("species declared twice", lineno, indent + 1)
            names = m.group("rest").split()
            for nm in names:
                if not re.fullmatch(_IDENT, nm):
                    raise NetworkSyntaxError(f"bad species name {nm!r}", lineno, indent + 1)
            if len(set(names)) != len(names):
                raise NetworkSyntaxError("duplicate species name", lineno, indent + 1)
            species = tuple(names)
            species_index = {s: i for i, s in enumerate(species)}
        elif (m := _VERTEX_RE.match(body)):
            if species is None:
                raise NetworkSyntaxError("vertex before species declaration", lineno, indent + 1)
            name = m.group("name")
            if name in vertex_index:
                raise NetworkSyntaxError(f"vertex {name!r} declared twice", lineno, indent + 1)
            rest = m.group("rest")
            col0 = indent + m.start("rest")
            fields = {}
            pos = 0
            for part in rest.split(","):
                key, eq, val = part.partition("=")
                key = key.strip()
                if not eq or key not in ("stoich", "kinetic") or key in fields:
                    raise NetworkSyntaxError(
                        "expected 'stoich = ...' [, 'kinetic = ...']", lineno, col0 + pos + 1)
                fields[key] = (val, col0 + pos + len(part) - len(val))
                pos += len(part) + 1
            if "stoich" not in fields:
                raise NetworkSyntaxError("vertex needs 'stoich = ...'", lineno, col0 + 1)
            val, col = fields["stoich"]
            stoich = _parse_complex(val, species_index, lineno, col)
            kinetic = None
            if "kinetic" in fields:
                val, col = fields["kinetic"]
                kinetic = _parse_complex(val, species_index, lineno, col)
            if any(c < 0 for c in stoich):
                raise NetworkSyntaxError("stoichiometric coefficients must be >= 0",
                                         lineno, fields["stoich"][1] + 1)
            vertex_index[name] = len(vertices)
            vertices.append(ComplexPair(name, stoich, kinetic))
        elif (m := _EDGE_RE.match(body)):
            a, b = m.group("a"), m.group("b")
            for nm, grp in ((a, "a"), (b, "b")):
                if nm not in vertex_index:
                    raise NetworkSyntaxError(f"undeclared vertex {nm!r}", lineno, indent + m.start(grp) + 1)
            ks = None
            if m.group("k") is not None:
                ks = _split_rates(m.group("k"), lineno, indent + m.start("k") + 1)
            ia, ib = vertex_index[a], vertex_index[b]
            if m.group("arrow") == "->":
                if ks is not None and len(ks) != 1:
                    raise NetworkSyntaxError("irreversible edge takes one rate", lineno, indent + m.start("k") + 1)
                edges.append((ia, ib))
                rates.append(ks[0] if ks else None)
            else:
                if ks is not None and len(ks) != 2:
                    raise NetworkSyntaxError("reversible edge takes two rates 'kf, kb'",
                                             lineno, indent + m.start("k") + 1)
                edges.extend([(ia, ib), (ib, ia)])
                rates.extend(ks if ks else [None, None])
        else:
            raise NetworkSyntaxError(f"unrecognized statement {body.split()[0]!r}", lineno, indent + 1)
    if species is None:
        raise NetworkSyntaxError("missing 'species:' declaration", 1, 1)
    if not vertices:
        raise NetworkValidationError("no vertices")
    return GmasNetwork(species, tuple(vertices), tuple(edges), tuple(rates))


def _fmt_num(x):
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def format_complex(vec, species):
    terms = []
    for c, s in zip(vec, species):
        if c == 0:
            continue
        mag = abs(c)
        body = s if mag == 1 else f"{_fmt_num(mag)} {s}"
        if not terms:
            terms.append(body if c > 0 else "-" + body)
        else:
            terms.append(("+ " if c > 0 else "- ") + body)
    return " ".join(terms) if terms else "0"


def serialize_network(net: GmasNetwork) -> str:
    """Canonical text form; ``parse_network`` inverts it exactly."""
    lines = ["species: " + " ".join(net.species)]
    for v in net.vertices:
        line = f"vertex {v.name}: stoich = {format_complex(v.stoich, net.species)}"
        if v.kinetic is not None:
            line += f", kinetic = {format_complex(v.kinetic, net.species)}"
        lines.append(line)
    for (i, j), k in zip(net.edges, net.rates):
        line = f"edge {net.vertices[i].name} -> {net.vertices[j].name}"
        if k is not None:
            line += f" : k = {k!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

def incidence_matrices(m, edges):
    IE = np.zeros((m, len(edges)))
    IEs = np.zeros((m, len(edges)))
    for e, (i, j) in enumerate(edges):
        IE[i, e] = -1.0
        IE[j, e] = 1.0
        IEs[i, e] = 1.0
    return IE, IEs


def structural_matrices(net: GmasNetwork) -> StructuralMatrices:
    IE, IEs = incidence_matrices(net.m, net.edges)
    return StructuralMatrices(net.Y.copy(), net.Ytilde.copy(), IE, IEs)


def _check_rates(net, k):
    k = np.asarray(k, dtype=float).ravel()
    if k.shape != (net.n_edges,):
        raise ValueError(f"expected {net.n_edges} rate constants, got {k.size}")
    if not np.all(k > 0):
        raise ValueError("rate constants must be positive")
    return k


def laplacian(net: GmasNetwork, k) -> np.ndarray:
    """Laplacian ``A_k = I_E diag(k) I_E^s.T`` (column sums zero)."""
    k = _check_rates(net, k)
    A = np.zeros((net.m, net.m))
    for (i, j), kij in zip(net.edges, k):
        A[j, i] += kij
        A[i, i] -= kij
    return A


def edge_laplacian(m, edges, k):
    """Laplacian of an arbitrary edge list on ``m`` vertices (nonnegative ``k``)."""
    A = np.zeros((m, m))
    for (i, j), kij in zip(edges, k):
        A[j, i] += kij
        A[i, i] -= kij
    return A


def connected_components(net: GmasNetwork):
    """Vertex sets of the weakly connected components, sorted by smallest vertex."""
    comps = [sorted(c) for c in nx.weakly_connected_components(net.digraph())]
    return sorted(comps)


def weakly_reversible(net: GmasNetwork) -> bool:
    """Every connected component is strongly connected."""
    G = net.digraph()
    n_scc = nx.number_strongly_connected_components(G)
    n_wcc = nx.number_weakly_connected_components(G)
    return n_scc == n_wcc


def _canonical(vertices, edge_index):
    r = int(np.argmin(vertices))
    vs = tuple(int(v) for v in vertices[r:] + vertices[:r])
    es = tuple(edge_index[(vs[t], vs[(t + 1) % len(vs)])] for t in range(len(vs)))
    return Cycle(vs, es)


def enumerate_cycles(net: GmasNetwork, cap: int = DEFAULT_CYCLE_CAP):
    """All directed simple cycles, canonically rotated and sorted."""
    edge_index = {e: t for t, e in enumerate(net.edges)}
    out = []
    for cyc in nx.simple_cycles(net.digraph()):
        out.append(_canonical(list(cyc), edge_index))
        if len(out) > cap:
            raise ResourceLimitError(f"more than {cap} simple cycles")
    out.sort(key=lambda c: c.vertex_indices)
    return out


def is_single_cycle(net: GmasNetwork) -> bool:
    """True iff the edge set is exactly one directed simple cycle."""
    if net.n_edges < 2:
        return False
    first_two = list(itertools.islice(nx.simple_cycles(net.digraph()), 2))
    return len(first_two) == 1 and len(first_two[0]) == net.n_edges


def stoichiometric_subspace(net: GmasNetwork) -> Subspace:
    IE, _ = incidence_matrices(net.m, net.edges)
    return Subspace.from_span(net.Y @ IE)


def kinetic_subspace(net: GmasNetwork) -> Subspace:
    IE, _ = incidence_matrices(net.m, net.edges)
    return Subspace.from_span(net.Ytilde @ IE)


def subnetwork_subspace(net: GmasNetwork, edge_indices: Sequence[int]) -> Subspace:
    """``im(Y I_E')`` for a subset of edges."""
    edges = [net.edges[e] for e in edge_indices]
    IE, _ = incidence_matrices(net.m, edges)
    return Subspace.from_span(net.Y @ IE)
