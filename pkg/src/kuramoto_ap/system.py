"""The algebraic synchronization system and its polyhedral bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping, Sequence

import numpy as np

from . import geometry as geo
from .network import NetworkError, OscillatorNetwork, Topology, TreeStructure, classify, tree_exponent_matrix

Exponent = tuple[int, ...]


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class LaurentPolynomial:
    """Sparse Laurent polynomial: exponent vector -> complex coefficient."""

    terms: Mapping[Exponent, complex]

    def __post_init__(self):
        clean = {tuple(int(x) for x in e): complex(c) for e, c in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)

    @property
    def support(self) -> list[Exponent]:
        return sorted(self.terms)

    def __call__(self, x: Sequence[complex]) -> complex:
        x = np.asarray(x, dtype=complex)
        return complex(sum(c * np.prod(x ** np.array(e)) for e, c in self.terms.items()))

    def __add__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPolynomial(out)

    def scale(self, s: complex) -> "LaurentPolynomial":
        return LaurentPolynomial({e: s * c for e, c in self.terms.items()})

    def constant(self) -> complex:
        n = len(next(iter(self.terms))) if self.terms else 0
        return self.terms.get((0,) * n, 0j)

    def to_json(self) -> list:
        return [{"exponents": list(e), "coeff": [c.real, c.imag]} for e, c in sorted(self.terms.items())]


@dataclass(frozen=True)
class LaurentSystem:
    equations: tuple[LaurentPolynomial, ...]
    n: int
    provenance: str = ""

    def __call__(self, x: Sequence[complex]) -> np.ndarray:
        return np.array([f(x) for f in self.equations])

    def supports(self) -> list[list[Exponent]]:
        return [f.support for f in self.equations]

    def newton_polytopes(self) -> list[geo.LatticePolytope]:
        return [geo.convex_hull(s, dim=self.n) for s in self.supports()]

    def to_json(self) -> dict:
        return {"n": self.n, "provenance": self.provenance, "equations": [f.to_json() for f in self.equations]}

    @classmethod
    def from_json(cls, data: dict) -> "LaurentSystem":
        eqs = tuple(
            LaurentPolynomial({tuple(t["exponents"]): complex(*t["coeff"]) for t in eq}) for eq in data["equations"]
        )
        return cls(eqs, int(data["n"]), data.get("provenance", ""))


def edge_vector(n: int, i: int, j: int) -> Exponent:
    """e_i - e_j in Z^n with e_0 = 0 (variables are 1-based)."""
    v = [0] * n
    if i:
        v[i - 1] += 1
    if j:
        v[j - 1] -= 1
    return tuple(v)


def build_system(net: OscillatorNetwork) -> LaurentSystem:
    """F_i = omega_i - sum_j a'_ij (x_i/x_j - x_j/x_i), x_0 = 1."""
    n = net.n
    eqs = []
    zero = (0,) * n
    for i in range(1, net.N):
        terms: dict[Exponent, complex] = {zero: net.omega[i - 1]}
        for j in net.neighbors(i):
            a = net.weight(i, j)
            ev = edge_vector(n, i, j)
            terms[ev] = terms.get(ev, 0) - a
            neg = tuple(-x for x in ev)
            terms[neg] = terms.get(neg, 0) + a
        eqs.append(LaurentPolynomial(terms))
    return LaurentSystem(tuple(eqs), n, net.name)


def support_family(net: OscillatorNetwork) -> list[list[Exponent]]:
    """Generic supports {0} u {+-(e_i - e_j) : j in N(i)}, one per equation."""
    n = net.n
    out = []
    for i in range(1, net.N):
        pts = {(0,) * n}
        for j in net.neighbors(i):
            ev = edge_vector(n, i, j)
            pts.add(ev)
            pts.add(tuple(-x for x in ev))
        out.append(sorted(pts))
    return out


def newton_polytopes(net: OscillatorNetwork) -> list[geo.LatticePolytope]:
    return [geo.convex_hull(s, dim=net.n) for s in support_family(net)]


def adjacency_polytope(net: OscillatorNetwork) -> geo.LatticePolytope:
    n = net.n
    pts = []
    for i, j in net.edges:
        ev = edge_vector(n, i, j)
        pts.append(ev)
        pts.append(tuple(-x for x in ev))
    return geo.convex_hull(pts, dim=n)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def tree_formula(N: int) -> int:
    if N < 2:
        raise ValueError("tree formula needs N >= 2")
    return 2 ** (N - 1)


def cycle_formula(N: int) -> int:
    if N < 3:
        raise ValueError("cycle formula needs N >= 3")
    return N * comb(N - 1, (N - 1) // 2)


def baseline_bound(N: int) -> int:
    if N < 2:
        raise ValueError("baseline bound needs N >= 2")
    return comb(2 * N - 2, N - 1)


def closed_form(net: OscillatorNetwork) -> int | None:
    tag = classify(net).tag
    if tag is Topology.TREE:
        return tree_formula(net.N)
    if tag is Topology.CYCLE:
        return cycle_formula(net.N)
    return None


@dataclass
class APBound:
    value: int
    method: str
    topology: str
    formula: int | None = None
    triangulation: int | None = None
    agree: bool | None = None

    def to_json(self) -> dict:
        return {
            "ap_bound": self.value,
            "method": self.method,
            "topology": self.topology,
            "formula": self.formula,
            "triangulation": self.triangulation,
            "agree": self.agree,
        }


class BoundDisagreement(RuntimeError):
    pass


def ap_bound(net: OscillatorNetwork, method: str = "auto") -> APBound:
    """Normalized volume of the adjacency polytope.

    ``auto`` uses the closed form when one applies, triangulation otherwise;
    ``both`` computes both and fails loudly on any mismatch.
    """
    tc = classify(net)
    formula = closed_form(net)
    if method not in ("auto", "formula", "triangulation", "both"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("formula", "both") and formula is None:
        raise NetworkError("no closed form in scope")
    tri = None
    if method in ("triangulation", "both") or (method == "auto" and formula is None):
        tri = geo.normalized_volume(adjacency_polytope(net))
    if method == "both":
        if tri != formula:
            raise BoundDisagreement(f"formula {formula} != triangulation {tri} for {tc.tag.value} N={net.N}")
        return APBound(tri, method, tc.tag.value, formula, tri, True)
    value = formula if method == "formula" or (method == "auto" and formula is not None) else tri
    return APBound(value, method, tc.tag.value, formula if method != "triangulation" else None, tri)


# ---------------------------------------------------------------------------
# tree reduction and toric changes of coordinates
# ---------------------------------------------------------------------------


def tree_reduce(system: LaurentSystem, tree: TreeStructure) -> tuple[LaurentSystem, list[complex]]:
    """Eliminate leaves so equation i only couples x_i with its parent.

    ``system`` must use the tree's labelling (parents precede children).  The highest-index remaining vertex is always a leaf and is
    folded into its parent's equation.  Returns the reduced system and the
    new constants omega*.
    """
    n = system.n
    if n != tree.n:
        raise ReductionError("system and tree sizes differ")
    if any(tree.parent[i] >= i for i in range(1, n + 1)):
        raise ReductionError("tree must be indexed with parents before children")
    eqs = list(system.equations)
    for i in range(n, 0, -1):
        p = tree.parent[i]
        if p == 0:
            continue
        a_ip = -eqs[i - 1].terms.get(edge_vector(n, i, p), 0)
        a_pi = -eqs[p - 1].terms.get(edge_vector(n, p, i), 0)
        if a_ip == 0:
            raise ReductionError("non-generic weight (division by zero)")
        combined = eqs[p - 1] + eqs[i - 1].scale(a_pi / a_ip)
        # the +-(e_p - e_i) terms cancel identically; drop rounding residue
        ev = edge_vector(n, p, i)
        drop = {ev, tuple(-x for x in ev)}
        eqs[p - 1] = LaurentPolynomial({e: c for e, c in combined.terms.items() if e not in drop})
    reduced = LaurentSystem(tuple(eqs), n, system.provenance + ":tree-reduced")
    return reduced, [f.constant() for f in eqs]


def toric_substitution(system: LaurentSystem, umap: geo.UnimodularMap) -> LaurentSystem:
    """Rewrite F(x) as a system in y where x = y^A.

    Column i of ``A`` is the exponent vector of x_i in y, so the monomial x^m
    becomes y^(A m).
    """
    if umap.dim != system.n:
        raise ReductionError("dimension mismatch")
    eqs = tuple(LaurentPolynomial({umap(e): c for e, c in f.terms.items()}) for f in system.equations)
    return LaurentSystem(eqs, system.n, system.provenance + ":substituted")


def monomial_map(umap: geo.UnimodularMap, y: Sequence[complex]) -> np.ndarray:
    """Evaluate x = y^A (column i of A gives x_i)."""
    y = np.asarray(y, dtype=complex)
    a = np.array(umap.matrix)
    return np.array([np.prod(y ** a[:, i]) for i in range(umap.dim)])


def tree_transform(net: OscillatorNetwork) -> tuple[OscillatorNetwork, TreeStructure, geo.UnimodularMap]:
    """Relabel a tree network so parents precede children; return its exponent map."""
    from .network import tree_structure

    tree = tree_structure(net)
    relabelled = net.relabel(tree.reindex_perm)
    umap, _ = tree_exponent_matrix(tree)
    return relabelled, tree, umap


# ---------------------------------------------------------------------------
# initial systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitialSystem:
    direction: tuple[Fraction, ...]
    faces: tuple[tuple[Exponent, ...], ...]
    heights: tuple[Fraction, ...]
    coefficients: tuple[tuple[complex, ...], ...] = field(default=())

    @property
    def has_monomial_equation(self) -> bool:
        return any(len(f) == 1 for f in self.faces)


def initial_system(system: LaurentSystem, v: Sequence) -> InitialSystem:
    """Restrict each equation to the terms where <exponent, v> is minimal."""
    vec = tuple(Fraction(x) for x in v)
    if not any(vec):
        raise ValueError("direction must be nonzero")
    faces, heights, coeffs = [], [], []
    for f in system.equations:
        supp = f.support
        idx, h = geo.argmin_face(supp, vec)
        face = tuple(supp[i] for i in idx)
        faces.append(face)
        heights.append(h)
        coeffs.append(tuple(f.terms[e] for e in face))
    return InitialSystem(vec, tuple(faces), tuple(heights), tuple(coeffs))
