"""Exact lattice polytope geometry.

Polytopes are stored by their integer vertices.  Facets are found by
gift-wrapping across ridges, triangulations are pulling triangulations built
recursively on facets, and volumes are sums of integer determinants, so no
floating point enters any result of this module.

Conventions: a facet is ``{x : <normal, x> = offset}`` with a primitive integer
inner normal, i.e. the polytope satisfies ``<normal, x> >= offset``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Iterable, Sequence

from . import intlinalg as la

Point = tuple[int, ...]
RationalPoint = tuple[Fraction, ...]

MIXED_VOLUME_LIMIT = 7


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: int
    vertex_indices: tuple[int, ...]

    def to_json(self) -> dict:
        return {"normal": list(self.normal), "offset": self.offset, "vertices": list(self.vertex_indices)}

    @classmethod
    def from_json(cls, data: dict) -> "Facet":
        return cls(tuple(data["normal"]), int(data["offset"]), tuple(data["vertices"]))


@dataclass(frozen=True)
class SimplicialCell:
    vertex_indices: tuple[int, ...]
    normalized_volume: int


@dataclass(frozen=True)
class UnimodularMap:
    """Integer matrix with determinant +-1, acting on column vectors."""

    matrix: tuple[tuple[int, ...], ...]
    det_sign: int = field(init=False)

    def __post_init__(self):
        mat = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if any(len(row) != len(mat) for row in mat):
            raise GeometryError("unimodular map must be square")
        d = la.det(mat)
        if abs(d) != 1:
            raise GeometryError(f"matrix is not unimodular (det = {d})")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "det_sign", d)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def __call__(self, point: Sequence) -> tuple:
        return la.matvec(self.matrix, point)

    def inverse(self) -> "UnimodularMap":
        return UnimodularMap(tuple(map(tuple, la.inverse_unimodular(self.matrix))))

    def compose(self, other: "UnimodularMap") -> "UnimodularMap":
        """``self @ other``."""
        return UnimodularMap(tuple(map(tuple, la.matmul(self.matrix, other.matrix))))

    @classmethod
    def identity(cls, n: int) -> "UnimodularMap":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


# ---------------------------------------------------------------------------
# low level hull machinery on plain point lists
# ---------------------------------------------------------------------------


def affine_dimension(points: Sequence[Sequence[int]]) -> int:
    if not points:
        return -1
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    return la.rank(diffs) if diffs else 0


def _functional_through(points: Sequence[Point], k: int, avoid: tuple | None = None) -> tuple:
    """An affine functional (c_1..c_k, c0) vanishing on all ``points``.

    The functional is ``x -> <c, x> - c0``.  When ``avoid`` is given the
    result is chosen not proportional to it.
    """
    rows = [list(p) + [-1] for p in points]
    basis = la.nullspace(rows, k + 1) if rows else [
        tuple(int(i == j) for j in range(k + 1)) for i in range(k + 1)
    ]
    for vec in basis:
        if avoid is None or la.rank([vec, avoid]) == 2:
            return vec
    raise GeometryError("no independent functional through face")  # pragma: no cover


def _evaluate(func: tuple, p: Sequence[int]) -> int:
    return la.dot(func[:-1], p) - func[-1]


def _wrap_to(base: tuple, pivot: tuple, pts: Sequence[Point]) -> tuple:
    """Rotate the supporting functional ``base`` about the zero set of ``pivot``.

    ``base`` is nonnegative on ``pts``.  ``pivot`` vanishes on a face of the
    zero set of ``base``.  Returns the primitive functional
    ``pivot - t*base`` with the largest ``t`` keeping it nonnegative, which is
    the neighbouring supporting hyperplane.
    """
    best: Fraction | None = None
    for p in pts:
        fb = _evaluate(base, p)
        if fb > 0:
            ratio = Fraction(_evaluate(pivot, p), fb)
            if best is None or ratio < best:
                best = ratio
    assert best is not None
    num, den = best.numerator, best.denominator
    return la.primitive([den * a - num * b for a, b in zip(pivot, base)])


def _initial_facet(pts: Sequence[Point], k: int) -> tuple:
    lo = min(p[0] for p in pts)
    func: tuple = tuple([1] + [0] * (k - 1) + [lo])
    while True:
        zero = [p for p in pts if _evaluate(func, p) == 0]
        if affine_dimension(zero) == k - 1:
            return func
        pivot = _functional_through(zero, k, avoid=func)
        func = _wrap_to(func, pivot, pts)


def _drop_coordinate(normal: Sequence[int]) -> int:
    return min((j for j, a in enumerate(normal) if a), key=lambda j: (abs(normal[j]), j))


def _project(pts: Sequence[Point], j: int) -> list[Point]:
    return [p[:j] + p[j + 1:] for p in pts]


def facets_of_points(pts: Sequence[Point]) -> list[tuple[tuple, frozenset]]:
    """Facets of conv(pts) for a full-dimensional point list.

    Returns ``(functional, point_index_set)`` pairs where ``functional`` is
    ``(normal..., offset)`` primitive with ``<normal, x> >= offset`` on pts.
    Gift-wrapping: start from one facet and cross every ridge.
    """
    k = len(pts[0])
    if k == 1:
        values = [p[0] for p in pts]
        lo, hi = min(values), max(values)
        return [
            ((1, lo), frozenset(i for i, v in enumerate(values) if v == lo)),
            ((-1, -hi), frozenset(i for i, v in enumerate(values) if v == hi)),
        ]
    first = _initial_facet(pts, k)
    found: dict[tuple, frozenset] = {}
    queue = [first]
    seen_ridges: set[frozenset] = set()
    while queue:
        func = queue.pop()
        if func in found:
            continue
        on = frozenset(i for i, p in enumerate(pts) if _evaluate(func, p) == 0)
        found[func] = on
        for ridge, pivot in _ridges(func, on, pts, k):
            if ridge in seen_ridges:
                continue
            seen_ridges.add(ridge)
            if pivot is None:
                pivot = _functional_through([pts[i] for i in ridge], k, avoid=func)
                # must be nonnegative on the rest of the facet
                if any(_evaluate(pivot, pts[i]) < 0 for i in on - ridge):
                    pivot = tuple(-x for x in pivot)
            nxt = _wrap_to(func, pivot, pts)
            if nxt not in found:
                queue.append(nxt)
    return [(f, on) for f, on in found.items()]


def _ridges(func: tuple, on: frozenset, pts: Sequence[Point], k: int):
    """Ridges of a facet, each with a pivot functional when cheaply available."""
    members = sorted(on)
    if len(members) == k:
        for drop in members:
            yield on - {drop}, None
        return
    j = _drop_coordinate(func[:-1])
    sub = _project([pts[i] for i in members], j)
    for rel, rel_on in facets_of_points(sub):
        normal = list(rel[:-1])
        normal.insert(j, 0)
        yield frozenset(members[i] for i in rel_on), tuple(normal) + (rel[-1],)


def vertex_indices_of(pts: Sequence[Point], facets: Sequence[tuple[tuple, frozenset]]) -> list[int]:
    """Indices of points that are vertices of their (full-dimensional) hull."""
    k = len(pts[0])
    normals_at: dict[int, list] = {i: [] for i in range(len(pts))}
    for func, on in facets:
        for i in on:
            normals_at[i].append(func[:-1])
    return [i for i in range(len(pts)) if normals_at[i] and la.rank(normals_at[i]) == k]


def triangulate_points(pts: Sequence[Point], order: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Pulling triangulation of a full-dimensional set of vertices.

    ``order`` ranks the points; the first point in that order is pulled first.
    Every point must be a vertex of the hull.
    """
    k = len(pts[0])
    idx = list(range(len(pts)))
    if order is None:
        order = idx
    rank_of = {p: r for r, p in enumerate(order)}
    if len(pts) == k + 1:
        return [tuple(sorted(idx, key=rank_of.__getitem__))]
    apex = min(idx, key=rank_of.__getitem__)
    cells = []
    for func, on in facets_of_points(pts):
        if apex in on:
            continue
        cells.extend((apex,) + cell for cell in _triangulate_face(func, on, pts, rank_of))
    return cells


def _triangulate_face(func: tuple, on: frozenset, pts: Sequence[Point], rank_of: dict) -> list[tuple[int, ...]]:
    members = sorted(on, key=rank_of.__getitem__)
    k = len(pts[0])
    if len(members) == k:
        return [tuple(members)]
    j = _drop_coordinate(func[:-1])
    sub = _project([pts[i] for i in members], j)
    local = triangulate_points(sub, list(range(len(sub))))
    return [tuple(members[i] for i in cell) for cell in local]


def simplex_volume(points: Sequence[Sequence[int]]) -> int:
    base = points[0]
    return abs(la.det([[a - b for a, b in zip(p, base)] for p in points[1:]]))


# ---------------------------------------------------------------------------
# LatticePolytope
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticePolytope:
    dim_ambient: int
    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple(tuple(int(x) for x in v) for v in self.vertices)
        if any(len(v) != self.dim_ambient for v in verts):
            raise GeometryError("vertex dimension mismatch")
        object.__setattr__(self, "vertices", verts)

    @cached_property
    def dim(self) -> int:
        """Affine dimension."""
        return affine_dimension(self.vertices)

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.dim_ambient

    @cached_property
    def facets(self) -> tuple[Facet, ...]:
        return tuple(facet_enumeration(self))

    def contains_origin_interior(self) -> bool:
        if not self.is_full_dimensional:
            return False
        return all(f.offset < 0 for f in self.facets)

    def contains(self, point: Sequence) -> bool:
        if not self.is_full_dimensional:
            raise GeometryError("not full-dimensional")
        return all(la.dot(f.normal, point) >= f.offset for f in self.facets)

    def to_json(self) -> dict:
        return {"dim": self.dim_ambient, "vertices": [list(v) for v in self.vertices]}

    @classmethod
    def from_json(cls, data: dict) -> "LatticePolytope":
        return convex_hull([tuple(v) for v in data["vertices"]], dim=int(data["dim"]))

    def __len__(self) -> int:
        return len(self.vertices)


def convex_hull(points: Iterable[Sequence[int]], dim: int | None = None) -> LatticePolytope:
    """Irredundant vertex description of conv(points)."""
    pts = []
    seen = set()
    for p in points:
        if any(Fraction(x).denominator != 1 for x in p):
            raise GeometryError("lattice points must have integer coordinates")
        t = tuple(int(x) for x in p)
        if t not in seen:
            seen.add(t)
            pts.append(t)
    if not pts:
        raise GeometryError("empty point set")
    if dim is None:
        dim = len(pts[0])
    if dim < 1:
        raise GeometryError("dimension must be positive")
    adim = affine_dimension(pts)
    if adim == 0:
        return LatticePolytope(dim, (pts[0],))
    chart = _AffineChart(pts)
    local = chart.coords
    if chart.k == 1:
        vals = [p[0] for p in local]
        keep = [vals.index(min(vals)), vals.index(max(vals))]
    else:
        found = facets_of_points(local)
        keep = vertex_indices_of(local, found)
    poly = LatticePolytope(dim, tuple(sorted(pts[i] for i in keep)))
    if chart.k == dim and chart.k > 1:
        # reuse the hull just computed instead of wrapping the vertices again
        where = {v: k for k, v in enumerate(poly.vertices)}
        facets = [
            Facet(tuple(func[:-1]), func[-1], tuple(sorted(where[pts[i]] for i in on if pts[i] in where)))
            for func, on in found
        ]
        facets.sort(key=lambda f: (f.vertex_indices, f.normal))
        poly.__dict__["facets"] = tuple(facets)
    return poly


class _AffineChart:
    """Integer coordinates on the affine hull of a point set.

    Uses a lattice basis of the saturated sublattice parallel to the affine
    hull, so normalized volumes in the chart are lattice-normalized volumes
    of the original (lower-dimensional) polytope.
    """

    def __init__(self, pts: Sequence[Point]):
        self.origin = pts[0]
        n = len(pts[0])
        diffs = [tuple(a - b for a, b in zip(p, self.origin)) for p in pts]
        nz = [d for d in diffs if any(d)]
        self.k = la.rank(nz) if nz else 0
        if self.k == n:
            self.basis = None
            self.coords = [tuple(p) for p in pts]
            return
        ortho = la.nullspace(nz, n) if nz else []
        self.basis = la.integer_kernel(ortho, n) if ortho else [
            tuple(int(i == j) for j in range(n)) for i in range(n)
        ]
        # B c = d with B the n x k basis matrix
        bmat = [[b[i] for b in self.basis] for i in range(n)]
        coords = []
        for d in diffs:
            sol = la.solve_rational(bmat, d)
            if sol is None or any(x.denominator != 1 for x in sol):
                raise GeometryError("lattice projection failed")  # pragma: no cover
            coords.append(tuple(int(x) for x in sol))
        self.coords = coords


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def facet_enumeration(poly: LatticePolytope) -> list[Facet]:
    if not poly.is_full_dimensional:
        raise GeometryError("not full-dimensional")
    if poly.dim_ambient == 0:
        return []
    out = []
    for func, on in facets_of_points(poly.vertices):
        out.append(Facet(tuple(func[:-1]), func[-1], tuple(sorted(on))))
    out.sort(key=lambda f: (f.vertex_indices, f.normal))
    return out


def facets_bruteforce(poly: LatticePolytope) -> list[Facet]:
    """Reference facet list by checking every affinely independent d-subset."""
    n = poly.dim_ambient
    verts = poly.vertices
    found = {}
    for combo in itertools.combinations(range(len(verts)), n):
        pts = [verts[i] for i in combo]
        if affine_dimension(pts) != n - 1:
            continue
        func = _functional_through(pts, n)
        vals = [_evaluate(func, v) for v in verts]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            func = tuple(-x for x in func)
            vals = [-v for v in vals]
        else:
            continue
        found[func] = tuple(i for i, v in enumerate(vals) if v == 0)
    return sorted(
        (Facet(tuple(f[:-1]), f[-1], on) for f, on in found.items()),
        key=lambda f: (f.vertex_indices, f.normal),
    )


def _order(poly: LatticePolytope, order: str) -> list[int]:
    idx = sorted(range(len(poly.vertices)), key=lambda i: poly.vertices[i])
    if order == "lex":
        return idx
    if order == "reverse":
        return idx[::-1]
    raise GeometryError(f"unknown ordering {order!r}")


def triangulation(poly: LatticePolytope, order: str = "lex") -> list[SimplicialCell]:
    """Pulling triangulation of a full-dimensional polytope (vertex indices)."""
    if not poly.is_full_dimensional:
        raise GeometryError("not full-dimensional")
    pts = poly.vertices
    cells = triangulate_points(pts, _order(poly, order))
    return [SimplicialCell(tuple(c), simplex_volume([pts[i] for i in c])) for c in cells]


def boundary_cone_triangulation(poly: LatticePolytope, order: str = "lex") -> list[SimplicialCell]:
    """Triangulate every facet and cone it at the origin.

    Cells list the vertex indices of the boundary simplex; the origin is the
    implicit apex.
    """
    if not poly.contains_origin_interior():
        raise GeometryError("origin not interior")
    pts = poly.vertices
    rank_of = {p: r for r, p in enumerate(_order(poly, order))}
    cells = []
    for f in poly.facets:
        func = f.normal + (f.offset,)
        for cell in _triangulate_face(func, frozenset(f.vertex_indices), pts, rank_of):
            vol = abs(la.det([pts[i] for i in cell]))
            cells.append(SimplicialCell(tuple(sorted(cell)), vol))
    return cells


def normalized_volume(poly: LatticePolytope, project: bool = False, order: str = "lex") -> int:
    """n! * vol_n, as an exact integer.

    Lower-dimensional polytopes need ``project=True``; the volume is then
    taken relative to the lattice in the affine span.
    """
    if not poly.is_full_dimensional:
        if not project:
            raise GeometryError("not full-dimensional")
        chart = _AffineChart(list(poly.vertices))
        if chart.k == 0:
            return 1
        local = LatticePolytope(chart.k, tuple(chart.coords))
        return normalized_volume(local, order=order)
    if poly.dim_ambient == 0:
        return 1
    if poly.contains_origin_interior():
        return sum(c.normalized_volume for c in boundary_cone_triangulation(poly, order))
    return sum(c.normalized_volume for c in triangulation(poly, order))


def _volume_or_zero(poly: LatticePolytope) -> int:
    return normalized_volume(poly) if poly.is_full_dimensional else 0


def facet_normalized_volume(poly: LatticePolytope, facet: Facet) -> int:
    """Lattice-normalized (d-1)-volume of a facet inside its own hyperplane."""
    verts = LatticePolytope(poly.dim_ambient, tuple(poly.vertices[i] for i in facet.vertex_indices))
    return normalized_volume(verts, project=True)


def lattice_distance(facet: Facet, point: Sequence[int]) -> int:
    return abs(la.dot(facet.normal, point) - facet.offset)


def _contains_origin(poly: LatticePolytope) -> bool:
    zero = (0,) * poly.dim_ambient
    if zero in poly.vertices:
        return True
    chart = _AffineChart(list(poly.vertices) + [zero])
    if chart.k != poly.dim:
        return False
    if chart.k == 0:
        return True
    local = chart.coords
    if chart.k == 1:
        vals = [p[0] for p in local[:-1]]
        return min(vals) <= local[-1][0] <= max(vals)
    inner = facets_of_points(local[:-1])
    return all(_evaluate(func, local[-1]) >= 0 for func, _ in inner)


def free_sum(p: LatticePolytope, q: LatticePolytope) -> LatticePolytope:
    """conv(P x {0} u {0} x Q)."""
    if not _contains_origin(p) or not _contains_origin(q):
        raise GeometryError("free sum requires both polytopes to contain the origin")
    zp, zq = (0,) * p.dim_ambient, (0,) * q.dim_ambient
    pts = [v + zq for v in p.vertices] + [zp + w for w in q.vertices]
    return convex_hull(pts, dim=p.dim_ambient + q.dim_ambient)


def is_reflexive(poly: LatticePolytope) -> bool:
    if not poly.contains_origin_interior():
        raise GeometryError("origin not interior")
    return all(f.offset == -1 for f in poly.facets)


def apply_unimodular(poly: LatticePolytope, umap: UnimodularMap) -> LatticePolytope:
    if umap.dim != poly.dim_ambient:
        raise GeometryError("dimension mismatch")
    return convex_hull([umap(v) for v in poly.vertices], dim=poly.dim_ambient)


def minkowski_sum(p: LatticePolytope, q: LatticePolytope) -> LatticePolytope:
    if p.dim_ambient != q.dim_ambient:
        raise GeometryError("dimension mismatch")
    pts = {tuple(a + b for a, b in zip(u, v)) for u in p.vertices for v in q.vertices}
    return convex_hull(sorted(pts), dim=p.dim_ambient)


def mixed_volume(polys: Sequence[LatticePolytope], limit: int = MIXED_VOLUME_LIMIT) -> int:
    """Mixed volume normalised so that MV(P, ..., P) = NVol(P).

    Inclusion-exclusion over all nonempty subsets of the summands.
    """
    n = len(polys)
    if n == 0:
        raise GeometryError("need at least one polytope")
    if n > limit:
        raise GeometryError("inclusion-exclusion too large")
    if any(p.dim_ambient != n for p in polys):
        raise GeometryError("mixed volume needs n polytopes in R^n")
    sums: dict[tuple[int, ...], LatticePolytope] = {}
    total = 0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            if size == 1:
                poly = polys[subset[0]]
            else:
                poly = minkowski_sum(sums[subset[:-1]], polys[subset[-1]])
            sums[subset] = poly
            total += (-1) ** (n - size) * _volume_or_zero(poly)
    if total % factorial(n):
        raise GeometryError("mixed volume is not an integer")  # pragma: no cover
    return total // factorial(n)


def face_in_direction(poly: LatticePolytope, v: Sequence) -> tuple[tuple[int, ...], Fraction]:
    """Vertices minimising <x, v> and the minimum value."""
    return argmin_face(poly.vertices, v)


def argmin_face(points: Sequence[Sequence[int]], v: Sequence) -> tuple[tuple[int, ...], Fraction]:
    vec = [Fraction(x) for x in v]
    if not any(vec):
        raise GeometryError("direction must be nonzero")
    vals = [la.dot(p, vec) for p in points]
    lo = min(vals)
    return tuple(i for i, x in enumerate(vals) if x == lo), Fraction(lo)


# ---------------------------------------------------------------------------
# named polytopes
# ---------------------------------------------------------------------------


def unit_vector(n: int, i: int, sign: int = 1) -> Point:
    return tuple(sign if j == i else 0 for j in range(n))


def simplex(n: int) -> LatticePolytope:
    return convex_hull([(0,) * n] + [unit_vector(n, i) for i in range(n)])


def cross_polytope(n: int) -> LatticePolytope:
    return convex_hull([unit_vector(n, i, s) for i in range(n) for s in (1, -1)])


def segment(lo: int, hi: int) -> LatticePolytope:
    return convex_hull([(lo,), (hi,)])
