import itertools
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from kuramoto_ap import geometry as geo
from kuramoto_ap import intlinalg as la


def qhull_nvol(poly):
    """Floating point oracle: n! * Euclidean volume from Qhull."""
    pts = np.array(poly.vertices, dtype=float)
    return ConvexHull(pts).volume * factorial(poly.dim_ambient)


def qhull_facet_count(poly):
    hull = ConvexHull(np.array(poly.vertices, dtype=float))
    eqs = np.round(hull.equations / np.abs(hull.equations[:, :-1]).max(axis=1, keepdims=True), 9)
    return len({tuple(e) for e in eqs})


full_dim_points = st.integers(2, 4).flatmap(
    lambda d: st.lists(st.tuples(*[st.integers(-3, 3)] * d), min_size=d + 1, max_size=d + 6, unique=True)
).filter(lambda pts: geo.affine_dimension(pts) == len(pts[0]))


# -- named polytopes --------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 8))
def test_cross_polytope_volume(n):
    assert geo.normalized_volume(geo.cross_polytope(n)) == 2**n


@pytest.mark.parametrize("n", range(1, 7))
def test_standard_simplex_is_unimodular(n):
    assert geo.normalized_volume(geo.simplex(n)) == 1


def test_unit_square_drops_interior_points():
    pts = [(0, 0), (1, 0), (0, 1), (1, 1), (1, 1), (0, 0)]
    sq = geo.convex_hull(pts + [(0, 0)])
    assert len(sq) == 4
    assert geo.normalized_volume(sq) == 2
    mid = geo.convex_hull([(0, 0), (2, 0), (0, 2), (2, 2), (1, 1), (1, 0)])
    assert (1, 1) not in mid.vertices and (1, 0) not in mid.vertices


def test_errors():
    with pytest.raises(geo.GeometryError, match="empty point set"):
        geo.convex_hull([])
    with pytest.raises(geo.GeometryError):
        geo.convex_hull([(0.5, 1)])
    seg = geo.convex_hull([(0, 0), (1, 1)])
    with pytest.raises(geo.GeometryError, match="not full-dimensional"):
        geo.normalized_volume(seg)
    assert geo.normalized_volume(seg, project=True) == 1
    with pytest.raises(geo.GeometryError, match="origin not interior"):
        geo.boundary_cone_triangulation(geo.simplex(2))
    with pytest.raises(geo.GeometryError, match="inclusion-exclusion too large"):
        geo.mixed_volume([geo.cross_polytope(8)] * 8)
    with pytest.raises(geo.GeometryError):
        geo.argmin_face([(0, 0)], (0, 0))
    with pytest.raises(ValueError):
        geo.UnimodularMap(((2, 0), (0, 1)))


def test_lower_dimensional_lattice_volume():
    # segment from 0 to (2, 2) holds 3 lattice points, so lattice length 2
    assert geo.normalized_volume(geo.convex_hull([(0, 0), (2, 2)]), project=True) == 2
    tri = geo.convex_hull([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert tri.dim == 2
    assert geo.normalized_volume(tri, project=True) == 1
    assert geo.normalized_volume(geo.convex_hull([(3, 4)]), project=True) == 1


def test_reflexive_and_free_sum():
    c2 = geo.cross_polytope(2)
    assert geo.is_reflexive(c2)
    assert geo.is_reflexive(geo.convex_hull([(-1, -1), (2, -1), (-1, 2)]))
    assert not geo.is_reflexive(geo.convex_hull([(-2, 0), (2, 0), (0, -2), (0, 2)]))
    seg = geo.segment(-1, 1)
    assert geo.free_sum(seg, seg).vertices == c2.vertices


def test_facet_json_round_trip():
    poly = geo.cross_polytope(3)
    for f in poly.facets:
        assert geo.Facet.from_json(f.to_json()) == f
    again = geo.LatticePolytope.from_json(poly.to_json())
    assert again.vertices == poly.vertices


def test_facet_volumes_of_cross_polytope():
    poly = geo.cross_polytope(4)
    assert len(poly.facets) == 16
    assert all(geo.facet_normalized_volume(poly, f) == 1 for f in poly.facets)
    assert all(geo.lattice_distance(f, (0, 0, 0, 0)) == 1 for f in poly.facets)


def test_face_in_direction():
    poly = geo.cross_polytope(2)
    idx, h = geo.face_in_direction(poly, (1, 1))
    assert {poly.vertices[i] for i in idx} == {(-1, 0), (0, -1)}
    assert h == Fraction(-1)


# -- properties ---------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(full_dim_points)
def test_facets_match_bruteforce(pts):
    poly = geo.convex_hull(pts)
    fast = sorted((f.normal, f.offset, f.vertex_indices) for f in poly.facets)
    slow = sorted((f.normal, f.offset, f.vertex_indices) for f in geo.facets_bruteforce(poly))
    assert fast == slow
    assert len(fast) == qhull_facet_count(poly)


@settings(max_examples=60, deadline=None)
@given(full_dim_points)
def test_hull_keeps_exactly_the_vertices(pts):
    poly = geo.convex_hull(pts)
    hull = ConvexHull(np.array(pts, dtype=float))
    assert set(poly.vertices) == {pts[i] for i in hull.vertices}
    for p in pts:
        assert poly.contains(p)


@settings(max_examples=60, deadline=None)
@given(full_dim_points)
def test_volume_matches_qhull_and_is_order_independent(pts):
    poly = geo.convex_hull(pts)
    lex = geo.normalized_volume(poly, order="lex")
    rev = geo.normalized_volume(poly, order="reverse")
    assert lex == rev
    assert abs(lex - qhull_nvol(poly)) < 1e-6
    # pulling triangulation and the origin cone agree when both apply
    assert sum(c.normalized_volume for c in geo.triangulation(poly)) == lex


def _unimodular_matrices(n):
    return st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(-2, 2)), max_size=6).map(
        lambda ops: _compose_elementary(n, ops)
    )


def _compose_elementary(n, ops):
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for i, j, c in ops:
        if i != j:
            m[i] = [a + c * b for a, b in zip(m[i], m[j])]
    return tuple(map(tuple, m))


@settings(max_examples=40, deadline=None)
@given(full_dim_points.flatmap(lambda pts: st.tuples(st.just(pts), _unimodular_matrices(len(pts[0])))))
def test_unimodular_invariance(args):
    pts, mat = args
    umap = geo.UnimodularMap(mat)
    poly = geo.convex_hull(pts)
    image = geo.apply_unimodular(poly, umap)
    assert geo.normalized_volume(image) == geo.normalized_volume(poly)
    assert len(image.facets) == len(poly.facets)
    assert umap.inverse().compose(umap) == geo.UnimodularMap.identity(len(pts[0]))


small_reflexive = st.sampled_from(
    [geo.cross_polytope(1), geo.cross_polytope(2), geo.convex_hull([(-1, -1), (1, 0), (0, 1)]),
     geo.convex_hull([(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)])]
)


@settings(max_examples=20, deadline=None)
@given(small_reflexive, small_reflexive)
def test_free_sum_volume_factorizes(p, q):
    s = geo.free_sum(p, q)
    assert geo.normalized_volume(s) == geo.normalized_volume(p) * geo.normalized_volume(q)
    assert geo.is_reflexive(s)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=3, max_size=5, unique=True)
       .filter(lambda p: geo.affine_dimension(p) == 2),
       st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=3, max_size=5, unique=True)
       .filter(lambda p: geo.affine_dimension(p) == 2))
def test_mixed_volume_symmetry_and_diagonal(a, b):
    p, q = geo.convex_hull(a), geo.convex_hull(b)
    assert geo.mixed_volume([p, q]) == geo.mixed_volume([q, p])
    assert geo.mixed_volume([p, p]) == geo.normalized_volume(p)
    # MV(P, Q) = area(P+Q) - area(P) - area(Q) in Euclidean units
    euclid = (geo.normalized_volume(geo.minkowski_sum(p, q)) - geo.normalized_volume(p) - geo.normalized_volume(q)) / 2
    assert geo.mixed_volume([p, q]) == euclid


def test_mixed_volume_of_segments_is_determinant():
    # MV of n segments [0, v_i] is |det(v_1..v_n)|
    vs = [(1, 2, 0), (0, 1, 3), (2, 0, 1)]
    polys = [geo.convex_hull([(0, 0, 0), v]) for v in vs]
    assert geo.mixed_volume(polys) == abs(la.det(vs)) == 13


# -- integer linear algebra -----------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_numpy(rows):
    assert la.det(rows) == round(np.linalg.det(np.array(rows, dtype=float)))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=n - 1)))
def test_nullspace_and_kernel(rows):
    n = len(rows[0])
    ns = la.nullspace(rows, n)
    assert len(ns) == n - la.rank(rows) == n - np.linalg.matrix_rank(np.array(rows))
    for v in ns:
        assert all(la.dot(r, v) == 0 for r in rows)
    ker = la.integer_kernel(rows, n)
    for v in ker:
        assert all(la.dot(r, v) == 0 for r in rows)
    # a saturated basis extends to a unimodular matrix, so its maximal minors have gcd 1
    if ker:
        minors = [la.det([[v[i] for v in ker] for i in idx]) for idx in itertools.combinations(range(n), len(ker))]
        assert np.gcd.reduce([abs(m) for m in minors]) == 1


def test_solve_rational_and_inverse():
    a = [[2, 1], [1, 1]]
    assert la.solve_rational(a, [3, 2]) == [1, 1]
    assert la.solve_rational([[1, 1], [1, 1]], [1, 2]) is None
    inv = la.inverse_unimodular(a)
    assert [list(r) for r in la.matmul(a, inv)] == [[1, 0], [0, 1]]
