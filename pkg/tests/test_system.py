from fractions import Fraction
from math import comb

import numpy as np
import pytest

from kuramoto_ap import geometry as geo
from kuramoto_ap.network import NetworkError, OscillatorNetwork, generate
from kuramoto_ap.system import (
    APBound,
    LaurentSystem,
    adjacency_polytope,
    ap_bound,
    baseline_bound,
    build_system,
    cycle_formula,
    initial_system,
    monomial_map,
    support_family,
    toric_substitution,
    tree_formula,
    tree_reduce,
    tree_transform,
)


def direct_residual(net, x):
    """Evaluate omega_i - sum_j a'_ij (x_i/x_j - x_j/x_i) straight from the network."""
    xs = np.concatenate([[1.0], x])
    return np.array([
        net.omega[i - 1] - sum(net.weight(i, j) * (xs[i] / xs[j] - xs[j] / xs[i]) for j in net.neighbors(i))
        for i in range(1, net.N)
    ])


def torus_points(rng, n, k):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, size=(k, n)))


@pytest.mark.parametrize("topo", ["path", "star", "cycle", "random-tree"])
def test_build_system_matches_direct_formula(topo):
    net = generate(topo, 5, seed=4)
    F = build_system(net)
    rng = np.random.default_rng(0)
    for x in rng.normal(size=(10, 4)) + 1j * rng.normal(size=(10, 4)):
        assert np.allclose(F(x), direct_residual(net, x), atol=1e-12)


def test_supports_contain_origin_and_are_symmetric():
    for topo in ("path", "cycle", "star"):
        net = generate(topo, 6, seed=1)
        for i, s in enumerate(support_family(net), start=1):
            assert (0,) * 5 in s
            assert len(s) == 1 + 2 * net.degree(i)
            assert {tuple(-x for x in p) for p in s} == set(s)


def test_laurent_json_round_trip():
    F = build_system(generate("cycle", 4, seed=2))
    G = LaurentSystem.from_json(F.to_json())
    assert G.supports() == F.supports()
    x = np.array([0.3 + 1j, -1.2, 2j])
    assert np.allclose(F(x), G(x))


def test_closed_forms():
    assert [cycle_formula(N) for N in range(3, 9)] == [6, 12, 30, 60, 140, 280]
    assert [tree_formula(N) for N in range(2, 6)] == [2, 4, 8, 16]
    assert baseline_bound(10) == comb(18, 9) == 48620
    with pytest.raises(ValueError):
        cycle_formula(2)


def test_ap_bound_methods():
    net = generate("cycle", 5)
    b = ap_bound(net, "both")
    assert isinstance(b, APBound) and b.value == 30 and b.agree
    assert ap_bound(net, "triangulation").value == 30
    assert ap_bound(net, "formula").to_json()["ap_bound"] == 30
    edges = ((0, 1), (1, 2), (2, 0), (2, 3), (3, 0))
    w = {}
    for i, j in edges:
        w[(i, j)] = w[(j, i)] = 1.0
    general = OscillatorNetwork(4, edges, w, (0,) * 3)
    with pytest.raises(NetworkError, match="no closed form"):
        ap_bound(general, "formula")
    # auto falls back to triangulation; the value is bounded by C(6, 3)
    assert 12 <= ap_bound(general).value <= baseline_bound(4)


def test_adjacency_polytope_is_centrally_symmetric():
    poly = adjacency_polytope(generate("cycle", 6))
    assert set(poly.vertices) == {tuple(-x for x in v) for v in poly.vertices}
    assert poly.contains_origin_interior()


@pytest.mark.parametrize("seed", range(20))
def test_tree_reduction_is_an_invertible_recombination(seed):
    N = 2 + seed % 6
    net = generate("random-tree", N, seed=seed)
    rel, tree, _ = tree_transform(net)
    F = build_system(rel)
    R, omega_star = tree_reduce(F, tree)
    pts = torus_points(np.random.default_rng(seed), N - 1, 100)
    fv = np.array([F(x) for x in pts])
    rv = np.array([R(x) for x in pts])
    # rv = fv T^t for one constant matrix T
    T, *_ = np.linalg.lstsq(fv, rv, rcond=None)
    assert np.allclose(fv @ T, rv, atol=1e-10)
    assert abs(np.linalg.det(T)) > 1e-8
    # each reduced equation couples a vertex only with its parent
    n = N - 1
    for i, f in enumerate(R.equations, start=1):
        p = tree.parent[i]
        allowed = {(0,) * n}
        ev = [0] * n
        ev[i - 1] += 1
        if p:
            ev[p - 1] -= 1
        allowed |= {tuple(ev), tuple(-x for x in ev)}
        assert set(f.terms) <= allowed
        assert f.constant() == omega_star[i - 1]


@pytest.mark.parametrize("seed", range(10))
def test_toric_substitution_commutes_with_evaluation(seed):
    net = generate("random-tree", 6, seed=seed)
    rel, tree, umap = tree_transform(net)
    F = build_system(rel)
    G = toric_substitution(F, umap)
    rng = np.random.default_rng(seed)
    for y in rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)):
        assert np.allclose(G(y), F(monomial_map(umap, y)), rtol=1e-10, atol=1e-10)
    # reduced and substituted equations are univariate quadratics in y_i
    Y = toric_substitution(tree_reduce(F, tree)[0], umap)
    for i, f in enumerate(Y.equations):
        for e in f.terms:
            assert all(e[k] == 0 for k in range(5) if k != i)


def test_initial_system():
    net = generate("cycle", 4, seed=0)
    F = build_system(net)
    init = initial_system(F, (0, 0, 1))
    assert init.has_monomial_equation
    assert init.heights[2] == Fraction(-1)
    # v = (1, 0, -1): equation 1 has support {0, +-e1, +-(e1 - e2)}, minimised at -e1 and e2 - e1
    init = initial_system(F, (1, 0, -1))
    assert set(init.faces[0]) == {(-1, 0, 0), (-1, 1, 0)}
    assert init.heights[0] == -1
    with pytest.raises(ValueError):
        initial_system(F, (0, 0, 0))


def test_unimodular_image_of_cycle_polytope():
    from kuramoto_ap.cycles import cycle_map, pn_polytope

    for N in range(3, 7):
        image = geo.apply_unimodular(adjacency_polytope(generate("cycle", N)), cycle_map(N - 1))
        assert set(image.vertices) == set(pn_polytope(N).vertices)
