import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuramoto_ap.network import (
    NetworkError,
    OscillatorNetwork,
    Topology,
    classify,
    generate,
    load_network,
    physical_coupling,
    topology_edges,
    tree_exponent_matrix,
    tree_structure,
)


def _path(N=3):
    edges = tuple((i, i + 1) for i in range(N - 1))
    w = {}
    for i, j in edges:
        w[(i, j)] = w[(j, i)] = 1.0
    return OscillatorNetwork(N, edges, w, (0j,) * (N - 1))


def test_validation_errors():
    w = {(0, 1): 1, (1, 0): 1}
    with pytest.raises(NetworkError):
        OscillatorNetwork(2, ((0, 0),), {(0, 0): 1}, (0,))
    with pytest.raises(NetworkError):
        OscillatorNetwork(2, ((0, 2),), {(0, 2): 1, (2, 0): 1}, (0,))
    with pytest.raises(NetworkError):
        OscillatorNetwork(2, ((0, 1), (1, 0)), w, (0,))
    with pytest.raises(NetworkError):
        OscillatorNetwork(2, ((0, 1),), {(0, 1): 0, (1, 0): 1}, (0,))
    with pytest.raises(NetworkError):
        OscillatorNetwork(2, ((0, 1),), w, (0, 0))
    with pytest.raises(NetworkError):
        generate("cycle", 2)
    with pytest.raises(NetworkError):
        generate("path", 1)


def test_classify():
    assert classify(generate("path", 5)).tag is Topology.TREE
    assert classify(generate("star", 5)).tag is Topology.TREE
    assert classify(generate("cycle", 5)).tag is Topology.CYCLE
    edges = ((0, 1), (1, 2), (2, 0), (2, 3), (3, 0))
    w = {}
    for i, j in edges:
        w[(i, j)] = w[(j, i)] = 1.0
    assert classify(OscillatorNetwork(4, edges, w, (0,) * 3)).tag is Topology.GENERAL
    disc = OscillatorNetwork(4, ((0, 1), (2, 3)), {(0, 1): 1, (1, 0): 1, (2, 3): 1, (3, 2): 1}, (0,) * 3)
    with pytest.raises(NetworkError, match="disconnected"):
        classify(disc)


@pytest.mark.parametrize("topo", ["path", "star", "cycle", "random-tree"])
@pytest.mark.parametrize("mode", ["complex", "symmetric-real"])
def test_json_round_trip_and_determinism(topo, mode):
    net = generate(topo, 6, seed=11, mode=mode)
    again = load_network(net.dumps())
    assert again.dumps() == net.dumps()
    assert generate(topo, 6, seed=11, mode=mode).dumps() == net.dumps()
    assert json.loads(net.dumps())["N"] == 6


def test_symmetric_real_weights():
    net = generate("cycle", 5, seed=3, mode="symmetric-real")
    assert net.is_symmetric
    for i, j in net.edges:
        a = physical_coupling(net, i, j)
        assert abs(a.imag) < 1e-15 and 1e-3 <= a.real <= 1
    assert all(w.imag == 0 for w in net.omega)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 10**6))
def test_random_tree_structure(N, seed):
    edges = topology_edges("random-tree", N, np.random.default_rng(seed))
    assert len(edges) == N - 1
    net = generate("random-tree", N, seed=seed)
    tree = tree_structure(net)
    assert all(tree.parent[i] < i for i in range(1, N))
    assert sorted(tree.reindex_perm) == list(range(N)) and tree.reindex_perm[0] == 0
    relabelled = net.relabel(tree.reindex_perm)
    for i in range(1, N):
        assert tree.parent[i] in relabelled.neighbors(i)
    umap, inv = tree_exponent_matrix(tree)
    assert umap.compose(inv).matrix == tuple(tuple(int(i == j) for j in range(N - 1)) for i in range(N - 1))


def test_relabel_keeps_weights():
    net = generate("random-tree", 6, seed=5)
    perm = tree_structure(net).reindex_perm
    rel = net.relabel(perm)
    for (i, j), w in net.weights.items():
        assert rel.weight(perm[i], perm[j]) == w
    for v in range(1, 6):
        assert rel.omega[perm[v] - 1] == net.omega[v - 1]


def test_with_omega_and_path_helpers():
    net = _path(4).with_omega([1, 2, 3])
    assert net.omega == (1, 2, 3)
    assert net.degree(1) == 2 and net.neighbors(0) == [1]
