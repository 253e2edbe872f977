"""Oscillator networks: validated instances, topology dispatch, tree bookkeeping."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .geometry import UnimodularMap

MIN_MAGNITUDE = 1e-3


class NetworkError(ValueError):
    pass


class Topology(str, Enum):
    TREE = "Tree"
    CYCLE = "Cycle"
    GENERAL = "General"


@dataclass(frozen=True)
class TopologyClass:
    tag: Topology
    N: int


@dataclass(frozen=True)
class OscillatorNetwork:
    """Weighted graph on vertices 0..N-1 with vertex 0 as the reference.

    ``weights[(i, j)]`` is the coefficient a'_ij of x_i/x_j in equation i; both
    directions of every edge are stored.  ``omega[i-1]`` is the constant of
    equation i.
    """

    n_plus_1: int
    edges: tuple[tuple[int, int], ...]
    weights: Mapping[tuple[int, int], complex]
    omega: tuple[complex, ...]
    name: str = ""
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        N = self.n_plus_1
        if N < 2:
            raise NetworkError("network needs at least 2 vertices")
        seen = set()
        edges = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise NetworkError(f"self-loop at vertex {i}")
            if not (0 <= i < N and 0 <= j < N):
                raise NetworkError(f"edge ({i},{j}) out of range for N={N}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise NetworkError(f"duplicate edge ({i},{j})")
            seen.add(key)
            edges.append((i, j))
        weights = {}
        for i, j in edges:
            for a, b in ((i, j), (j, i)):
                if (a, b) not in self.weights:
                    raise NetworkError(f"missing weight for ({a},{b})")
                w = complex(self.weights[(a, b)])
                if w == 0:
                    raise NetworkError(f"zero weight on edge ({a},{b})")
                weights[(a, b)] = w
        if len(self.omega) != N - 1:
            raise NetworkError(f"omega has length {len(self.omega)}, expected {N - 1}")
        adj: dict[int, list[int]] = {v: [] for v in range(N)}
        for i, j in edges:
            adj[i].append(j)
            adj[j].append(i)
        for v in adj:
            adj[v].sort()
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "omega", tuple(complex(w) for w in self.omega))
        object.__setattr__(self, "_adj", adj)

    @property
    def N(self) -> int:
        return self.n_plus_1

    @property
    def n(self) -> int:
        return self.n_plus_1 - 1

    def neighbors(self, v: int) -> list[int]:
        return list(self._adj[v])

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def weight(self, i: int, j: int) -> complex:
        return self.weights[(i, j)]

    @property
    def is_symmetric(self) -> bool:
        return all(self.weights[(i, j)] == self.weights[(j, i)] for i, j in self.edges)

    def is_connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.N

    def relabel(self, perm: Sequence[int]) -> "OscillatorNetwork":
        """Network with vertex ``v`` renamed ``perm[v]``; ``perm[0]`` must be 0."""
        if perm[0] != 0 or sorted(perm) != list(range(self.N)):
            raise NetworkError("relabelling must be a permutation fixing 0")
        edges = tuple((perm[i], perm[j]) for i, j in self.edges)
        weights = {(perm[i], perm[j]): w for (i, j), w in self.weights.items()}
        omega = [0j] * self.n
        for v in range(1, self.N):
            omega[perm[v] - 1] = self.omega[v - 1]
        return OscillatorNetwork(self.N, edges, weights, tuple(omega), self.name)

    def with_omega(self, omega: Sequence[complex]) -> "OscillatorNetwork":
        return OscillatorNetwork(self.N, self.edges, dict(self.weights), tuple(omega), self.name)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        edges = []
        for i, j in self.edges:
            a, b = self.weights[(i, j)], self.weights[(j, i)]
            entry = {"i": i, "j": j, "a_re": a.real, "a_im": a.imag}
            if a != b:
                entry.update({"a_ji_re": b.real, "a_ji_im": b.imag})
            edges.append(entry)
        out = {"N": self.N, "edges": edges, "omega": [[w.real, w.imag] for w in self.omega]}
        if self.name:
            out["name"] = self.name
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def network_from_json(data: dict) -> OscillatorNetwork:
    try:
        N = int(data["N"])
        edges = []
        weights = {}
        for e in data["edges"]:
            i, j = int(e["i"]), int(e["j"])
            a = complex(float(e["a_re"]), float(e.get("a_im", 0.0)))
            if "a_ji_re" in e or "a_ji_im" in e:
                b = complex(float(e.get("a_ji_re", 0.0)), float(e.get("a_ji_im", 0.0)))
            else:
                b = a
            edges.append((i, j))
            if (i, j) in weights or (j, i) in weights:
                if i == j:
                    raise NetworkError(f"self-loop at vertex {i}")
                raise NetworkError(f"duplicate edge ({i},{j})")
            weights[(i, j)] = a
            weights[(j, i)] = b
        omega = []
        for w in data["omega"]:
            if isinstance(w, (list, tuple)):
                omega.append(complex(float(w[0]), float(w[1])))
            else:
                omega.append(complex(float(w)))
    except (KeyError, TypeError, IndexError) as exc:
        raise NetworkError(f"malformed network JSON: {exc!r}") from exc
    return OscillatorNetwork(N, tuple(edges), weights, tuple(omega), str(data.get("name", "")))


def load_network(source: str) -> OscillatorNetwork:
    """Parse a network from a JSON string."""
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid JSON: {exc}") from exc
    return network_from_json(data)


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------


def classify(net: OscillatorNetwork) -> TopologyClass:
    if not net.is_connected():
        raise NetworkError("disconnected network")
    m = len(net.edges)
    if m == net.N - 1:
        return TopologyClass(Topology.TREE, net.N)
    if m == net.N and all(net.degree(v) == 2 for v in range(net.N)):
        return TopologyClass(Topology.CYCLE, net.N)
    return TopologyClass(Topology.GENERAL, net.N)


@dataclass(frozen=True)
class TreeStructure:
    """Rooted tree data, expressed in the relabelled vertex order.

    ``reindex_perm[v]`` is the new label of original vertex ``v``; in the new
    labels every parent precedes its children.  ``parent``, ``depth`` and
    ``descendants`` are indexed by new labels (entry 0 is the root).
    """

    parent: tuple[int, ...]
    depth: tuple[int, ...]
    descendants: tuple[frozenset, ...]
    reindex_perm: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.parent) - 1

    @property
    def inverse_perm(self) -> tuple[int, ...]:
        inv = [0] * len(self.reindex_perm)
        for v, w in enumerate(self.reindex_perm):
            inv[w] = v
        return tuple(inv)

    def ancestors(self, i: int) -> list[int]:
        """pi(i), pi^2(i), ... excluding the root."""
        out = []
        v = self.parent[i]
        while v != 0:
            out.append(v)
            v = self.parent[v]
        return out


def tree_structure(net: OscillatorNetwork) -> TreeStructure:
    if classify(net).tag is not Topology.TREE:
        raise NetworkError("tree_structure requires a tree network")
    # BFS from the root gives an order in which parents precede children
    order = [0]
    parent_orig = {0: -1}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in net.neighbors(v):
            if w not in parent_orig:
                parent_orig[w] = v
                order.append(w)
                queue.append(w)
    perm = [0] * net.N
    for new, v in enumerate(order):
        perm[v] = new
    parent = [-1] * net.N
    for v in order[1:]:
        parent[perm[v]] = perm[parent_orig[v]]
    depth = [0] * net.N
    for i in range(1, net.N):
        depth[i] = depth[parent[i]] + 1
    desc: list[set] = [set() for _ in range(net.N)]
    for i in range(net.N - 1, 0, -1):
        desc[parent[i]].add(i)
        desc[parent[i]].update(desc[i])
    return TreeStructure(tuple(parent), tuple(depth), tuple(frozenset(d) for d in desc), tuple(perm))


def tree_exponent_matrix(tree: TreeStructure) -> tuple[UnimodularMap, UnimodularMap]:
    """Exponent matrix of y -> x with x_i = y_i * prod_k y_{pi^k(i)}.

    Column i (1-based variable i) holds the exponent vector of x_i, so the
    matrix is upper triangular with unit diagonal.
    """
    n = tree.n
    mat = [[0] * n for _ in range(n)]
    for i in range(1, n + 1):
        mat[i - 1][i - 1] = 1
        for a in tree.ancestors(i):
            mat[a - 1][i - 1] = 1
    umap = UnimodularMap(tuple(map(tuple, mat)))
    return umap, umap.inverse()


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _draw_complex(rng: np.random.Generator) -> complex:
    while True:
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if abs(z) >= MIN_MAGNITUDE:
            return z


def _draw_positive(rng: np.random.Generator) -> float:
    while True:
        a = rng.uniform(0, 1)
        if a >= MIN_MAGNITUDE:
            return float(a)


def topology_edges(topology: str, N: int, rng: np.random.Generator | None = None) -> list[tuple[int, int]]:
    if topology == "path":
        return [(i, i + 1) for i in range(N - 1)]
    if topology == "star":
        return [(0, i) for i in range(1, N)]
    if topology == "cycle":
        if N < 3:
            raise NetworkError("cycle needs N >= 3")
        return [(i, i + 1) for i in range(N - 1)] + [(N - 1, 0)]
    if topology == "random-tree":
        assert rng is not None
        # random recursive tree, then shuffled labels (vertex 0 stays the root)
        parents = [int(rng.integers(0, v)) for v in range(1, N)]
        labels = [0] + [int(x) + 1 for x in rng.permutation(N - 1)]
        return [(labels[p], labels[v]) for v, p in zip(range(1, N), parents)]
    raise NetworkError(f"unknown topology {topology!r}")


def generate(
    topology: str,
    N: int,
    seed: int = 0,
    mode: str = "complex",
    omega_scale: float = 1.0,
    omega: Sequence[complex] | None = None,
) -> OscillatorNetwork:
    """Deterministic random instance.

    ``mode="complex"`` draws a'_ij (and a'_ji independently) and omega as
    generic complex numbers.  ``mode="symmetric-real"`` draws physical
    couplings a_ij = a_ji > 0 and real omega; stored weights are then
    a'_ij = a_ij / 2i.
    """
    if N < 2:
        raise NetworkError("N must be at least 2")
    if mode not in ("complex", "symmetric-real"):
        raise NetworkError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    edges = topology_edges(topology, N, rng)
    weights = {}
    for i, j in edges:
        if mode == "complex":
            weights[(i, j)] = _draw_complex(rng)
            weights[(j, i)] = _draw_complex(rng)
        else:
            a = _draw_positive(rng)
            weights[(i, j)] = weights[(j, i)] = a / 2j
    if omega is None:
        if mode == "complex":
            omega = [omega_scale * _draw_complex(rng) for _ in range(N - 1)]
        else:
            omega = [complex(omega_scale * rng.uniform(-1, 1)) for _ in range(N - 1)]
    name = f"{topology}-{N}-{mode}-seed{seed}"
    return OscillatorNetwork(N, tuple(edges), weights, tuple(omega), name)


def physical_coupling(net: OscillatorNetwork, i: int, j: int) -> complex:
    """a_ij = 2i * a'_ij."""
    return 2j * net.weight(i, j)
