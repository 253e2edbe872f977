"""Cycle graphs: the polytope P_N and its facet census."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

from . import geometry as geo
from .system import cycle_formula


def pn_polytope(N: int) -> geo.LatticePolytope:
    """conv{+-e_1, ..., +-e_n, +-(e_1 + ... + e_n)} with n = N - 1."""
    if N < 3:
        raise ValueError("P_N needs N >= 3")
    n = N - 1
    pts = [geo.unit_vector(n, i, s) for i in range(n) for s in (1, -1)]
    pts += [(1,) * n, (-1,) * n]
    return geo.convex_hull(pts, dim=n)


def cycle_map(n: int) -> geo.UnimodularMap:
    """Lower-triangular all-ones matrix; it sends the cycle adjacency polytope to P_N."""
    return geo.UnimodularMap(tuple(tuple(int(j <= i) for j in range(n)) for i in range(n)))


def sign_patterns(n: int) -> list[tuple[int, ...]]:
    """Sequences in {-1, 1}^n whose entries sum to 1."""
    return [lam for lam in itertools.product((-1, 1), repeat=n) if sum(lam) == 1]


def pattern_facet_vertices(lam: tuple[int, ...], sign: int = 1) -> frozenset:
    """Vertex set of sign * conv{lam_1 e_1, ..., lam_n e_n, e_1 + ... + e_n}."""
    n = len(lam)
    pts = [geo.unit_vector(n, i, sign * lam[i]) for i in range(n)]
    pts.append((sign,) * n)
    return frozenset(pts)


@dataclass
class FacetCensus:
    N: int
    facet_count: int
    facet_volumes: list[int]
    total: int
    normalized_volume: int
    expected_count: int
    simplicial: bool
    all_unimodular: bool
    pattern_check: bool | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        checks = [
            self.facet_count == self.expected_count,
            self.total == self.normalized_volume == cycle_formula(self.N),
        ]
        if self.N % 2:
            checks += [self.simplicial, self.all_unimodular]
        else:
            checks += [self.pattern_check is True, set(self.facet_volumes) == {self.N // 2}]
        return all(checks)

    def to_json(self) -> dict:
        vols = sorted(set(self.facet_volumes))
        return {
            "N": self.N,
            "facets": self.facet_count,
            "expected_facets": self.expected_count,
            "facet_nvol": vols[0] if len(vols) == 1 else vols,
            "total": self.total,
            "nvol": self.normalized_volume,
            "simplicial": self.simplicial,
            "all_unimodular": self.all_unimodular,
            "sign_pattern_check": self.pattern_check,
            "ok": self.ok,
        }


def expected_facet_count(N: int) -> int:
    if N % 2:
        return N * comb(N - 1, (N - 1) // 2)
    return 2 * comb(N - 1, N // 2 - 1)


def cycle_facet_family(N: int) -> FacetCensus:
    """Count facets of P_N, measure each one, and check the even-N description."""
    poly = pn_polytope(N)
    n = N - 1
    facets = poly.facets
    vols = [geo.facet_normalized_volume(poly, f) for f in facets]
    # origin is at lattice distance |offset| from each facet
    total = sum(v * geo.lattice_distance(f, (0,) * n) for v, f in zip(vols, facets))
    simplicial = all(len(f.vertex_indices) == n for f in facets)
    census = FacetCensus(
        N=N,
        facet_count=len(facets),
        facet_volumes=vols,
        total=total,
        normalized_volume=geo.normalized_volume(poly),
        expected_count=expected_facet_count(N),
        simplicial=simplicial,
        all_unimodular=all(v == 1 for v in vols),
    )
    if N % 2 == 0:
        actual = {frozenset(poly.vertices[i] for i in f.vertex_indices) for f in facets}
        predicted = {pattern_facet_vertices(lam, s) for lam in sign_patterns(n) for s in (1, -1)}
        census.pattern_check = actual == predicted
        if not census.pattern_check:
            census.notes.append(f"{len(actual ^ predicted)} facets differ from the sign-pattern list")
    return census
