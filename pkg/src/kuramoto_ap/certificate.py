"""Finite certificates about initial systems.

Directions v are grouped into cones of the common refinement of the normal
fans of the supports: inside one (relatively open) cone every equation has the
same minimal face, hence the same initial system.  ``enumerate_cones`` walks
the equations depth first, choosing one candidate face per equation and
keeping the partial choice only while some direction realises it.  The search
uses a floating point LP to propose a direction; every reported direction is
then verified in exact rational arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import intlinalg as la
from .network import OscillatorNetwork, Topology, classify
from .system import Exponent, support_family

CERTIFICATE_LIMIT = 8
FULL_FAN_MAX_N = 4
_SLACK_TOL = 1e-7


class CertificateError(ValueError):
    pass


def _face_constraints(support: Sequence[Exponent], face: Sequence[Exponent]) -> tuple[list, list]:
    """Rows E (E v = 0) and G (G v > 0) saying argmin_v(support) == face."""
    anchor = face[0]
    eq = [tuple(a - b for a, b in zip(p, anchor)) for p in face[1:]]
    face_set = set(face)
    gt = [tuple(a - b for a, b in zip(p, anchor)) for p in support if p not in face_set]
    return eq, gt


def find_direction(eq_rows: list, gt_rows: list, n: int) -> tuple[Fraction, ...] | None:
    """A nonzero rational v with E v = 0 and G v > 0, or None.

    The answer, when not None, has been checked exactly.
    """
    eq_rows = [r for r in eq_rows if any(r)]
    basis = la.nullspace(eq_rows, n) if eq_rows else [tuple(int(i == j) for j in range(n)) for i in range(n)]
    if not basis:
        return None
    if not gt_rows:
        return tuple(Fraction(x) for x in basis[0])
    if any(not any(r) for r in gt_rows):
        return None
    bmat = np.array(basis, dtype=float).T  # n x r
    g = np.array(gt_rows, dtype=float) @ bmat  # m x r
    r = bmat.shape[1]
    # maximise s subject to g c >= s, |c| <= 1, s <= 1
    cost = np.zeros(r + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-g, np.ones((g.shape[0], 1))])
    b_ub = np.zeros(g.shape[0])
    bounds = [(-1, 1)] * r + [(None, 1)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= _SLACK_TOL:
        return None
    coeffs = res.x[:r]
    for limit in (10**3, 10**6, 10**9, None):
        c = [Fraction(float(x)) if limit is None else Fraction(float(x)).limit_denominator(limit) for x in coeffs]
        v = [sum(ci * b[k] for ci, b in zip(c, basis)) for k in range(n)]
        if all(la.dot(row, v) > 0 for row in gt_rows):
            return tuple(Fraction(x) for x in la.integerize(v))
    return None  # pragma: no cover


def candidate_faces(support: Sequence[Exponent], min_size: int = 1) -> list[tuple[Exponent, ...]]:
    """All subsets of ``support`` that are the v-minimal set for some nonzero v."""
    n = len(support[0])
    out = []
    for size in range(min_size, len(support) + 1):
        for face in combinations(support, size):
            eq, gt = _face_constraints(support, face)
            if find_direction(eq, gt, n) is not None:
                out.append(face)
    return out


@dataclass(frozen=True)
class Cone:
    direction: tuple[Fraction, ...]
    faces: tuple[tuple[Exponent, ...], ...]


def enumerate_cones(supports: Sequence[Sequence[Exponent]], min_face_size: int = 1) -> list[Cone]:
    """One representative direction per cone of the refined normal fan.

    With ``min_face_size=2`` only cones on which no equation reduces to a
    single monomial are listed.
    """
    n = len(supports[0][0])
    supports = [sorted(set(s)) for s in supports]
    options = [candidate_faces(s, min_face_size) for s in supports]
    cones: list[Cone] = []

    def walk(k: int, chosen: list, eq_rows: list, gt_rows: list, v):
        if k == len(supports):
            cones.append(Cone(v, tuple(chosen)))
            return
        for face in options[k]:
            eq, gt = _face_constraints(supports[k], face)
            v_new = find_direction(eq_rows + eq, gt_rows + gt, n)
            if v_new is not None:
                walk(k + 1, chosen + [face], eq_rows + eq, gt_rows + gt, v_new)

    walk(0, [], [], [], None)
    cones.sort(key=lambda c: c.direction)
    return cones


def opposite_pairs(face: Sequence[Exponent]) -> list[Exponent]:
    """Nonzero exponents a (one per pair) with both a and -a in ``face``."""
    members = set(face)
    out = []
    for a in sorted(members):
        neg = tuple(-x for x in a)
        if any(a) and neg in members and a > neg:
            out.append(a)
    return out


@dataclass
class DirectionReport:
    direction: tuple[Fraction, ...]
    faces: tuple[tuple[Exponent, ...], ...]
    offending: list[tuple[int, Exponent]]

    def to_json(self) -> dict:
        return {
            "v": [int(x) if x.denominator == 1 else str(x) for x in self.direction],
            "faces": [[list(p) for p in f] for f in self.faces],
            "offending": [{"equation": k + 1, "exponent": list(a)} for k, a in self.offending],
        }


@dataclass
class IndependenceCertificate:
    label: str
    reports: list[DirectionReport] = field(default_factory=list)
    mode: str = "non-monomial"

    @property
    def passed(self) -> bool:
        return all(not r.offending for r in self.reports)

    @property
    def failures(self) -> list[DirectionReport]:
        return [r for r in self.reports if r.offending]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "pass": self.passed,
            "mode": self.mode,
            "directions_checked": len(self.reports),
            "failures": len(self.failures),
            "trace": [r.to_json() for r in self.reports],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def certify_supports(supports: Sequence[Sequence[Exponent]], label: str = "", all_cones: bool = False) -> IndependenceCertificate:
    """Check that no initial system pairs x^a with x^-a inside one equation.

    Cones where some equation's initial form is a single monomial are skipped
    by default: such an initial system has no root in the torus whatever the
    coefficients are.  ``all_cones=True`` reports every cone anyway.
    """
    cones = enumerate_cones(supports, min_face_size=1 if all_cones else 2)
    cert = IndependenceCertificate(label, mode="all" if all_cones else "non-monomial")
    for cone in cones:
        offending = []
        if not all_cones or all(len(f) > 1 for f in cone.faces):
            for k, face in enumerate(cone.faces):
                offending.extend((k, a) for a in opposite_pairs(face))
        cert.reports.append(DirectionReport(cone.direction, cone.faces, offending))
    return cert


def independence_certificate(
    net: OscillatorNetwork, limit: int = CERTIFICATE_LIMIT, all_cones: bool | None = None
) -> IndependenceCertificate:
    """Certificate for a cycle network; small cycles get the full fan by default."""
    tc = classify(net)
    if tc.tag is not Topology.CYCLE:
        raise CertificateError("independence certificate is only defined for cycle networks")
    if net.N > limit:
        raise CertificateError(f"N={net.N} exceeds the enumeration limit {limit}")
    if all_cones is None:
        all_cones = net.N <= FULL_FAN_MAX_N
    return certify_supports(support_family(net), label=f"C_{net.N}", all_cones=all_cones)


def corrupted_fixture() -> list[list[Exponent]]:
    """Negative control: a 3-vertex cycle whose equations lost their edges to vertex 0.

    Both equations keep only {1, x1/x2, x2/x1}, so the direction (1, 1) leaves
    an opposite pair inside a single initial equation.
    """
    pts = [(0, 0), (1, -1), (-1, 1)]
    return [sorted(pts), sorted(pts)]
