"""C*-solution sets: closed-form tree solver, homotopy driver, torus classification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .homotopy import TrackerConfig, TrackResult, track
from .network import NetworkError, OscillatorNetwork, Topology, classify, physical_coupling
from .polynomial import CompiledSystem, PolynomialSystem, compile_laurent
from .system import LaurentSystem, ReductionError, build_system, toric_substitution, tree_reduce, tree_transform

POLISH_ITERS = 8
ROUND_DIGITS = 8


class InconclusiveRun(RuntimeError):
    """Too many paths ended ambiguously; retry with another gamma/seed."""

    def __init__(self, message: str, solset: "SolutionSet | None" = None):
        super().__init__(message)
        self.solset = solset


@dataclass
class Solution:
    point: np.ndarray
    residual: float
    newton_converged: bool
    condition: float
    on_torus: bool
    newton_iterations: int = 0
    theta: np.ndarray | None = None
    singular: bool = False
    multiplicity_suspected: bool = False

    def to_json(self) -> dict:
        out = {
            "point": [[float(z.real), float(z.imag)] for z in self.point],
            "residual": float(self.residual),
            "newton_converged": bool(self.newton_converged),
            "condition": float(self.condition),
            "on_torus": bool(self.on_torus),
        }
        if self.theta is not None:
            out["theta"] = [float(t) for t in self.theta]
        if self.singular:
            out["singular"] = True
        if self.multiplicity_suspected:
            out["multiplicity_suspected"] = True
        return out


@dataclass
class SolutionSet:
    solutions: list[Solution]
    stats: dict = field(default_factory=dict)
    method: str = "homotopy"
    inconclusive: bool = False
    notes: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.solutions)

    @property
    def torus(self) -> list[Solution]:
        return [s for s in self.solutions if s.on_torus]

    def points(self) -> np.ndarray:
        if not self.solutions:
            return np.zeros((0, 0), dtype=complex)
        return np.array([s.point for s in self.solutions])

    def to_json(self) -> dict:
        res = [s.residual for s in self.solutions]
        return {
            "method": self.method,
            "count": self.count,
            "torus_count": len(self.torus),
            "max_residual": max(res) if res else None,
            "inconclusive": self.inconclusive,
            "stats": dict(self.stats),
            "notes": list(self.notes),
            "meta": dict(self.meta),
            "solutions": [s.to_json() for s in self.solutions],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# Laurent Newton polish
# ---------------------------------------------------------------------------


def newton_polish(f: CompiledSystem, x: np.ndarray, tol: float, iters: int = POLISH_ITERS):
    """Batched Newton on F; returns (x, residual, iterations_to_tol, condition)."""
    x = np.array(x, dtype=complex, copy=True)
    used = np.full(len(x), -1)
    with np.errstate(all="ignore"):
        for k in range(iters + 1):
            res = np.abs(f(x)).max(axis=1)
            hit = (res < tol) & (used < 0)
            used[hit] = k
            if k == iters or (used >= 0).all():
                break
            jac = f.jacobian(x)
            active = used < 0
            for p in np.flatnonzero(active):
                try:
                    x[p] = x[p] - np.linalg.solve(jac[p], f(x[p : p + 1])[0])
                except np.linalg.LinAlgError:
                    used[p] = -2
        res = np.abs(f(x)).max(axis=1)
        jac = f.jacobian(x)
        cond = np.array([np.linalg.cond(j) if np.isfinite(j).all() else np.inf for j in jac])
    res[~np.isfinite(res)] = np.inf
    return x, res, used, cond


def _sort_key(p: np.ndarray) -> tuple:
    return tuple(v for z in p for v in (round(z.real, ROUND_DIGITS) + 0.0, round(z.imag, ROUND_DIGITS) + 0.0))


def deduplicate(sols: list[Solution], tol: float) -> tuple[list[Solution], int]:
    """Greedy clustering within ``tol``; clusters of size > 1 get the multiplicity flag."""
    kept: list[Solution] = []
    merged = 0
    for s in sorted(sols, key=lambda s: (s.residual, _sort_key(s.point))):
        twin = next((k for k in kept if np.linalg.norm(k.point - s.point) < tol), None)
        if twin is None:
            kept.append(s)
        else:
            twin.multiplicity_suspected = True
            merged += 1
    kept.sort(key=lambda s: _sort_key(s.point))
    return kept, merged


def classify_torus(solset: SolutionSet, torus_tol: float = 1e-6) -> tuple[list[Solution], list[np.ndarray]]:
    """Solutions on the unit torus and their angles theta_i = arg x_i in [0, 2pi)."""
    torus, thetas = [], []
    for s in solset.solutions:
        s.on_torus = bool(np.all(np.abs(np.abs(s.point) - 1) < torus_tol))
        if s.on_torus:
            s.theta = np.mod(np.angle(s.point), 2 * np.pi)
            torus.append(s)
            thetas.append(s.theta)
        else:
            s.theta = None
    return torus, thetas


def sine_residuals(net: OscillatorNetwork, theta) -> np.ndarray:
    """omega_i - sum_j a_ij sin(theta_i - theta_j) with theta_0 = 0."""
    th = np.concatenate([[0.0], np.asarray(theta, dtype=float)])
    out = np.empty(net.n, dtype=complex)
    for i in range(1, net.N):
        out[i - 1] = net.omega[i - 1] - sum(physical_coupling(net, i, j) * np.sin(th[i] - th[j]) for j in net.neighbors(i))
    return np.abs(out)


# ---------------------------------------------------------------------------
# homotopy driver
# ---------------------------------------------------------------------------


def homotopy_solve(psys: PolynomialSystem, cfg: TrackerConfig, laurent: LaurentSystem, raise_inconclusive: bool = False) -> SolutionSet:
    """Track the cleared system, then classify and polish endpoints on the Laurent form."""
    result: TrackResult = track(psys, cfg)
    f = compile_laurent(laurent)
    stats = {"tracked": len(result.paths), "diverged": 0, "at_zero": 0, "failed": 0, "accepted": 0, "merged": 0, "singular": 0}
    candidates = []
    for p in result.paths:
        x = p.endpoint
        if p.status == "diverged" or not np.isfinite(x).all() or np.linalg.norm(x) > cfg.diverge_norm:
            stats["diverged"] += 1
        elif np.abs(x).min() < cfg.coordinate_zero_tol:
            stats["at_zero"] += 1
        elif p.status == "failed":
            stats["failed"] += 1
        else:
            candidates.append(p)

    sols: list[Solution] = []
    if candidates:
        x0 = np.array([p.endpoint for p in candidates])
        xs, res, used, cond = newton_polish(f, x0, cfg.accept_tol)
        for p, x, r, k, c in zip(candidates, xs, res, used, cond):
            finite = np.isfinite(x).all()
            if not finite or np.linalg.norm(x) > cfg.diverge_norm:
                stats["diverged"] += 1
            elif np.abs(x).min() < cfg.coordinate_zero_tol:
                stats["at_zero"] += 1
            elif r < cfg.accept_tol:
                singular = bool(c > cfg.singular_cond)
                stats["singular"] += singular
                sols.append(Solution(x, float(r), bool(k >= 0), float(c), False, int(max(k, 0)), singular=singular))
            elif p.status == "stalled-end" and np.abs(p.endpoint).min() < np.sqrt(cfg.coordinate_zero_tol):
                # slow endgame towards a coordinate hyperplane
                stats["at_zero"] += 1
            elif p.status == "stalled-end" and np.linalg.norm(p.endpoint) > np.sqrt(cfg.diverge_norm):
                stats["diverged"] += 1
            else:
                stats["failed"] += 1

    kept, merged = deduplicate(sols, cfg.dedup_tol)
    stats["accepted"] = len(kept)
    stats["merged"] = merged
    solset = SolutionSet(kept, stats, "homotopy")
    solset.meta = {"gamma": [result.gamma.real, result.gamma.imag], "seed": cfg.seed, "bezout": psys.bezout_number}
    classify_torus(solset, cfg.torus_tol)
    if stats["failed"] > cfg.max_fail_fraction * stats["tracked"]:
        solset.inconclusive = True
        solset.notes.append("inconclusive run, retry with new gamma/seed")
        if raise_inconclusive:
            raise InconclusiveRun(solset.notes[-1], solset)
    if stats["singular"]:
        solset.notes.append(f"{stats['singular']} singular endpoint(s) with condition > {cfg.singular_cond:g}")
    if merged:
        solset.notes.append(f"{merged} endpoint(s) merged; multiplicity suspected")
    return solset


def solve_network(net: OscillatorNetwork, cfg: TrackerConfig | None = None) -> SolutionSet:
    from .polynomial import clear_denominators

    cfg = cfg or TrackerConfig()
    laurent = build_system(net)
    return homotopy_solve(clear_denominators(laurent, net), cfg, laurent)


# ---------------------------------------------------------------------------
# closed-form tree solver
# ---------------------------------------------------------------------------


def _quadratic_roots(a: complex, b: complex, c: complex) -> tuple[complex, complex, complex]:
    """Roots of a y^2 + b y + c without cancellation, plus the discriminant."""
    disc = b * b - 4 * a * c
    s = np.sqrt(complex(disc))
    if (b.conjugate() * s).real < 0:
        s = -s
    q = -0.5 * (b + s)
    if q == 0:
        return 0j, 0j, disc
    return q / a, c / q, disc


def tree_solve(net: OscillatorNetwork, accept_tol: float = 1e-9, torus_tol: float = 1e-6) -> SolutionSet:
    """All C*-solutions of a tree network from n independent quadratics."""
    if classify(net).tag is not Topology.TREE:
        raise NetworkError("tree_solve requires a tree network")
    relabelled, tree, umap = tree_transform(net)
    n = net.n
    reduced, _ = tree_reduce(build_system(relabelled), tree)
    ysys = toric_substitution(reduced, umap)
    notes = []
    roots = []
    for i, f in enumerate(ysys.equations):
        ev = tuple(int(k == i) for k in range(n))
        extra = set(f.terms) - {ev, tuple(-x for x in ev), (0,) * n}
        if extra:
            raise ReductionError(f"equation {i + 1} is not univariate after substitution")
        # c_plus y + omega* + c_minus / y = 0, times y
        c_plus = f.terms.get(ev, 0j)
        c_minus = f.terms.get(tuple(-x for x in ev), 0j)
        w = f.constant()
        if c_plus == 0 or c_minus == 0:
            notes.append(f"non-generic instance: vanishing coefficient in equation {i + 1}")
            roots.append([-c_minus / w] if c_plus == 0 and w != 0 else [])
            continue
        r1, r2, disc = _quadratic_roots(c_plus, w, c_minus)
        if disc == 0:
            notes.append(f"non-generic instance: zero discriminant in equation {i + 1}")
            roots.append([r1])
        else:
            roots.append([r1, r2])
    grids = np.meshgrid(*[np.array(r, dtype=complex) for r in roots], indexing="ij") if all(roots) else []
    ys = np.stack([g.ravel() for g in grids], axis=1) if len(grids) else np.zeros((0, n), dtype=complex)
    a = np.array(umap.matrix)
    xs_new = np.prod(ys[:, :, None] ** a[None, :, :], axis=1) if len(ys) else ys
    perm = tree.reindex_perm
    xs = xs_new[:, [perm[v] - 1 for v in range(1, net.N)]] if len(ys) else ys

    f = compile_laurent(build_system(net))
    xs, res, used, cond = newton_polish(f, xs, accept_tol, iters=3) if len(xs) else (xs, [], [], [])
    sols = [
        Solution(x, float(r), bool(k >= 0), float(c), False, int(max(k, 0)))
        for x, r, k, c in zip(xs, res, used, cond)
    ]
    for s in sols:
        if s.residual >= accept_tol:
            notes.append("tree solution with residual above accept_tol")
    sols.sort(key=lambda s: _sort_key(s.point))
    solset = SolutionSet(sols, {"quadratics": n, "accepted": len(sols)}, "tree", notes=notes)
    classify_torus(solset, torus_tol)
    return solset


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two finite point sets in C^n."""
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else np.inf
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def torus_search(topology: str, N: int, trials: int = 20, seed: int = 0, omega_scale: float = 0.1) -> dict:
    """Largest torus count seen over seeded symmetric-real tree instances.

    Only reports what was observed; it does not claim the maximum is attained.
    """
    from .network import generate

    counts = []
    for k in range(trials):
        net = generate(topology, N, seed=seed + k, mode="symmetric-real", omega_scale=omega_scale)
        counts.append(len(tree_solve(net).torus))
    best = int(np.argmax(counts))
    return {"topology": topology, "N": N, "trials": trials, "counts": counts, "max_torus": counts[best], "best_seed": seed + best, "ap_bound": 2 ** (N - 1)}
