"""Total-degree homotopy continuation with the gamma trick.

All paths are advanced together as one batch; each keeps its own step size.
The predictor is a classical fourth-order Runge-Kutta step on the Davidenko
equation dx/dt = -H_x^{-1} H_t and the corrector is Newton's method at fixed t.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from .polynomial import CompiledSystem, PolynomialSystem

PATH_BUDGET = 2000


class TrackingError(RuntimeError):
    pass


@dataclass
class TrackerConfig:
    seed: int = 0
    gamma: complex | None = None
    step_init: float = 0.01
    step_min: float = 1e-13
    step_max: float = 0.05
    newton_tol: float = 1e-10
    max_corrector_iters: int = 3
    predictor_tol: float = 1e-5
    t_end_threshold: float = 1e-9
    diverge_norm: float = 1e8
    coordinate_zero_tol: float = 1e-6
    accept_tol: float = 1e-9
    dedup_tol: float = 1e-6
    torus_tol: float = 1e-6
    singular_cond: float = 1e10
    path_budget: int = PATH_BUDGET
    max_fail_fraction: float = 0.05
    max_iterations: int = 100000

    def __post_init__(self):
        if not 0 < self.step_min <= self.step_init <= self.step_max < 1:
            raise ValueError("need 0 < step_min <= step_init <= step_max < 1")
        for name in ("newton_tol", "diverge_norm", "coordinate_zero_tol", "accept_tol", "dedup_tol", "torus_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gamma is None:
            rng = np.random.default_rng(self.seed)
            self.gamma = complex(np.exp(2j * np.pi * rng.uniform()))

    def to_json(self) -> dict:
        out = asdict(self)
        out["gamma"] = [self.gamma.real, self.gamma.imag]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TrackerConfig":
        data = dict(data)
        if isinstance(data.get("gamma"), (list, tuple)):
            data["gamma"] = complex(*data["gamma"])
        return cls(**data)


@dataclass
class PathResult:
    start: np.ndarray
    endpoint: np.ndarray
    t: float
    status: str  # "done", "stalled-end", "diverged", "failed"
    steps: int


@dataclass
class TrackResult:
    paths: list[PathResult]
    gamma: complex
    config: TrackerConfig = field(repr=False)


def start_solutions(degrees) -> np.ndarray:
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    return np.array(list(itertools.product(*roots)), dtype=complex)


class _Homotopy:
    def __init__(self, target: CompiledSystem, degrees, gamma: complex):
        self.f = target
        self.deg = np.array(degrees)
        self.gamma = gamma

    def start_value(self, x):
        return x ** self.deg - 1.0

    def start_jac(self, x):
        d = self.deg * x ** (self.deg - 1)
        return np.einsum("pi,ij->pij", d, np.eye(len(self.deg)))

    def h(self, x, t):
        t = t[:, None]
        return (1 - t) * self.gamma * self.start_value(x) + t * self.f(x)

    def hx(self, x, t):
        t = t[:, None, None]
        return (1 - t) * self.gamma * self.start_jac(x) + t * self.f.jacobian(x)

    def ht(self, x):
        return self.f(x) - self.gamma * self.start_value(x)

    def velocity(self, x, t):
        return -_solve(self.hx(x, t), self.ht(x))


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched solve returning NaN rows for singular systems."""
    out = np.full(b.shape, np.nan + 0j)
    try:
        return np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        for p in range(a.shape[0]):
            try:
                out[p] = np.linalg.solve(a[p], b[p])
            except np.linalg.LinAlgError:
                pass
        return out


def track(psys: PolynomialSystem, cfg: TrackerConfig) -> TrackResult:
    """Track every start solution of x_i^d_i = 1 to the target system."""
    count = psys.bezout_number
    if count > cfg.path_budget:
        raise TrackingError(f"{count} paths exceed the path budget {cfg.path_budget}")
    hom = _Homotopy(psys.compiled(), psys.degrees, cfg.gamma)
    starts = start_solutions(psys.degrees)
    npaths = len(starts)
    x = starts.copy()
    t = np.zeros(npaths)
    h = np.full(npaths, cfg.step_init)
    streak = np.zeros(npaths, dtype=int)
    steps = np.zeros(npaths, dtype=int)
    status = np.array(["active"] * npaths, dtype=object)

    with np.errstate(all="ignore"):
        for _ in range(cfg.max_iterations):
            idx = np.flatnonzero(status == "active")
            if idx.size == 0:
                break
            xi, ti = x[idx], t[idx]
            hi = np.minimum(h[idx], 1.0 - ti)
            k1 = hom.velocity(xi, ti)
            k2 = hom.velocity(xi + 0.5 * hi[:, None] * k1, ti + 0.5 * hi)
            k3 = hom.velocity(xi + 0.5 * hi[:, None] * k2, ti + 0.5 * hi)
            k4 = hom.velocity(xi + hi[:, None] * k3, ti + hi)
            xp = xi + (hi[:, None] / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            tn = ti + hi
            tn[hi >= 1.0 - ti] = 1.0

            scale = 1.0 + np.linalg.norm(xp, axis=1)
            xc = xp.copy()
            ok = np.isfinite(xp).all(axis=1)
            converged = np.zeros(idx.size, dtype=bool)
            for it in range(cfg.max_corrector_iters):
                dx = _solve(hom.hx(xc, tn), hom.h(xc, tn))
                xc = xc - dx
                size = np.linalg.norm(dx, axis=1)
                ok &= np.isfinite(size)
                if it == 0:
                    ok &= size <= cfg.predictor_tol * scale
                converged |= size <= cfg.newton_tol * scale
            good = ok & converged

            acc = idx[good]
            x[acc] = xc[good]
            t[acc] = tn[good]
            steps[acc] += 1
            streak[acc] += 1
            grow = acc[streak[acc] >= 3]
            h[grow] = np.minimum(2 * h[grow], cfg.step_max)
            streak[grow] = 0
            status[acc[t[acc] >= 1.0]] = "done"
            big = acc[np.linalg.norm(x[acc], axis=1) > cfg.diverge_norm]
            status[big] = "diverged"

            rej = idx[~good]
            h[rej] *= 0.5
            streak[rej] = 0
            stuck = rej[h[rej] < cfg.step_min]
            # stalling next to t = 1 usually means the path runs into a root
            # outside the torus; the endpoint is classified downstream
            status[stuck] = np.where(1.0 - t[stuck] < cfg.t_end_threshold, "stalled-end", "failed")
        else:
            status[status == "active"] = "failed"

    paths = [PathResult(starts[p], x[p], float(t[p]), str(status[p]), int(steps[p])) for p in range(npaths)]
    return TrackResult(paths, cfg.gamma, cfg)
