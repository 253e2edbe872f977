"""The inequality chain torus <= C* <= index <= mixed volume <= AP bound."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

from . import geometry as geo
from .homotopy import TrackerConfig
from .network import OscillatorNetwork, classify
from .solver import SolutionSet, sine_residuals, solve_network
from .system import ap_bound, closed_form, support_family


@lru_cache(maxsize=None)
def _cached_mixed_volume(supports: tuple) -> int:
    n = len(supports)
    return geo.mixed_volume([geo.convex_hull(s, dim=n) for s in supports])


def bkk_bound(net: OscillatorNetwork) -> int:
    """Mixed volume of the generic Newton polytopes; depends only on the graph."""
    return _cached_mixed_volume(tuple(tuple(s) for s in support_family(net)))


def is_physical(net: OscillatorNetwork) -> bool:
    """Symmetric real couplings a_ij = 2i a'_ij and real omega (the sine system applies)."""
    real_a = all(abs((2j * w).imag) < 1e-15 for w in net.weights.values())
    return net.is_symmetric and real_a and all(abs(w.imag) < 1e-15 for w in net.omega)


@dataclass
class BoundReport:
    label: str
    topology: str
    N: int
    torus: int | None
    cstar: int | None
    index: int | None
    mixed_volume: int
    ap: int
    baseline: int
    comparisons: list[dict] = field(default_factory=list)
    status: str = "ok"
    max_sine_residual: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[dict]:
        return [c for c in self.comparisons if c["holds"] is False]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "topology": self.topology,
            "N": self.N,
            "chain": {
                "torus": self.torus,
                "cstar": self.cstar,
                "index": self.index if self.index is not None else "n/a",
                "mixed_volume": self.mixed_volume,
                "ap_bound": self.ap,
            },
            "baseline": self.baseline,
            "comparisons": self.comparisons,
            "status": self.status,
            "max_sine_residual": self.max_sine_residual,
            "notes": self.notes,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _compare(lo_name, lo, hi_name, hi) -> dict:
    holds = None if lo is None or hi is None else bool(lo <= hi)
    rel = None if holds is None else ("=" if lo == hi else "<" if lo < hi else ">")
    return {"lhs": lo_name, "rhs": hi_name, "lhs_value": lo, "rhs_value": hi, "relation": rel, "holds": holds}


def verify_chain(net: OscillatorNetwork, cfg: TrackerConfig | None = None, solset: SolutionSet | None = None) -> BoundReport:
    from .system import baseline_bound

    cfg = cfg or TrackerConfig()
    tc = classify(net)
    if solset is None:
        solset = solve_network(net, cfg)
    index = closed_form(net)
    mv = bkk_bound(net)
    ap = ap_bound(net).value
    partial = solset.inconclusive
    torus = None if partial else len(solset.torus)
    cstar = None if partial else solset.count
    report = BoundReport(net.name, tc.tag.value, net.N, torus, cstar, index, mv, ap, baseline_bound(net.N))
    report.comparisons = [
        _compare("torus", torus, "cstar", cstar),
        _compare("cstar", cstar, "index", index) if index is not None else _compare("cstar", cstar, "mixed_volume", mv),
    ]
    if index is not None:
        report.comparisons.append(_compare("index", index, "mixed_volume", mv))
    report.comparisons.append(_compare("mixed_volume", mv, "ap_bound", ap))
    report.comparisons.append(_compare("ap_bound", ap, "baseline", report.baseline))
    if solset.torus and is_physical(net):
        report.max_sine_residual = float(max(sine_residuals(net, s.theta).max() for s in solset.torus))
    if report.violations:
        report.status = "violation"
    elif partial:
        report.status = "partial"
        report.notes.append("solver inconclusive; C* and torus counts omitted")
    report.notes.extend(solset.notes)
    return report
