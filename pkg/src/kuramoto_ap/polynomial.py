"""Numerical evaluation of (Laurent) polynomial systems and denominator clearing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import OscillatorNetwork
from .system import LaurentPolynomial, LaurentSystem


class CompiledSystem:
    """Vectorised evaluator for F and its Jacobian at a batch of points.

    Works for Laurent exponents too, as long as the points avoid zero
    coordinates where negative powers occur.
    """

    def __init__(self, equations: list[dict[tuple[int, ...], complex]], n: int):
        rows, coeffs, owner = [], [], []
        for k, eq in enumerate(equations):
            for e, c in sorted(eq.items()):
                rows.append(e)
                coeffs.append(c)
                owner.append(k)
        self.n = n
        self.n_eq = len(equations)
        self.exps = np.array(rows, dtype=np.int64).reshape(-1, n)
        self.coeffs = np.array(coeffs, dtype=complex)
        self.sum_matrix = np.zeros((self.n_eq, len(rows)))
        self.sum_matrix[owner, np.arange(len(rows))] = 1.0
        # derivative data: d/dx_k of x^e is e_k x^(e - e_k); zero rows where e_k == 0
        self.dexps = []
        self.dcoeffs = []
        for k in range(n):
            ek = self.exps[:, k]
            shifted = self.exps.copy()
            shifted[:, k] -= 1
            shifted[ek == 0] = 0
            self.dexps.append(shifted)
            self.dcoeffs.append(self.coeffs * ek)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        mons = np.prod(x[:, None, :] ** self.exps[None], axis=2)
        return (mons * self.coeffs) @ self.sum_matrix.T

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        jac = np.empty((x.shape[0], self.n_eq, self.n), dtype=complex)
        for k in range(self.n):
            mons = np.prod(x[:, None, :] ** self.dexps[k][None], axis=2)
            jac[:, :, k] = (mons * self.dcoeffs[k]) @ self.sum_matrix.T
        return jac


def compile_laurent(system: LaurentSystem) -> CompiledSystem:
    return CompiledSystem([dict(f.terms) for f in system.equations], system.n)


@dataclass(frozen=True)
class PolynomialSystem:
    """Laurent system multiplied through by one monomial per equation."""

    equations: tuple[LaurentPolynomial, ...]
    multipliers: tuple[tuple[int, ...], ...]
    degrees: tuple[int, ...]
    n: int

    def compiled(self) -> CompiledSystem:
        return CompiledSystem([dict(f.terms) for f in self.equations], self.n)

    @property
    def bezout_number(self) -> int:
        return int(np.prod(self.degrees))


def total_degree(poly: LaurentPolynomial) -> int:
    return max(sum(e) for e in poly.terms) if poly.terms else 0


def clear_denominators(system: LaurentSystem, net: OscillatorNetwork | None = None) -> PolynomialSystem:
    """Multiply equation i by x_i * prod_{j in N(i), j != 0} x_j.

    Without a network the multiplier is the smallest monomial making every
    exponent nonnegative.
    """
    n = system.n
    eqs, mults, degs = [], [], []
    for i, f in enumerate(system.equations, start=1):
        if net is not None:
            m = [0] * n
            m[i - 1] += 1
            for j in net.neighbors(i):
                if j:
                    m[j - 1] += 1
        else:
            m = [max(0, -min(e[k] for e in f.terms)) for k in range(n)]
        shifted = {tuple(a + b for a, b in zip(e, m)): c for e, c in f.terms.items()}
        if any(x < 0 for e in shifted for x in e):
            raise ValueError("multiplier does not clear denominators")
        poly = LaurentPolynomial(shifted)
        eqs.append(poly)
        mults.append(tuple(m))
        degs.append(total_degree(poly))
    return PolynomialSystem(tuple(eqs), tuple(mults), tuple(degs), n)
