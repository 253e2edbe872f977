"""Fraction-free integer linear algebra.

Everything here works on lists of Python ints so results are exact.  Rows are
kept primitive (divided by their gcd) during elimination, which keeps entries
small for the polytopes this package deals with.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Sequence

IntMatrix = list[list[int]]


def primitive(vec: Sequence[int]) -> tuple[int, ...]:
    """Divide an integer vector by the gcd of its entries."""
    g = reduce(gcd, vec, 0)
    if g in (0, 1):
        return tuple(vec)
    return tuple(v // g for v in vec)


def lcm(a: int, b: int) -> int:
    return abs(a * b) // gcd(a, b) if a and b else 0


def integerize(vec: Sequence[Fraction | int]) -> tuple[int, ...]:
    """Scale a rational vector to a primitive integer vector (same direction)."""
    den = 1
    for v in vec:
        den = lcm(den, Fraction(v).denominator)
    return primitive([int(Fraction(v) * den) for v in vec])


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def echelon(rows: Sequence[Sequence[int]]) -> tuple[IntMatrix, list[int]]:
    """Integer Gauss-Jordan elimination.

    Returns ``(reduced_rows, pivot_columns)`` where ``reduced_rows`` has one
    row per pivot and every pivot column is zero outside its own row.
    """
    m = [list(r) for r in rows if any(r)]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, len(m)):
            if m[r][col]:
                if piv is None or abs(m[r][col]) < abs(m[piv][col]):
                    piv = r
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        prow = m[rank]
        p = prow[col]
        for r in range(len(m)):
            if r == rank:
                continue
            row = m[r]
            c = row[col]
            if c:
                g = gcd(p, c)
                fp, fc = p // g, c // g
                new = [fp * a - fc * b for a, b in zip(row, prow)]
                m[r] = list(primitive(new))
        pivots.append(col)
        rank += 1
        if rank == len(m):
            break
    return m[:rank], pivots


def rank(rows: Sequence[Sequence[int]]) -> int:
    return len(echelon(rows)[1])


def nullspace(rows: Sequence[Sequence[int]], ncols: int | None = None) -> list[tuple[int, ...]]:
    """Primitive integer basis of the rational nullspace of ``rows``."""
    if ncols is None:
        ncols = len(rows[0])
    red, pivots = echelon(rows)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        scale = 1
        for r, pc in zip(red, pivots):
            if r[f]:
                scale = lcm(scale, r[pc])
        vec = [0] * ncols
        vec[f] = scale
        for r, pc in zip(red, pivots):
            if r[f]:
                vec[pc] = -r[f] * scale // r[pc]
        basis.append(primitive(vec))
    return basis


def det(matrix: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    m = [list(r) for r in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = m[k][k]
        rowk = m[k]
        for i in range(k + 1, n):
            rowi = m[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * m[n - 1][n - 1]


def solve_rational(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction] | None:
    """Solve a square or overdetermined consistent system exactly.

    Returns None when the system is inconsistent.  Assumes full column rank.
    """
    ncols = len(matrix[0])
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    r = 0
    piv_cols = []
    for col in range(ncols):
        piv = next((i for i in range(r, len(aug)) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        p = aug[r][col]
        aug[r] = [x / p for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col] != 0:
                c = aug[i][col]
                aug[i] = [a - c * b for a, b in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
    if any(row[-1] != 0 for row in aug[r:]):
        return None
    if r < ncols:
        raise ValueError("matrix does not have full column rank")
    sol = [Fraction(0)] * ncols
    for i, col in enumerate(piv_cols):
        sol[col] = aug[i][-1]
    return sol


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Lattice basis of ``{x in Z^n : rows @ x = 0}``.

    Unimodular column operations bring ``rows`` to lower echelon form
    ``[H | 0]``; the trailing columns of the accumulated transform span the
    integer kernel.
    """
    a = [list(r) for r in rows]
    m = len(a)
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def colop(j: int, k: int, p: int, q: int, r: int, s: int) -> None:
        # (col_j, col_k) <- (p*col_j + q*col_k, r*col_j + s*col_k)
        for mat in (a, u):
            for row in mat:
                x, y = row[j], row[k]
                row[j], row[k] = p * x + q * y, r * x + s * y

    piv = 0
    for i in range(m):
        if piv >= ncols:
            break
        for k in range(piv + 1, ncols):
            if a[i][k] == 0:
                continue
            x, y = a[i][piv], a[i][k]
            g, s, t = _xgcd(x, y)
            # [s t; -y/g x/g] has determinant 1
            colop(piv, k, s, t, -y // g, x // g)
        if a[i][piv] != 0:
            piv += 1
    return [tuple(u[r][c] for r in range(ncols)) for c in range(piv, ncols)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    bt = list(zip(*b))
    return [[dot(row, col) for col in bt] for row in a]


def matvec(a: Sequence[Sequence[int]], v: Sequence) -> tuple:
    return tuple(dot(row, v) for row in a)


def inverse_unimodular(a: Sequence[Sequence[int]]) -> IntMatrix:
    """Exact inverse of a unimodular integer matrix."""
    n = len(a)
    cols = []
    for j in range(n):
        e = [int(i == j) for i in range(n)]
        sol = solve_rational(a, e)
        if sol is None or any(x.denominator != 1 for x in sol):
            raise ValueError("matrix is not unimodular")
        cols.append([int(x) for x in sol])
    return [[cols[j][i] for j in range(n)] for i in range(n)]
