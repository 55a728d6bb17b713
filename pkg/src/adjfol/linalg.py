"""Fraction-free (Bareiss) elimination over the integers."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .exactnum import EpsAffine


class SingularMatrixError(ValueError):
    pass


def _copy(m):
    return [list(map(int, row)) for row in m]


def bareiss_det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix."""
    a = _copy(m)
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def leading_minors(m: Sequence[Sequence[int]]) -> list[int]:
    n = len(m)
    return [bareiss_det([row[:k] for row in m[:k]]) for k in range(1, n + 1)]


def is_symmetric(m) -> bool:
    n = len(m)
    return all(len(row) == n for row in m) and all(m[i][j] == m[j][i] for i in range(n) for j in range(i))


def solve_rational(m: Sequence[Sequence[int]], rhs: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Solve ``m X = rhs`` for an integer matrix and several rational columns.

    ``rhs`` is a list of columns.  Columns are scaled to integers, eliminated
    fraction-free together with ``m``, and divided out only in the final
    back substitution.
    """
    n = len(m)
    if n == 0:
        return [[] for _ in rhs]
    scales = []
    cols = []
    for col in rhs:
        col = [Fraction(c) for c in col]
        s = lcm(*(c.denominator for c in col)) if col else 1
        scales.append(s)
        cols.append([int(c * s) for c in col])
    a = [list(map(int, m[i])) + [c[i] for c in cols] for i in range(n)]
    w = n + len(cols)
    prev = 1
    for k in range(n):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    break
            else:
                raise SingularMatrixError("matrix is singular")
        for i in range(k + 1, n):
            for j in range(k + 1, w):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    out = []
    for c in range(len(cols)):
        x = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            acc = Fraction(a[i][n + c])
            for j in range(i + 1, n):
                acc -= a[i][j] * x[j]
            x[i] = acc / a[i][i]
        out.append([xi / scales[c] for xi in x])
    return out


def solve_eps(m: Sequence[Sequence[int]], rhs: Sequence[EpsAffine]) -> list[EpsAffine]:
    """Solve ``m x = rhs`` with an eps-affine right hand side."""
    rhs = [EpsAffine.lift(r) for r in rhs]
    c0, c1 = solve_rational(m, [[r.const for r in rhs], [r.eps for r in rhs]])
    return [EpsAffine(p, q) for p, q in zip(c0, c1)]
