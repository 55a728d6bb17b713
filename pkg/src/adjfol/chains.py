"""Chain calculus: lambda/mu determinants, the divisor M(D, F), and the
positivity tests for chains used in the classification proofs.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exactnum import EpsAffine, IntervalSign, as_rational, sign_on_interval
from .graph import DecoratedGraph, Divisor, GraphError, intersection_matrix, is_negative_definite
from .linalg import solve_eps

__all__ = [
    "ChainData",
    "ChainError",
    "is_chain",
    "chain_data",
    "lambda_mu",
    "m_divisor",
    "gamma_closed_form",
    "extend_chain_test",
    "special_chain_bounds",
    "chain_table",
]

DEFAULT_LO = Fraction(0)
DEFAULT_HI = Fraction(1, 3)


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class ChainData:
    ids: tuple
    e: tuple
    lam: tuple  # lambda_0 .. lambda_{r+1}
    mu: tuple  # mu_0 .. mu_{r+1}

    @property
    def n(self) -> int:
        return self.lam[0]

    @property
    def r(self) -> int:
        return len(self.e)

    def continuants(self) -> tuple[tuple, tuple]:
        """lambda and mu with the outer boundary terms lambda_{r+1}, mu_0 set to 0.

        With these boundary values the three-term recursions and the
        determinant identity hold on the full index range; the stored value 1
        at those two positions is a convention that no coefficient formula reads.
        """
        lam = list(self.lam)
        mu = list(self.mu)
        lam[-1] = 0
        mu[0] = 0
        return tuple(lam), tuple(mu)

    def identity_failures(self) -> list[str]:
        lam, mu = self.continuants()
        bad = []
        for i in range(1, self.r + 1):
            e = self.e[i - 1]
            if lam[i - 1] - e * lam[i] + lam[i + 1] != 0:
                bad.append(f"lambda recursion at {i}")
            if mu[i - 1] - e * mu[i] + mu[i + 1] != 0:
                bad.append(f"mu recursion at {i}")
        for i in range(0, self.r + 1):
            if lam[i] * mu[i + 1] - lam[i + 1] * mu[i] != self.n:
                bad.append(f"determinant identity at {i}")
        return bad

    def to_json(self) -> dict:
        return {"chain": list(self.ids), "e": list(self.e), "lambda": list(self.lam),
                "mu": list(self.mu), "n": self.n}


def chain_data(e: Sequence[int], ids: Sequence[str] | None = None) -> ChainData:
    """lambda/mu sequences of a chain with e_i = -C_i^2.

    Computed by the continuant recurrences, which are the cofactor expansions
    of the tridiagonal determinants.
    """
    e = tuple(int(x) for x in e)
    r = len(e)
    ids = tuple(ids) if ids is not None else tuple(f"C{i}" for i in range(1, r + 1))
    lam = [0] * (r + 2)
    lam[r + 1] = 1
    if r >= 1:
        lam[r] = 1
    for l in range(r - 1, -1, -1):
        # det of block l+1..r by expansion along its first row
        lam[l] = e[l] * lam[l + 1] - (lam[l + 2] if l + 2 <= r else 0)
    mu = [0] * (r + 2)
    mu[0] = 1
    if r >= 0:
        mu[1] = 1
    for k in range(2, r + 2):
        mu[k] = e[k - 2] * mu[k - 1] - (mu[k - 2] if k >= 3 else 0)
    if r == 0:
        lam[0] = 1
    return ChainData(ids, e, tuple(lam), tuple(mu))


def is_chain(g: DecoratedGraph, ids: Sequence[str]) -> bool:
    ids = list(ids)
    if len(set(ids)) != len(ids):
        return False
    for i, a in enumerate(ids):
        if a not in g:
            return False
        for j in range(i + 1, len(ids)):
            want = 1 if j == i + 1 else 0
            if g.mult(a, ids[j]) != want:
                return False
    return True


def lambda_mu(g: DecoratedGraph, chain: Sequence[str]) -> ChainData:
    if not is_chain(g, chain):
        raise ChainError(f"{list(chain)} is not a chain in the graph")
    return chain_data([-g.curve(c).self_int for c in chain], chain)


def _dots(d_dot, ids) -> list[EpsAffine]:
    if isinstance(d_dot, Mapping):
        return [EpsAffine.lift(d_dot[c]) for c in ids]
    vals = list(d_dot)
    if len(vals) != len(ids):
        raise ValueError("d_dot has the wrong length")
    return [EpsAffine.lift(v) for v in vals]


def m_divisor(g: DecoratedGraph, support: Sequence[str], d_dot) -> Divisor:
    """The unique divisor M on ``support`` with M.C = D.C for every support curve."""
    support = list(support)
    sub = g.subgraph(support)
    order = [c for c in sub.ids]
    m = intersection_matrix(sub)
    if order and not is_negative_definite(m):
        raise ChainError("support is not negative definite")
    dots = dict(zip(support, _dots(d_dot, support)))
    sol = solve_eps(m, [dots[c] for c in order])
    coeffs = dict(zip(order, sol))
    return Divisor.from_map(coeffs, support)


def gamma_closed_form(cd: ChainData, d_dot: Sequence) -> list[EpsAffine]:
    """Coefficients of M(D, F) on a chain from the lambda/mu closed form."""
    dots = [EpsAffine.lift(v) for v in d_dot]
    r, n = cd.r, cd.n
    out = []
    for i in range(1, r + 1):
        left = sum((cd.mu[k] * -dots[k - 1] for k in range(1, i + 1)), EpsAffine())
        right = sum((cd.lam[k] * -dots[k - 1] for k in range(i + 1, r + 1)), EpsAffine())
        out.append(left * Fraction(cd.lam[i], n) + right * Fraction(cd.mu[i], n))
    return out


def _all_positive(vals, lo, hi) -> bool:
    return all(sign_on_interval(v, lo, hi) is IntervalSign.ALL_POSITIVE for v in vals)


def extend_chain_test(g: DecoratedGraph, chain: Sequence[str], c: str, d_dot,
                      lo=DEFAULT_LO, hi=DEFAULT_HI) -> bool:
    """Whether F + c is again a D>0-chain, by comparing D.c with M(D, F).c.

    ``d_dot`` must provide D.C for the chain curves and for ``c``.
    """
    chain = list(chain)
    lo, hi = as_rational(lo), as_rational(hi)
    if not is_chain(g, chain):
        raise ChainError("not a chain")
    if c in chain:
        raise ChainError("curve already in chain")
    touching = [(x, g.mult(x, c)) for x in chain if g.mult(x, c)]
    if touching != [(chain[-1], 1)]:
        raise ChainError(f"{c} must meet only the last chain curve, with multiplicity 1")
    dots = dict(zip(chain + [c], _dots(d_dot, chain + [c])))
    M = m_divisor(g, chain, dots)
    if not _all_positive(M.values(), lo, hi):
        raise ChainError("F is not a D>0-chain on the interval")
    m_dot_c = M[chain[-1]]
    return sign_on_interval(m_dot_c - dots[c], lo, hi) is IntervalSign.ALL_POSITIVE


def special_chain_bounds(g: DecoratedGraph, chain: Sequence[str], d_dot,
                         lo=DEFAULT_LO, hi=DEFAULT_HI) -> dict:
    """Check the coefficient bounds along a special chain.

    Requires D.C_1 < 0 and D.C_i >= 0 (i >= 2) on the interval.  Reports the
    coefficients, whether the weighted sum criterion says F is D>0, and, if
    so, the upper bounds and the strict growth of M(D, F_k) in k.
    """
    chain = list(chain)
    lo, hi = as_rational(lo), as_rational(hi)
    cd = lambda_mu(g, chain)
    dots = _dots(d_dot, chain)
    if not sign_on_interval(dots[0], lo, hi).negative:
        raise ChainError("D.C_1 must be negative on the interval")
    for v in dots[1:]:
        if not sign_on_interval(v, lo, hi).nonneg:
            raise ChainError("D.C_i must be nonnegative for i >= 2")
    weighted = sum((cd.mu[k] * dots[k - 1] for k in range(1, cd.r + 1)), EpsAffine())
    criterion = sign_on_interval(weighted, lo, hi) is IntervalSign.ALL_NEGATIVE
    gamma = m_divisor(g, chain, dict(zip(chain, dots))).values()
    positive = _all_positive(gamma, lo, hi)
    report = {
        "chain": chain,
        "lambda": list(cd.lam),
        "mu": list(cd.mu),
        "n": cd.n,
        "gamma": gamma,
        "weighted_sum": weighted,
        "criterion": criterion,
        "d_positive": positive,
    }
    if not positive:
        report["bounds_ok"] = None
        report["nested_ok"] = None
        return report
    top = -dots[0]
    bounds = []
    for k in range(1, cd.r + 1):
        slack = top * Fraction(cd.lam[k], cd.n) - gamma[k - 1]
        bounds.append(sign_on_interval(slack, lo, hi).nonneg)
    nested = True
    prev = [EpsAffine()] * cd.r
    for k in range(1, cd.r + 1):
        cur = m_divisor(g, chain[:k], dict(zip(chain[:k], dots[:k]))).values()
        cur = cur + [EpsAffine()] * (cd.r - k)
        # strictly larger on the sub-chain support, and positive
        for j in range(k):
            if sign_on_interval(cur[j] - prev[j], lo, hi) is not IntervalSign.ALL_POSITIVE:
                nested = False
        prev = cur
    report["bounds_ok"] = all(bounds)
    report["bound_slack"] = [top * Fraction(cd.lam[k], cd.n) - gamma[k - 1] for k in range(1, cd.r + 1)]
    report["nested_ok"] = nested
    return report


def chain_table(r: int, e_min: int = 2, e_max: int = 6) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(e, lambda, mu) for every chain of length r with e_min <= e_i <= e_max.

    Rows follow itertools.product order; lambda and mu have r + 2 columns with
    the same boundary values as :func:`chain_data`.  int64 is exact while the
    continuants stay below 2**63, which holds for e_max ** r < 2**62.
    """
    if r < 1 or e_min < 1 or e_max < e_min:
        raise ValueError("bad chain box")
    if float(e_max) ** r >= 2.0 ** 62:
        raise OverflowError("continuants would overflow int64")
    vals = np.arange(e_min, e_max + 1, dtype=np.int64)
    e = np.stack(np.meshgrid(*([vals] * r), indexing="ij"), axis=-1).reshape(-1, r)
    rows = len(e)
    lam = np.zeros((rows, r + 2), dtype=np.int64)
    lam[:, r + 1] = 1
    lam[:, r] = 1
    for l in range(r - 1, -1, -1):
        lam[:, l] = e[:, l] * lam[:, l + 1] - (lam[:, l + 2] if l + 2 <= r else 0)
    mu = np.zeros((rows, r + 2), dtype=np.int64)
    mu[:, 0] = 1
    mu[:, 1] = 1
    for k in range(2, r + 2):
        mu[:, k] = e[:, k - 2] * mu[:, k - 1] - (mu[:, k - 2] if k >= 3 else 0)
    return e, lam, mu
