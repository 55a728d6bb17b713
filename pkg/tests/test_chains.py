import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from adjfol.chains import (ChainError, chain_data, extend_chain_test, gamma_closed_form, is_chain, lambda_mu,
                           m_divisor, special_chain_bounds)
from adjfol.exactnum import EpsAffine
from adjfol.graph import chain_graph, intersection_matrix, make_graph
from adjfol.linalg import bareiss_det

chains = st.lists(st.integers(2, 7), min_size=1, max_size=7)


def hj_value(e):
    # [e1, ..., er] = e1 - 1/(e2 - 1/(...))
    v = Fraction(e[-1])
    for x in reversed(e[:-1]):
        v = x - 1 / v
    return v


@given(chains)
def test_n_is_the_determinant(e):
    g = chain_graph([-x for x in e])
    m = intersection_matrix(g)
    assert chain_data(e).n == bareiss_det([[-v for v in row] for row in m])


@given(chains)
def test_hj_continued_fraction(e):
    cd = chain_data(e)
    assert Fraction(cd.lam[0], cd.lam[1]) == hj_value(e)
    assert Fraction(cd.mu[-1], cd.mu[-2]) == hj_value(e[::-1])


@given(chains)
def test_recursions_and_determinant_identity(e):
    assert chain_data(e).identity_failures() == []


def test_small_values():
    assert chain_data([2, 2, 2]).n == 4
    assert chain_data([3, 2]).n == 5
    cd = chain_data([2, 3])
    assert cd.lam == (5, 3, 1, 1)
    assert cd.mu == (1, 1, 2, 5)


def test_chain_detection():
    g = chain_graph([-2, -2, -2])
    assert is_chain(g, ["C1", "C2", "C3"])
    assert not is_chain(g, ["C1", "C3", "C2"])
    with pytest.raises(ChainError):
        lambda_mu(g, ["C1", "C3"])


@given(chains, st.data())
def test_closed_form_matches_solver(e, data):
    g = chain_graph([-x for x in e])
    ids = [c.id for c in g.curves]
    vals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
    dots = [EpsAffine(data.draw(vals), data.draw(vals)) for _ in ids]
    closed = gamma_closed_form(lambda_mu(g, ids), dots)
    solved = m_divisor(g, ids, dots)
    assert closed == solved.values()
    # M.C_i = D.C_i
    m = intersection_matrix(g)
    for i in range(len(ids)):
        assert sum((m[i][j] * closed[j] for j in range(len(ids))), EpsAffine()) == dots[i]


def test_extend_chain():
    # F = C1 (-3), D.C1 = -1: M = 1/3 C1, M.C2 = 1/3
    g = chain_graph([-3, -2])
    assert extend_chain_test(g, ["C1"], "C2", [EpsAffine(-1), EpsAffine(0)])
    assert not extend_chain_test(g, ["C1"], "C2", [EpsAffine(-1), EpsAffine(Fraction(1, 2))])
    with pytest.raises(ChainError):
        extend_chain_test(g, ["C1"], "C1", [EpsAffine(-1), EpsAffine(0)])


def random_special_chain(rnd):
    r = rnd.randint(1, 6)
    e = [rnd.randint(2, 6) for _ in range(r)]
    g = chain_graph([-x for x in e])
    ids = [c.id for c in g.curves]
    first = EpsAffine(-rnd.randint(1, 4) * Fraction(1, rnd.randint(1, 3)), -rnd.randint(0, 3))
    rest = [EpsAffine(Fraction(rnd.randint(0, 3), rnd.randint(1, 4)), rnd.randint(0, 3)) for _ in ids[1:]]
    return g, ids, [first] + rest


def test_special_chain_bound_random():
    rnd = random.Random(20240501)
    positive = 0
    for _ in range(1000):
        g, ids, dots = random_special_chain(rnd)
        rep = special_chain_bounds(g, ids, dots)
        if rep["d_positive"]:
            positive += 1
            assert rep["bounds_ok"], (ids, dots)
            assert rep["nested_ok"], (ids, dots)
    assert positive > 100


def test_special_chain_requires_negative_first():
    g = chain_graph([-2, -2])
    with pytest.raises(ChainError):
        special_chain_bounds(g, ["C1", "C2"], [EpsAffine(1), EpsAffine(0)])


def test_exhaustive_identities_small():
    for r in range(1, 5):
        for e in itertools.product(range(2, 7), repeat=r):
            assert chain_data(e).identity_failures() == []
