from fractions import Fraction

import pytest

from adjfol.adjoint import grade
from adjfol.graph import chain_graph, make_graph
from adjfol.patterns import all_matches, classify, recognize_blocks

W = (Fraction(1, 5), Fraction(1, 3))


def badtail(center_self=-2, t2_self=-2, xi=0):
    rows = [("T1", -2, "Z", 1), ("C", center_self, "Z", 3), ("T2", t2_self, "Z", 1)]
    edges = [("T1", "C", 1), ("C", "T2", 1)]
    prev = "C"
    for i in range(xi):
        rows.append((f"X{i}", -2, "Z", 2))
        edges.append((prev, f"X{i}", 1))
        prev = f"X{i}"
    return make_graph(rows, edges)


def fstar(selfs, center=-2):
    rows = [("N", center, "T", 0)] + [(f"L{i}", s, "Z", 1) for i, s in enumerate(selfs)]
    return make_graph(rows, [("N", f"L{i}", 1) for i in range(len(selfs))])


STAR_CHAIN = make_graph([("A", -2, "Z", 1), ("N", -1, "T", 0), ("B", -3, "Z", 1)],
                        [("A", "N", 1), ("N", "B", 1)])
CYCLE = make_graph([("A", -3, "Z", 2), ("B", -2, "Z", 2), ("C", -2, "Z", 2)],
                   [("A", "B", 1), ("B", "C", 1), ("C", "A", 1)])
NODAL = make_graph([("A", -1, "Z", 0, {"nodal": True})])
ELLIPTIC_T = make_graph([("A", -1, "T", 0, {"genus": 1})])

MAIN_LC_CASES = [
    (chain_graph([-3, -2], [1, 2]), "1", (5,)),
    (chain_graph([-2, -2], [2, 2]), "2", (2,)),
    (badtail(), "3-a", (-2,)),
    (badtail(xi=1), "4-a", (-2, 1)),
    (NODAL, "5", (1,)),
    (CYCLE, "5", (3,)),
    (STAR_CHAIN, "6", (2, 3)),
    (ELLIPTIC_T, "7", ()),
    (fstar([-2, -2, -3]), "8-a", (2, 2, 3)),
    (fstar([-3, -3, -3]), "8-b", (3, 3, 3)),
    (fstar([-2, -2, -2, -2], center=-3), "8-c", (2, 2, 2, 2)),
]


@pytest.mark.parametrize("g,family,params", MAIN_LC_CASES)
def test_main_lc_representatives(g, family, params):
    tags = all_matches(g, "MAIN_LC")
    assert [t.family for t in tags] == [family]
    assert tags[0].parameters == params
    assert tags[0].code == f"MAIN_LC/{family}"


@pytest.mark.parametrize("g,family,params", MAIN_LC_CASES)
def test_main_lc_representatives_are_lc(g, family, params):
    v = grade(g, 0, Fraction(1, 5))
    assert v.lc
    if "not klt" in classify(g, "MAIN_LC").annotations:
        assert not v.klt


def test_window_families_only_in_window():
    g = badtail(t2_self=-3)
    assert classify(g, "MAIN_LC") is None
    assert classify(g, "MAIN_LC", *W).family == "3-b"
    assert grade(g, *W).lc
    assert not grade(g, 0, Fraction(1, 5)).lc
    g = badtail(t2_self=-3, xi=1)
    assert classify(g, "MAIN_LC", *W).family == "4-b"


def test_main_can():
    assert classify(chain_graph([-3, -2], [1, 2]), "MAIN_CAN").family == "1"
    t = classify(badtail(), "MAIN_CAN")
    assert (t.family, t.annotations) == ("3", ("not terminal",))
    assert classify(badtail(xi=1), "MAIN_CAN").family == "4"
    # star chain: only with a (-1) center
    assert classify(STAR_CHAIN, "MAIN_CAN").family == "5"
    heavy = make_graph([("A", -2, "Z", 1), ("N", -2, "T", 0)], [("A", "N", 1)])
    assert classify(heavy, "MAIN_CAN") is None
    # bad tails need every curve of self -2
    assert classify(badtail(center_self=-3), "MAIN_CAN") is None


def test_surface():
    assert classify(chain_graph([-2, -3]), "SURF_LC").family == "HJ"
    fork = make_graph([("B", -2, "Z", 2), ("X", -2, "Z", 2), ("Y", -3, "Z", 2), ("W", -5, "Z", 2)],
                      [("B", "X", 1), ("B", "Y", 1), ("B", "W", 1)])
    t = classify(fork, "SURF_LC")
    assert t.family == "fork(2,3,5)" and t.annotations == ()
    fork7 = make_graph([("B", -2, "Z", 2), ("X", -2, "Z", 2), ("Y", -3, "Z", 2), ("W", -7, "Z", 2)],
                       [("B", "X", 1), ("B", "Y", 1), ("B", "W", 1)])
    assert classify(fork7, "SURF_LC") is None
    assert not grade(fork7, convention="surface").lc
    assert classify(CYCLE, "SURF_LC").annotations == ("not klt",)
    assert classify(NODAL, "SURF_LC").family == "nodal"


def test_foliated():
    t = classify(chain_graph([-3, -2], [1, 2]), "FOL_LC")
    assert (t.code, t.annotations) == ("FOL_LC/1", ("terminal",))
    assert classify(chain_graph([-2, -2], [2, 2]), "FOL_LC").annotations == ("canonical",)
    assert classify(badtail(), "FOL_LC").family == "3"
    assert classify(CYCLE, "FOL_LC").family == "5"
    assert classify(STAR_CHAIN, "FOL_LC").family == "6"
    assert classify(fstar([-5, -7, -9]), "FOL_LC").family == "7"


def test_unknown_theorem():
    with pytest.raises(ValueError):
        classify(CYCLE, "NOPE")


def test_blocks():
    labels = {b.label for b in recognize_blocks(badtail())}
    assert {"BAD_TAIL", "MINUS1_F"} <= labels
    blocks = recognize_blocks(chain_graph([-3, -2], [1, 2]))
    assert any(b.label == "F_CHAIN" and b.parameters == (5,) for b in blocks)
    assert any(b.label == "STAR_CENTER" for b in recognize_blocks(STAR_CHAIN))
    assert any(b.label == "EGL_CYCLE" for b in recognize_blocks(CYCLE))
