from __future__ import annotations

from fractions import Fraction

import networkx as nx
import pytest
from gmpy2 import mpq

from oracles import is_psd_pivoting, rank
from srgsearch.srg import (
    ADJ,
    EMBED_DIM,
    NONADJ,
    ONE,
    InfeasibleParameters,
    SrgParams,
    cosine_sequence,
    gram_value,
    srg_spectrum,
)


def test_target_spectrum():
    spec = srg_spectrum(SrgParams(85, 14, 3, 2))
    assert (spec.k, spec.r, spec.s) == (14, 4, -3)
    assert (1, spec.f, spec.g) == (1, 34, 50)
    assert EMBED_DIM == 34


def test_paley9_spectrum():
    spec = srg_spectrum(SrgParams(9, 4, 1, 2))
    assert (spec.k, spec.r, spec.s, spec.f, spec.g) == (4, 1, -2, 4, 4)


def test_conference_parameters_are_rejected():
    with pytest.raises(InfeasibleParameters):
        srg_spectrum(SrgParams(5, 2, 0, 1))


def test_invalid_parameters():
    with pytest.raises(ValueError):
        SrgParams(10, 12, 0, 1)


def test_cosine_sequences():
    p = SrgParams(85, 14, 3, 2)
    cs = cosine_sequence(p, 4)
    assert (cs.w0, cs.w1, cs.w2) == (1, mpq(2, 7), mpq(-1, 14))
    cs = cosine_sequence(p, -3)
    assert (cs.w0, cs.w1, cs.w2) == (1, mpq(-3, 14), mpq(1, 35))
    assert (ONE, ADJ, NONADJ) == (1, mpq(2, 7), mpq(-1, 14))
    with pytest.raises(ValueError):
        cosine_sequence(p, 5)


def test_gram_value():
    cs = cosine_sequence(SrgParams(85, 14, 3, 2), 4)
    assert gram_value("adjacent", cs) == mpq(2, 7)
    assert gram_value("nonadjacent", cs) == mpq(-1, 14)
    assert gram_value("same", cs) == 1
    with pytest.raises(ValueError):
        gram_value("distance-3", cs)


@pytest.mark.parametrize("graph, params", [
    (nx.petersen_graph(), SrgParams(10, 3, 0, 1)),
    (nx.cartesian_product(nx.complete_graph(3), nx.complete_graph(3)), SrgParams(9, 4, 1, 2)),  # rook graph
])
def test_cosine_gram_is_psd_with_multiplicity_rank(graph, params):
    spec = srg_spectrum(params)
    for theta, mult in ((spec.r, spec.f), (spec.s, spec.g)):
        cs = cosine_sequence(params, theta)
        nodes = sorted(graph.nodes())
        G = [[Fraction(str(cs.w0 if a == b else cs.w1 if graph.has_edge(a, b) else cs.w2)) for b in nodes]
             for a in nodes]
        assert is_psd_pivoting(G)
        assert rank(G) == mult
