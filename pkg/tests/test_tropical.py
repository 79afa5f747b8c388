import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from kpg.tropical import (MetricGraph, classify_delaunay, delaunay_orbits,
                          delaunay_polytope_from_orientation, delaunay_set,
                          in_voronoi, is_positive_definite, qform,
                          riemann_matrix, search_box, stable_graphs,
                          theta_limit, voronoi_vertices)
from kpg.exact_algebra import QQ, parse_expr, render

DUMBBELL = {"vertices": 2, "edges": [[0, 0, "2"], [0, 1, "1/2"], [1, 1, "2"]],
            "cycles": [[1, 0, 0], [0, 0, 1]]}
THETA = {"vertices": 2, "edges": [[0, 1, "2"], [0, 1, "2"], [0, 1, "2"]],
         "cycles": [[1, -1, 0], [0, 1, -1]]}


def test_q_matrices():
    assert riemann_matrix(MetricGraph.from_json(DUMBBELL)) == [[2, 0], [0, 2]]
    assert riemann_matrix(MetricGraph.from_json(THETA)) == [[4, -2], [-2, 4]]


def test_symbolic_edge_lengths():
    G = MetricGraph.from_json({"vertices": 2, "edges": [[0, 1, "l1"], [0, 1, "l2"], [0, 1, "l3"]],
                               "cycles": [[1, -1, 0], [0, 1, -1]]})
    Q = riemann_matrix(G)
    assert render(Q[0][0]) == "l1 + l2" and render(Q[0][1]) == "-l2"


def test_graph_validation():
    with pytest.raises(ValueError):
        MetricGraph.from_json({"vertices": 2, "edges": [[0, 1, "1"], [0, 1, "1"]], "cycles": [[1, 1]]})
    with pytest.raises(ValueError):
        MetricGraph.from_json({"vertices": 1, "edges": [[0, 0, "-1"]]})
    # cycles inferred when omitted
    G = MetricGraph.from_json({"vertices": 2, "edges": [[0, 1, "1"], [0, 1, "1"], [0, 1, "1"]]})
    assert G.genus == 2


def test_delaunay_sets():
    Q = [[mpq(2), mpq(0)], [mpq(0), mpq(2)]]
    assert sorted(delaunay_set(Q, [mpq(1, 2), mpq(1, 2)])) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert delaunay_set(Q, [mpq(0), mpq(0)]) == [(0, 0)]
    T = [[mpq(4), mpq(-2)], [mpq(-2), mpq(4)]]
    verts = voronoi_vertices(T)
    assert verts and all(len(delaunay_set(T, a)) == 3 for a in verts)


def test_point_outside_voronoi_cell():
    Q = [[mpq(2), mpq(0)], [mpq(0), mpq(2)]]
    assert not in_voronoi(Q, [mpq(1), mpq(0)])
    with pytest.raises(ValueError):
        delaunay_set(Q, [mpq(1), mpq(0)])


def test_equality_locus_is_exact():
    T = [[mpq(4), mpq(-2)], [mpq(-2), mpq(4)]]
    for a in voronoi_vertices(T):
        pts = set(delaunay_set(T, a))
        val = qform(T, [0, 0]) - 2 * qform(T, [0, 0], a)
        b = search_box(T, a)
        for c in itertools.product(range(-b, b + 1), repeat=2):
            lhs = qform(T, c) - 2 * qform(T, c, a)
            if c in pts:
                assert lhs == val
            else:
                assert lhs > val


def test_orientation_polytopes():
    sq = delaunay_polytope_from_orientation([[1, 0, 0], [0, 0, 1]])
    assert sq.signature == (4, 4)
    tri = delaunay_polytope_from_orientation([[1, -1, 0], [0, 1, -1]], [1, 1, -1])
    assert tri.signature == (3, 3)
    with pytest.raises(ValueError):
        delaunay_polytope_from_orientation([[1, 0], [1, 0]])


def test_cube_from_genus3_bouquet():
    lam = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert classify_delaunay(lam) == [(8, 6)]


def test_classification_genus_limit():
    lam = [[1 if i == j else 0 for j in range(5)] for i in range(5)]
    with pytest.raises(ValueError, match="g ≤ 4"):
        classify_delaunay(lam)


def test_stable_graph_counts():
    assert len(stable_graphs(2)) == 3
    for G in stable_graphs(3):
        assert G.genus == 3


def _random_unimodular(g, rng):
    U = [[1 if i == j else 0 for j in range(g)] for i in range(g)]
    for _ in range(4):
        i, j = rng.sample(range(g), 2)
        c = rng.choice([-1, 1])
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    return U


@pytest.mark.parametrize("seed", range(6))
def test_classification_invariance(seed):
    rng = random.Random(seed)
    G = rng.choice(stable_graphs(3))
    base = classify_delaunay(G)
    perm = list(range(len(G.edges)))
    rng.shuffle(perm)
    assert classify_delaunay(G.relabel(perm)) == base
    U = _random_unimodular(3, rng)
    lam = [[sum(U[i][k] * G.cycles[k][e] for k in range(3)) for e in range(len(G.edges))] for i in range(3)]
    assert classify_delaunay(lam) == base


@given(st.lists(st.fractions(min_value=1, max_value=5, max_denominator=4), min_size=3, max_size=3))
def test_theta_q_positive_definite(lengths):
    G = MetricGraph.from_json({"vertices": 2, "edges": [[0, 1, str(l)] for l in lengths],
                               "cycles": [[1, -1, 0], [0, 1, -1]]})
    Q = riemann_matrix(G)
    assert Q[0][1] == Q[1][0]
    assert is_positive_definite(Q)


def test_theta_limit_exponents():
    Q = [[mpq(2), mpq(0)], [mpq(0), mpq(2)]]
    r1, r2, r3 = (parse_expr(n) for n in ("r1", "r2", "r3"))
    lim = theta_limit(Q, [mpq(1, 2), mpq(1, 2)], [[r1, r2], [r2, r3]])
    exps = dict(zip(lim.points, lim.exponents))
    assert exps[(1, 1)] == (r1 + 2 * r2 + r3) / 2
    zero = theta_limit(Q, [mpq(1, 2), mpq(1, 2)], [[0, 0], [0, 0]])
    assert zero.coefficients() == [1.0] * 4


def test_delaunay_orbits_square():
    Q = [[mpq(2), mpq(0)], [mpq(0), mpq(2)]]
    orbits = delaunay_orbits(Q)
    assert len(orbits) == 1 and len(orbits[0][1]) == 4
