import math

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from kpg.exact_algebra import MultiPoly, QQ, is_zero, parse_expr, simplify, variables
from kpg.nodal import (INF, ConditionFailure, FunctionTuple, NodalCurve,
                       algorithm61, check_node_matching, evaluate_at,
                       grid_csv, interpolation_basis, irreducible_nodal_soliton,
                       k_prime_at, kp_solution_grid, line_space, nodal_frame,
                       p_value, parse_range, riemann_roch_space)
from kpg.sato import (SolitonData, frame_from_soliton, plucker_vector,
                      projectively_equal, soliton_residual)

k1, k2, k3 = variables("k1", "k2", "k3")


def two_lines(divisor):
    nodes = [((0, k1), (1, 0)), ((0, k2), (1, 1)), ((0, k3), (1, -1))]
    return NodalCurve(2, nodes, divisor)


def four_lines():
    q12, q13, q23 = variables("q12", "q13", "q23")
    nodes = [((0, k1), (1, k1)), ((0, k2), (2, k2)), ((0, k3), (3, k3)),
             ((1, q12), (2, q12)), ((1, q13), (3, q13)), ((2, q23), (3, q23))]
    div = [(1, INF, 1), (2, INF, 1), (3, INF, 1), (0, INF, -1)]
    return NodalCurve(4, nodes, div), (q12, q13, q23)


def residual_zero(S):
    return all(is_zero(v) for v in soliton_residual(S).values())


def test_line_space_dimensions():
    assert line_space("x", []) == [1]
    q = parse_expr("q")
    assert len(line_space("x", [(q, 3)])) == 4
    assert line_space("x", [(INF, -1)]) == []
    assert len(line_space("x", [(INF, 2), (QQ(1), -1)])) == 2


def test_evaluate_at_infinity():
    x = MultiPoly.variable("x")
    assert evaluate_at((2 * x + 1) / (x - 3), "x", INF) == 2
    assert evaluate_at(1 / (x - 3), "x", INF) == 0
    with pytest.raises(ValueError):
        evaluate_at(x, "x", INF)


def test_curve_validation():
    with pytest.raises(ValueError, match="deg D"):
        two_lines([(0, INF, 2)])
    with pytest.raises(ValueError, match="connected"):
        NodalCurve(2, [((0, 1), (0, 2))], [])
    with pytest.raises(ValueError, match="smooth"):
        NodalCurve(2, [((0, 1), (1, 0)), ((0, 2), (1, 1)), ((0, 3), (1, 2))], [(1, 0, 1)])
    with pytest.raises(ValueError, match="share"):
        NodalCurve(2, [((0, 1), (1, 0)), ((0, 1), (1, 1))], [])
    with pytest.raises(ValueError, match="marked point"):
        NodalCurve(2, [((0, INF), (1, 0))], [(0, 0, -1)])


def test_riemann_roch_examples():
    X, (q12, q13, q23) = four_lines()
    basis = riemann_roch_space(X, [1, 2, 3], X.divisor_on([1, 2, 3]))
    assert len(basis) == 3
    assert check_node_matching(X, [1, 2, 3], basis)
    P1 = NodalCurve(1, [], [(0, INF, -1)])
    assert len(riemann_roch_space(P1, [0], [])) == 1


def test_riemann_roch_theorem_on_fragments():
    X, _ = four_lines()
    comps = [1, 2, 3]
    pa = X.arithmetic_genus(comps)
    for extra in range(2 * pa + 1, 2 * pa + 4):
        div = [(1, INF, extra), (2, INF, 0), (3, INF, 0)]
        space = riemann_roch_space(X, comps, div)
        assert len(space) == extra + 1 - pa
        assert check_node_matching(X, comps, space)


def test_interpolation_basis_values():
    kap = [QQ(1), QQ(3)]
    pairs = [(QQ(-2), QQ(5))]
    lam = [parse_expr("l1"), parse_expr("l2")]
    mu = [parse_expr("m1")]
    D0 = [(QQ(7), 1)]
    f = interpolation_basis(D0, kap, pairs, lam, mu, var="x")
    for k, l in zip(kap, lam):
        assert simplify(evaluate_at(f, "x", k) - l) == 0
    for k in pairs[0]:
        assert simplify(evaluate_at(f, "x", k) - mu[0]) == 0
    zero = interpolation_basis([], [QQ(2)], [], [0], [], var="x")
    assert zero == 0
    with pytest.raises(ValueError):
        interpolation_basis([], [QQ(2), QQ(2)], [], [1, 1], [], var="x")


def test_k_prime_and_p_value():
    assert k_prime_at([k1, k2, k3], k1) == (k1 - k2) * (k1 - k3)
    assert p_value([(QQ(1), 2), (INF, 5)], QQ(3)) == 4
    with pytest.raises(ValueError):
        k_prime_at([1, 2], 5)


def test_two_lines_trichotomy():
    R = algorithm61(two_lines([(0, INF, 1)]))
    nodes = [k1, k2, k3]
    assert R.A == [[simplify(1 / k_prime_at(nodes, k)) for k in nodes]]
    assert residual_zero(R.soliton())
    with pytest.raises(ConditionFailure) as e:
        algorithm61(two_lines([(1, QQ(1, 2), -2), (0, INF, 3)]))
    assert e.value.condition == "**"
    with pytest.raises(ConditionFailure) as e:
        algorithm61(two_lines([(1, QQ(1, 2), 3), (0, INF, -2)]))
    assert e.value.condition == "*"


def test_four_lines_algorithm():
    X, (q12, q13, q23) = four_lines()
    R = algorithm61(X)
    assert len(R.A) == 3 and len(R.A[0]) == 3
    assert residual_zero(R.soliton())


def test_four_lines_prescribed_basis():
    X, (q12, q13, q23) = four_lines()
    x1, x2, x3 = variables("x1", "x2", "x3")
    good = [
        FunctionTuple({1: mpq(0), 2: (x2 - q12) / (q23 - q12), 3: (x3 - q13) / (q23 - q13)}),
        FunctionTuple({1: (x1 - q12) / (q13 - q12), 2: mpq(0), 3: (x3 - q23) / (q13 - q23)}),
        FunctionTuple({1: (x1 - q13) / (q12 - q13), 2: (x2 - q23) / (q12 - q23), 3: mpq(0)}),
    ]
    R = algorithm61(X, basis=good)
    diag = [R.A[i][i] for i in range(3)]
    assert all(is_zero(d) for d in diag)
    # the printed third function fails node matching at q12
    bad = good[:2] + [FunctionTuple({1: (x1 - q13) / (q12 - q13), 2: (x2 - q23) / (q12 - q13), 3: mpq(0)})]
    with pytest.raises(ValueError, match="node matching"):
        algorithm61(X, basis=bad)


def test_irreducible_nodal():
    R = irreducible_nodal_soliton([(QQ(1), QQ(2))])
    assert len(R.B) == 1 and len(R.B[0]) == 2
    pairs = [(QQ(1), QQ(2)), (QQ(3), QQ(5)), (QQ(-1), QQ(7))]
    R = irreducible_nodal_soliton(pairs)
    assert all(sum(not is_zero(e) for e in row) == 2 for row in R.B)
    S = R.soliton()
    bases = sorted("".join(str(i + 1) for i in I) for I, v in S.plucker_vector().items() if not is_zero(v))
    assert bases == ["135", "136", "145", "146", "235", "236", "245", "246"]
    assert residual_zero(S)


def test_irreducible_symbolic():
    a1, a2, b1, b2 = variables("a1", "a2", "b1", "b2")
    R = irreducible_nodal_soliton([(a1, a2), (b1, b2)])
    assert residual_zero(R.soliton())


@pytest.mark.parametrize("name", ["two_lines", "irreducible", "mixed"])
def test_frame_agrees_with_algorithm(name):
    if name == "two_lines":
        X = NodalCurve(2, [((0, QQ(1)), (1, 0)), ((0, QQ(2)), (1, 1)), ((0, QQ(4)), (1, -1))], [(0, INF, 1)])
    elif name == "irreducible":
        X = NodalCurve(1, [((0, QQ(1)), (0, QQ(2))), ((0, QQ(3)), (0, QQ(5)))], [(0, INF, 1)])
    else:
        X = NodalCurve(2, [((0, QQ(1)), (1, 0)), ((0, QQ(2)), (1, 1)), ((0, QQ(3)), (0, QQ(6)))], [(0, INF, 1)])
    S = algorithm61(X).soliton()
    F = nodal_frame(X, 5)
    assert projectively_equal(plucker_vector(F, 5), plucker_vector(frame_from_soliton(S, 5), 5))


def test_grid_single_term_is_zero():
    S = SolitonData([QQ(2)], A=[[1]])
    p = kp_solution_grid(S, [0.0, 1.0], [0.0], [0.0])
    assert np.allclose(p, 0)


def test_grid_one_soliton_peak():
    S = SolitonData([0, 1], A=[[1, 1]])
    p = kp_solution_grid(S, [0.0], [0.0], [0.0])
    assert abs(p[0, 0, 0] - 0.5) < 1e-14


def test_grid_overflow_safe():
    S = SolitonData([0, 1], A=[[1, 1]])
    p = kp_solution_grid(S, [800.0, -800.0], [0.0], [0.0])
    assert np.all(np.isfinite(p))


def test_grid_marks_singular_samples():
    S = SolitonData([0, 1], A=[[1, -1]])
    p = kp_solution_grid(S, [0.0, 1.0], [0.0], [0.0])
    assert math.isnan(p[0, 0, 0]) and np.isfinite(p[1, 0, 0])


def test_grid_symbolic_rejected():
    S = SolitonData([k1, k2], A=[[1, 1]])
    with pytest.raises(ValueError):
        kp_solution_grid(S, [0.0], [0.0], [0.0])


def test_example_soliton_grid_finite():
    S = SolitonData([1, 2, 3], A=[[QQ(1, 2), -1, QQ(1, 2)]])
    xs = np.linspace(-5, 5, 100)
    p = kp_solution_grid(S, xs, np.linspace(-5, 5, 100), [0.0])
    assert np.isfinite(p).mean() > 0.99


def test_range_parsing_and_csv():
    assert list(parse_range("0:1:0.5")) == [0.0, 0.5, 1.0]
    assert list(parse_range("2")) == [2.0]
    for bad in ("1:0:1", "0:1:0", "0:1"):
        with pytest.raises(ValueError):
            parse_range(bad)
    text = grid_csv([0.0], [0.0], [0.0], np.array([[[0.5]]]))
    assert text.splitlines() == ["x,y,t,p", "0.0,0.0,0.0,0.5"]


@settings(max_examples=10)
@given(st.lists(st.integers(-9, 9), min_size=3, max_size=3, unique=True),
       st.lists(st.integers(-9, 9), min_size=3, max_size=3, unique=True))
def test_two_lines_random_residual(ks, zs):
    X = NodalCurve(2, [((0, QQ(k)), (1, QQ(z))) for k, z in zip(ks, zs)], [(0, INF, 1)])
    assert residual_zero(algorithm61(X).soliton())
