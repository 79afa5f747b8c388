"""Nodal curves whose components are projective lines: Riemann-Roch spaces
of divisors on smooth points, the injectivity condition (*) and the
h¹-vanishing condition (**), and the algorithm turning a curve with a
divisor D and a point p into a soliton matrix.

Each component i carries an affine coordinate ``x{i}``; points are
expressions in declared indeterminates or ``"inf"``.  The marked point p is
the point at infinity of component 0.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np
from gmpy2 import mpq

from .exact_algebra import (LaurentSeries, MultiPoly, RationalFunction,
                            is_zero, kernel_basis, parse_expr, render,
                            series_inverse, simplify, substitute, to_field)
from .sato import Frame, SolitonData

INF = "inf"


class ConditionFailure(Exception):
    """The curve datum does not define a point of the Sato Grassmannian."""

    def __init__(self, condition: str, reason: str):
        super().__init__(f"condition ({condition}) fails: {reason}")
        self.condition = condition
        self.reason = reason


def _point(value):
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    if isinstance(value, str):
        return simplify(parse_expr(value))
    return simplify(to_field(value))


def _same(a, b) -> bool:
    if a == INF or b == INF:
        return a == b
    return is_zero(simplify(to_field(a) - to_field(b)))


def coord(i: int) -> str:
    return f"x{i}"


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


@dataclass
class NodalCurve:
    """``nodes`` are pairs ((i, a), (j, b)); ``divisor`` lists
    (component, point, multiplicity)."""

    n_components: int
    nodes: list
    divisor: list

    def __post_init__(self):
        self.nodes = [((int(i), _point(a)), (int(j), _point(b))) for (i, a), (j, b) in self.nodes]
        merged = {}
        for comp, pt, mult in self.divisor:
            pt = _point(pt)
            key = (int(comp), render(pt) if pt != INF else INF)
            prev = merged.get(key, (pt, 0))
            merged[key] = (pt, prev[1] + int(mult))
        self.divisor = [(c, pt, m) for (c, _), (pt, m) in merged.items() if m]
        for c, _, _ in self.divisor:
            if not 0 <= c < self.n_components:
                raise ValueError(f"divisor on unknown component {c}")
        branch = {}
        for (i, a), (j, b) in self.nodes:
            for c, pt in ((i, a), (j, b)):
                if not 0 <= c < self.n_components:
                    raise ValueError(f"node on unknown component {c}")
                if c == 0 and pt == INF:
                    raise ValueError("the marked point p (infinity of component 0) must be smooth")
                for other in branch.get(c, []):
                    if _same(other, pt):
                        raise ValueError(f"two node branches share the point {render(pt) if pt != INF else pt} on component {c}")
                branch.setdefault(c, []).append(pt)
            if i == j and _same(a, b):
                raise ValueError("a self-node needs two distinct branch points")
        for c, pt, _ in self.divisor:
            for other in branch.get(c, []):
                if _same(other, pt):
                    raise ValueError("divisor must be supported on smooth points, not on a node")
        self.genus = self.arithmetic_genus(range(self.n_components))
        if self.connected_components(range(self.n_components)) != 1:
            raise ValueError("the curve must be connected")
        deg = sum(m for _, _, m in self.divisor)
        if deg != self.genus - 1:
            raise ValueError(f"deg D = {deg} but the arithmetic genus is {self.genus}; need deg D = g - 1")

    # -- combinatorics

    def internal_nodes(self, comps) -> list:
        comps = set(comps)
        return [nd for nd in self.nodes if nd[0][0] in comps and nd[1][0] in comps]

    def connected_components(self, comps) -> int:
        comps = list(comps)
        if not comps:
            return 0
        idx = {c: k for k, c in enumerate(comps)}
        uf = _UnionFind(len(comps))
        for (i, _), (j, _) in self.internal_nodes(comps):
            uf.union(idx[i], idx[j])
        return len({uf.find(k) for k in range(len(comps))})

    def arithmetic_genus(self, comps) -> int:
        """1 - χ(O) = 1 - #components + #nodes on the given components."""
        comps = list(comps)
        if not comps:
            return 0
        return 1 - len(comps) + len(self.internal_nodes(comps))

    def dual_graph_genus(self) -> int:
        return len(self.nodes) - self.n_components + 1

    def divisor_on(self, comps) -> list:
        comps = set(comps)
        return [(c, pt, m) for c, pt, m in self.divisor if c in comps]

    @classmethod
    def from_json(cls, data) -> "NodalCurve":
        p = data.get("p", [0, "inf"])
        if int(p[0]) != 0 or _point(p[1]) != INF:
            raise ValueError("place the marked point p at infinity of component 0")
        return cls(int(data["components"]), [tuple(tuple(b) for b in nd) for nd in data["nodes"]],
                   [tuple(d) for d in data.get("divisor", [])])

    def to_json(self) -> dict:
        def r(pt):
            return pt if pt == INF else render(pt)
        return {
            "components": self.n_components,
            "nodes": [[[i, r(a)], [j, r(b)]] for (i, a), (j, b) in self.nodes],
            "p": [0, "inf"],
            "divisor": [[c, r(pt), str(m)] for c, pt, m in self.divisor],
        }


# ---------------------------------------------------------------- function spaces on P^1


def line_space(var: str, divisor) -> list:
    """Basis of H^0(P^1, E) for E = Σ m_k [pt_k] (points may be INF).

    f = P_-(x) x^k / P_+(x), 0 ≤ k ≤ deg E, with P_± collecting the finite
    points of positive / negative multiplicity.
    """
    x = MultiPoly.variable(var)
    pos = MultiPoly.constant(1)
    neg = MultiPoly.constant(1)
    deg = 0
    for pt, m in divisor:
        deg += m
        if pt == INF:
            continue
        lin = x - to_field(pt)
        if m > 0:
            pos = pos * lin ** m
        else:
            neg = neg * lin ** (-m)
    if deg < 0:
        return []
    return [simplify(RationalFunction(neg * x ** k, pos)) for k in range(deg + 1)]


def evaluate_at(f, var: str, pt):
    """Value of a rational function of ``var`` at a finite point or at infinity."""
    f = to_field(f)
    if pt != INF:
        return simplify(substitute(f, {var: pt}))
    num, den = (f.num, f.den) if isinstance(f, RationalFunction) else (f, MultiPoly.constant(1))
    if not isinstance(num, MultiPoly):
        return simplify(f)
    dn, dd = num.degree(var), den.degree(var) if isinstance(den, MultiPoly) else 0
    if dn > dd:
        raise ValueError("function has a pole at infinity")
    if dn < dd:
        return mpq(0)
    return simplify(RationalFunction(_lead_in(num, var), _lead_in(den, var)))


def _lead_in(p, var):
    if not isinstance(p, MultiPoly):
        return p
    d = p.degree(var)
    return simplify(p.diff(var, d) / math.factorial(d)) if d else p


@dataclass
class FunctionTuple:
    """(f_c)_c on a set of components; f_c is a rational function of x{c}."""

    parts: dict

    def at(self, comp: int, pt):
        return evaluate_at(self.parts[comp], coord(comp), pt)

    def __str__(self):
        return "(" + ", ".join(render(self.parts[c]) for c in sorted(self.parts)) + ")"


def riemann_roch_space(curve: NodalCurve, comps, divisor) -> list:
    """Basis of H^0(X', E) for the subcurve X' on ``comps``: per-component
    bases stacked, then the kernel of the node matching conditions."""
    comps = sorted(set(comps))
    blocks = []
    for c in comps:
        div = [(pt, m) for cc, pt, m in divisor if cc == c]
        for node in curve.internal_nodes(comps):
            for cc, pt in node:
                if cc == c and any(_same(pt, q) for q, _ in div):
                    raise ValueError("divisor must be supported on smooth points, not on a node")
        blocks.append((c, line_space(coord(c), div)))
    columns = [(c, f) for c, basis in blocks for f in basis]
    if not columns:
        return []
    rows = []
    for (i, a), (j, b) in curve.internal_nodes(comps):
        row = []
        for c, f in columns:
            v = mpq(0)
            if c == i:
                v = v + evaluate_at(f, coord(c), a)
            if c == j:
                v = v - evaluate_at(f, coord(c), b)
            row.append(simplify(v))
        rows.append(row)
    out = []
    for vec in kernel_basis(rows, len(columns)):
        parts = {c: mpq(0) for c in comps}
        for (c, f), coef in zip(columns, vec):
            if not is_zero(coef):
                parts[c] = simplify(parts[c] + coef * f)
        out.append(FunctionTuple(parts))
    return out


def check_node_matching(curve: NodalCurve, comps, funcs) -> bool:
    for f in funcs:
        for (i, a), (j, b) in curve.internal_nodes(comps):
            if not is_zero(simplify(f.at(i, a) - f.at(j, b))):
                return False
    return True


# ---------------------------------------------------------------- interpolation


def _poly_from_roots(var, roots) -> MultiPoly:
    x = MultiPoly.variable(var)
    out = MultiPoly.constant(1)
    for r in roots:
        out = out * (x - to_field(r))
    return out


def k_prime_at(roots, r):
    """K'(r) for K = Π(x - root), r one of the roots."""
    acc = mpq(1)
    hit = False
    for s in roots:
        if not hit and _same(s, r):
            hit = True
            continue
        acc = acc * (to_field(r) - to_field(s))
    if not hit:
        raise ValueError("K'(r) requested at a non-root")
    return simplify(acc)


def p_value(divisor0, r):
    """P(r) = Π (r - p_j)^(m_j) over finite divisor points on the component."""
    acc = mpq(1)
    for pt, m in divisor0:
        if pt == INF:
            continue
        acc = acc * (to_field(r) - to_field(pt)) ** m
    return simplify(acc)


def interpolation_basis(divisor0, kappas, pairs, lambdas, mus, H=None, var: str = "x0"):
    """f = K/P [Σ λ_j P(κ_j)/K'(κ_j)/(x-κ_j) + Σ μ_j(...) + H(x)] on P^1 with
    p = ∞; ``divisor0`` lists (point, multiplicity) for finite points."""
    nodes = list(kappas) + [k for pr in pairs for k in pr]
    for a, b in itertools.combinations(nodes, 2):
        if _same(a, b):
            raise ValueError("interpolation nodes must be distinct")
    for q, _ in divisor0:
        if any(_same(q, k) for k in nodes):
            raise ValueError("interpolation nodes must avoid the divisor support")
    x = MultiPoly.variable(var)
    K = _poly_from_roots(var, nodes)
    P = MultiPoly.constant(1)
    Pden = MultiPoly.constant(1)
    for pt, m in divisor0:
        if pt == INF:
            continue
        if m > 0:
            P = P * (x - to_field(pt)) ** m
        else:
            Pden = Pden * (x - to_field(pt)) ** (-m)
    Pfull = RationalFunction(P, Pden)
    bracket = to_field(H) if H is not None else mpq(0)
    for lam, k in zip(lambdas, kappas):
        bracket = bracket + to_field(lam) * p_value(divisor0, k) / k_prime_at(nodes, k) / (x - to_field(k))
    for mu, (k1, k2) in zip(mus, pairs):
        for k in (k1, k2):
            bracket = bracket + to_field(mu) * p_value(divisor0, k) / k_prime_at(nodes, k) / (x - to_field(k))
    return simplify(K / Pfull * bracket)


# ---------------------------------------------------------------- the algorithm


@dataclass
class SolitonBlockMatrix:
    A: list          # ell x a
    B: list          # b x 2b
    kappas: list     # κ_1..κ_a
    pairs: list      # (κ_{j,1}, κ_{j,2})
    basis: list      # Q_1..Q_ell

    @property
    def spectral(self) -> list:
        return list(self.kappas) + [k for pr in self.pairs for k in pr]

    def matrix(self) -> list:
        a, b = len(self.kappas), len(self.pairs)
        rows = [list(r) + [mpq(0)] * (2 * b) for r in self.A]
        rows += [[mpq(0)] * a + list(r) for r in self.B]
        return rows

    def soliton(self) -> SolitonData:
        return SolitonData(self.spectral, A=self.matrix())

    def to_json(self) -> dict:
        return {
            "kappa": [render(k) for k in self.spectral],
            "A": [[render(e) for e in row] for row in self.matrix()],
            "blocks": {"A": [[render(e) for e in row] for row in self.A],
                       "B": [[render(e) for e in row] for row in self.B]},
        }


def _split(curve: NodalCurve):
    others = list(range(1, curve.n_components))
    kappas, zpts, pairs = [], [], []
    for (i, a), (j, b) in curve.nodes:
        if i == 0 and j == 0:
            pairs.append((a, b))
        elif i == 0:
            kappas.append(a)
            zpts.append((j, b))
        elif j == 0:
            kappas.append(b)
            zpts.append((i, a))
    return others, kappas, zpts, pairs


def algorithm61(curve: NodalCurve, basis=None) -> SolitonBlockMatrix:
    """Soliton block matrix of ι(H^0(X, D + ∞p)) up to gauge, or raise
    ConditionFailure naming (**) or (*).

    ``basis`` optionally fixes Q_1..Q_ell (FunctionTuples on components
    1..r); it must lie in and span H^0(X0', D0').
    """
    others, kappas, zpts, pairs = _split(curve)
    D0 = [(pt, m) for c, pt, m in curve.divisor if c == 0]
    D0p = curve.divisor_on(others)
    if others:
        Q = riemann_roch_space(curve, others, D0p)
        expected = sum(m for _, _, m in D0p) + 1 - curve.arithmetic_genus(others)
        if len(Q) != expected:
            raise ConditionFailure("**", f"h^0(X0', D0') = {len(Q)} but deg D0' + 1 - p_a(X0') = {expected}")
        minus_z = D0p + [(c, pt, -1) for c, pt in zpts]
        kernel = riemann_roch_space(curve, others, minus_z)
        if kernel:
            raise ConditionFailure("*", f"H^0(X0', D0' - Z) has dimension {len(kernel)}")
        if basis is not None:
            Q = _check_basis(curve, others, D0p, Q, basis)
    else:
        Q = []
    nodes = list(kappas) + [k for pr in pairs for k in pr]
    A = []
    for q in Q:
        A.append([simplify(q.at(c, z) * p_value(D0, k) / k_prime_at(nodes, k))
                  for (c, z), k in zip(zpts, kappas)])
    B = []
    for j, (k1, k2) in enumerate(pairs):
        row = [mpq(0)] * (2 * len(pairs))
        row[2 * j] = simplify(p_value(D0, k1) / k_prime_at(nodes, k1))
        row[2 * j + 1] = simplify(p_value(D0, k2) / k_prime_at(nodes, k2))
        B.append(row)
    return SolitonBlockMatrix(A, B, kappas, pairs, Q)


def _check_basis(curve, comps, divisor, computed, given):
    from .exact_algebra import rank
    given = [g if isinstance(g, FunctionTuple) else FunctionTuple(dict(g)) for g in given]
    if len(given) != len(computed):
        raise ValueError("prescribed basis has the wrong size")
    if not check_node_matching(curve, comps, given):
        raise ValueError("prescribed basis violates node matching")
    # membership: coefficients against per-component bases must exist; test
    # by rank of evaluations at enough sample points
    samples = [mpq(7, 3) + k for k in range(sum(max(m, 0) for _, _, m in divisor) + 3)]

    def vec(f):
        out = []
        for c in comps:
            for s in samples:
                out.append(f.at(c, s) if not is_zero(f.parts.get(c, 0)) else mpq(0))
        return out

    r_all = rank([vec(f) for f in computed + given])
    if r_all != len(computed) or rank([vec(f) for f in given]) != len(computed):
        raise ValueError("prescribed basis does not span H^0(X0', D0')")
    return given


def irreducible_nodal_soliton(pairs) -> SolitonBlockMatrix:
    """Rational curve with g = len(pairs) nodes and D = (g-1)p."""
    g = len(pairs)
    curve = NodalCurve(1, [((0, a), (0, b)) for a, b in pairs], [(0, INF, g - 1)] if g > 1 else [])
    return algorithm61(curve)


# ---------------------------------------------------------------- frames of nodal curves


def nodal_frame(curve: NodalCurve, n: int, gauge: bool = True, margin: int = 2) -> Frame:
    """Frame of ι(H^0(X, D + N p)) restricted to component 0, expanded in
    z = 1/x0 at p, computed directly from the Riemann-Roch space.  With
    ``gauge`` the space is multiplied by the unit P̃(z)/K̃(z), where
    K/P = x^(deg K - deg P) K̃/P̃."""
    others, kappas, zpts, pairs = _split(curve)
    nodes_on0 = list(kappas) + [k for pr in pairs for k in pr]
    m = sum(mm for c, pt, mm in curve.divisor if c == 0 and pt == INF)
    shift = m + 1
    J = max(n, curve.genus) + margin + 1
    top = n + margin
    # enough poles at p to produce J independent expansions
    extra = J + curve.genus + len(nodes_on0) + 2
    div = list(curve.divisor) + [(0, INF, extra)]
    space = riemann_roch_space(curve, range(curve.n_components), div)
    var = coord(0)
    series = []
    for f in space:
        s = _expand_at_infinity(f.parts[0], var, top - shift)
        if s.valuation() is None:
            raise ValueError("condition (*) fails: a nonzero function vanishes on the component of p")
        series.append(s.shift(shift))
    if gauge:
        unit = _gauge_unit(curve, top + 2 * J + extra)
        series = [s * unit for s in series]
    return Frame.from_series(series, exact_tail=False)


def _expand_at_infinity(f, var, order) -> LaurentSeries:
    """Laurent series in z = 1/var of a rational function, to ``order``."""
    f = to_field(f)
    num, den = (f.num, f.den) if isinstance(f, RationalFunction) else (_as_poly(f), MultiPoly.constant(1))
    dn = num.degree(var)
    dd = den.degree(var)
    # p(x) = x^d * p̃(z) with p̃ a polynomial in z
    def rev(p, d):
        coeffs = [mpq(0)] * (d + 1)
        for exps, c in p.split((var,)).items():
            coeffs[d - exps[0]] = c
        return coeffs
    span = order + dn + 2
    nz = LaurentSeries(0, rev(num, dn), span)
    dz = LaurentSeries(0, rev(den, dd), span)
    out = (nz * series_inverse(dz, span)).shift(dd - dn)
    return out.truncate(order)


def _as_poly(f):
    return f if isinstance(f, MultiPoly) else MultiPoly.constant(f)


def _gauge_unit(curve: NodalCurve, order: int) -> LaurentSeries:
    others, kappas, zpts, pairs = _split(curve)
    nodes = list(kappas) + [k for pr in pairs for k in pr]
    k_t = LaurentSeries(0, [1], order)
    for r in nodes:
        k_t = k_t * LaurentSeries(0, [1, -to_field(r)], order)
    p_t = LaurentSeries(0, [1], order)
    for c, pt, m in curve.divisor:
        if c != 0 or pt == INF:
            continue
        fac = LaurentSeries(0, [1, -to_field(pt)], order)
        if m < 0:
            fac = series_inverse(fac, order)
        for _ in range(abs(m)):
            p_t = p_t * fac
    return p_t * series_inverse(k_t, order)


# ---------------------------------------------------------------- numerics


def _numeric(v) -> float:
    v = simplify(to_field(v))
    if isinstance(v, (MultiPoly, RationalFunction)):
        raise ValueError("numeric evaluation needs rational soliton data; substitute all symbols first")
    return float(v)


def kp_solution_grid(S: SolitonData, xs, ys, ts) -> np.ndarray:
    """p = 2 ∂²_x log τ on the grid xs × ys × ts (array of shape
    (len(xs), len(ys), len(ts))); NaN marks samples where τ vanishes.

    With τ = Σ c_I e^(θ_I), p = 2 Σ_{I<J} c_I c_J (α_I - α_J)² e^(θ_I+θ_J) / τ²,
    α_I the x-frequency of θ_I; every exponential is shifted by the largest
    one before evaluation.
    """
    from .sato import soliton_tau
    combined = soliton_tau(S).combined()
    terms = [(_numeric(c), tuple(_numeric(f) for f in freq)) for freq, c in combined.items()]
    X, Y, T = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), np.asarray(ts, float), indexing="ij")
    if not terms:
        return np.full(X.shape, np.nan)
    theta = np.stack([a * X + b * Y + c * T for _, (a, b, c) in terms])
    theta = theta - theta.max(axis=0)
    w = np.exp(theta)
    coef = np.array([c for c, _ in terms])[:, None, None, None]
    alpha = [f[0] for _, f in terms]
    S0 = (coef * w).sum(axis=0)
    num = np.zeros(X.shape)
    for i, j in itertools.combinations(range(len(terms)), 2):
        num += terms[i][0] * terms[j][0] * (alpha[i] - alpha[j]) ** 2 * w[i] * w[j]
    scale = np.abs(coef * w).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 2 * num / S0 ** 2
    singular = np.abs(S0) <= 1e-14 * scale
    p[singular] = np.nan
    return p


def parse_range(spec: str) -> np.ndarray:
    """``a:b:step`` (inclusive of b up to rounding) or a single value."""
    parts = spec.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"bad range {spec!r}; expected start:stop:step")
    a, b, h = map(float, parts)
    if h <= 0 or b < a:
        raise ValueError(f"bad range {spec!r}")
    n = int(math.floor((b - a) / h + 1e-9)) + 1
    return a + h * np.arange(n)


def grid_csv(xs, ys, ts, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "t", "p"])
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            for k, t in enumerate(ts):
                v = values[i, j, k]
                w.writerow([repr(float(x)), repr(float(y)), repr(float(t)), "nan" if np.isnan(v) else repr(float(v))])
    return buf.getvalue()
