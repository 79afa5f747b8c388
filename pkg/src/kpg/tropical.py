"""Metric graphs, their tropical Riemann matrices, and the Voronoi/Delaunay
geometry of the associated lattice quadratic form.

All geometry is exact: points are integer tuples and quadratic forms have
rational entries.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from math import gcd, isqrt

from gmpy2 import mpq

from .exact_algebra import (QQ, det_exact, is_scalar, kernel_basis, parse_expr,
                            rank, simplify)


@dataclass(frozen=True)
class MetricGraph:
    n_vertices: int
    edges: tuple  # ((v, w, length), ...)
    cycles: tuple  # rows of the cycle matrix, one integer per edge

    def __post_init__(self):
        E = len(self.edges)
        for v, w, length in self.edges:
            if not (0 <= v < self.n_vertices and 0 <= w < self.n_vertices):
                raise ValueError(f"edge ({v},{w}) refers to a missing vertex")
            if is_scalar(length) and QQ(length) <= 0:
                raise ValueError("edge lengths must be positive")
        for row in self.cycles:
            if len(row) != E:
                raise ValueError("cycle rows must have one entry per edge")
            if not is_cycle(self.n_vertices, self.edges, row):
                raise ValueError(f"{list(row)} is not a cycle of the graph")
        if len(self.cycles) != self.genus:
            raise ValueError(f"expected {self.genus} cycles, got {len(self.cycles)}")
        if self.cycles and rank([list(r) for r in self.cycles]) < self.genus:
            raise ValueError("cycle basis degenerate")

    @property
    def genus(self) -> int:
        return len(self.edges) - self.n_vertices + _components(self.n_vertices, self.edges)

    @classmethod
    def from_json(cls, data) -> "MetricGraph":
        if isinstance(data, str):
            data = json.loads(data)
        edges = tuple((int(v), int(w), parse_expr(str(length))) for v, w, length in data["edges"])
        cycles = data.get("cycles")
        if cycles is None:
            cycles = fundamental_cycles(int(data["vertices"]), edges)
        return cls(int(data["vertices"]), edges, tuple(tuple(int(x) for x in r) for r in cycles))

    def to_json(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "edges": [[v, w, str(simplify(length))] for v, w, length in self.edges],
            "cycles": [list(r) for r in self.cycles],
        }

    def relabel(self, perm) -> "MetricGraph":
        """Reorder edges: new edge i is old edge perm[i]."""
        edges = tuple(self.edges[p] for p in perm)
        cycles = tuple(tuple(r[p] for p in perm) for r in self.cycles)
        return MetricGraph(self.n_vertices, edges, cycles)


def _components(n: int, edges) -> int:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = n
    for v, w, *_ in edges:
        rv, rw = find(v), find(w)
        if rv != rw:
            parent[rv] = rw
            comps -= 1
    return comps


def is_cycle(n: int, edges, row) -> bool:
    """Signed edge vector with zero boundary (edge e oriented v -> w)."""
    flow = [0] * n
    for (v, w, *_), c in zip(edges, row):
        flow[v] -= c
        flow[w] += c
    return not any(flow)


def fundamental_cycles(n: int, edges) -> list:
    """Cycle basis from a breadth-first spanning forest, one cycle per
    non-tree edge, oriented along that edge."""
    seen = [False] * n
    parent_edge = [None] * n
    tree = set()
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        queue = [root]
        while queue:
            v = queue.pop(0)
            for e, (a, b, *_) in enumerate(edges):
                if a == b or e in tree:
                    continue
                other = b if a == v else a if b == v else None
                if other is None or seen[other]:
                    continue
                seen[other] = True
                tree.add(e)
                parent_edge[other] = e
                queue.append(other)

    def to_root(v):
        # signed edge vector of the tree path v -> root
        vec = [0] * len(edges)
        while parent_edge[v] is not None:
            e = parent_edge[v]
            a, b = edges[e][0], edges[e][1]
            vec[e] += 1 if a == v else -1
            v = b if a == v else a
        return vec

    rows = []
    for e, (a, b, *_) in enumerate(edges):
        if e in tree:
            continue
        row = [0] * len(edges)
        row[e] = 1
        if a != b:
            # a -> b along e, then b -> root -> a through the tree
            for i, (x, y) in enumerate(zip(to_root(b), to_root(a))):
                row[i] += x - y
        rows.append(row)
    return rows


def stable_graphs(g: int) -> list:
    """All connected multigraphs of genus g (loops allowed) with every
    vertex of degree at least 3, up to isomorphism, with unit edge lengths.

    These are the combinatorial types of genus-g metric graphs once
    leaves and degree-2 vertices are pruned.
    """
    if g < 2:
        raise ValueError("stable graphs need genus at least 2")
    out = []
    for V in range(1, 2 * g - 1):
        E = V + g - 1
        slots = list(itertools.combinations_with_replacement(range(V), 2))
        seen = set()
        for edges in itertools.combinations_with_replacement(slots, E):
            deg = [0] * V
            for a, b in edges:
                deg[a] += 1
                deg[b] += 1
            if min(deg) < 3 or _components(V, edges) != 1:
                continue
            key = min(tuple(sorted(tuple(sorted((p[a], p[b]))) for a, b in edges))
                      for p in itertools.permutations(range(V)))
            if key in seen:
                continue
            seen.add(key)
            es = tuple((a, b, mpq(1)) for a, b in key)
            out.append(MetricGraph(V, es, tuple(tuple(r) for r in fundamental_cycles(V, es))))
    return out


def riemann_matrix(G: MetricGraph):
    """Q = Λ Δ Λᵀ with Δ the diagonal matrix of edge lengths."""
    lam = G.cycles
    lengths = [e[2] for e in G.edges]
    g = len(lam)
    Q = [[simplify(sum((lam[i][e] * lam[j][e] * lengths[e] for e in range(len(lengths))), mpq(0)))
          for j in range(g)] for i in range(g)]
    if g and rank(Q) < g:
        raise ValueError("cycle basis degenerate")
    return Q


# ---------------------------------------------------------------- lattice geometry


def qform(Q, c, d=None):
    d = c if d is None else d
    return sum((Q[i][j] * c[i] * d[j] for i in range(len(c)) for j in range(len(d))), mpq(0))


def _check_numeric(Q):
    if not all(is_scalar(e) for row in Q for e in row):
        raise ValueError("lattice geometry needs a numeric quadratic form")
    return [[QQ(e) for e in row] for row in Q]


def is_positive_definite(Q) -> bool:
    Q = _check_numeric(Q)
    return all(det_exact([row[:k] for row in Q[:k]]) > 0 for k in range(1, len(Q) + 1))


def _inverse_trace(Q) -> mpq:
    n = len(Q)
    d = det_exact(Q)
    tr = mpq(0)
    for i in range(n):
        minor = [[Q[r][c] for c in range(n) if c != i] for r in range(n) if r != i]
        tr += det_exact(minor)
    return tr / d


def _ceil_sqrt(x: mpq) -> int:
    # smallest integer b with b*b >= x
    if x <= 0:
        return 0
    n, d = int(x.numerator), int(x.denominator)
    b = isqrt(n // d)
    while b * b * d < n:
        b += 1
    return b


def search_box(Q, a) -> int:
    """Coordinate bound B such that every c with cᵀQc <= 4 aᵀQa has |c_i| <= B."""
    return _ceil_sqrt(4 * qform(Q, a) * _inverse_trace(Q))


def _candidates(Q, a):
    g = len(Q)
    bound = 4 * qform(Q, a)
    B = search_box(Q, a)
    for c in itertools.product(range(-B, B + 1), repeat=g):
        if qform(Q, c) <= bound:
            yield c


def in_voronoi(Q, a) -> bool:
    """aᵀQa <= (a-c)ᵀQ(a-c) for every integer vector c."""
    Q = _check_numeric(Q)
    a = [QQ(x) for x in a]
    for c in _candidates(Q, a):
        # (a-c)Q(a-c) - aQa = cQc - 2 cQa
        if qform(Q, c) - 2 * qform(Q, c, a) < 0:
            return False
    return True


def delaunay_set(Q, a) -> list:
    """Lattice points c with aᵀQa = (a-c)ᵀQ(a-c), sorted."""
    Q = _check_numeric(Q)
    a = [QQ(x) for x in a]
    out = []
    for c in _candidates(Q, a):
        gap = qform(Q, c) - 2 * qform(Q, c, a)
        if gap < 0:
            raise ValueError("point is not in the Voronoi cell")
        if gap == 0:
            out.append(tuple(c))
    return sorted(out)


def voronoi_vertices(Q, box: int = 2) -> list:
    """Vertices of the Voronoi cell of 0.

    Each g-subset of the inequalities 2cᵀQa <= cᵀQc (c in a small box) is
    solved exactly and the solution kept when it passes the full
    ``in_voronoi`` test.
    """
    Q = _check_numeric(Q)
    g = len(Q)
    vecs = [c for c in itertools.product(range(-box, box + 1), repeat=g) if any(c)]
    rows = [([2 * qform(Q, c, [1 if k == j else 0 for k in range(g)]) for j in range(g)], qform(Q, c))
            for c in vecs]
    found = set()
    for combo in itertools.combinations(range(len(rows)), g):
        A = [rows[i][0] for i in combo]
        d = det_exact(A)
        if d == 0:
            continue
        b = [rows[i][1] for i in combo]
        sol = []
        for j in range(g):
            Aj = [r[:j] + [bj] + r[j + 1:] for r, bj in zip(A, b)]
            sol.append(det_exact(Aj) / d)
        sol = tuple(sol)
        if sol in found:
            continue
        if all(sum(r[0][j] * sol[j] for j in range(g)) <= r[1] for r in rows) and in_voronoi(Q, sol):
            found.add(sol)
    return sorted(found)


# ---------------------------------------------------------------- polytopes


@dataclass(frozen=True)
class DelaunayPolytope:
    vertices: tuple
    facets: tuple  # ((normal, offset), ...) meaning normal . x <= offset

    @property
    def signature(self):
        return (len(self.vertices), len(self.facets))


def _primitive(vec):
    dens = 1
    for v in vec:
        dens = dens * int(QQ(v).denominator) // gcd(dens, int(QQ(v).denominator))
    ints = [int(QQ(v) * dens) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    return [v // g for v in ints] if g else ints


def affine_dimension(points) -> int:
    if not points:
        return -1
    p0 = points[0]
    diffs = [[QQ(p[i] - p0[i]) for i in range(len(p0))] for p in points[1:]]
    return rank(diffs) if diffs else 0


def facets_of(points) -> tuple:
    """Facets of a full-dimensional lattice polytope given by its vertices."""
    pts = [tuple(int(x) for x in p) for p in points]
    g = len(pts[0])
    if affine_dimension(pts) != g:
        raise ValueError("polytope is not full-dimensional")
    found = set()
    for sub in itertools.combinations(pts, g):
        base = sub[0]
        rows = [[QQ(p[i] - base[i]) for i in range(g)] for p in sub[1:]]
        if g == 1:
            normal = [1]
        else:
            ker = kernel_basis(rows, g)
            if len(ker) != 1:
                continue
            normal = _primitive(ker[0])
        off = sum(n * b for n, b in zip(normal, base))
        vals = [sum(n * x for n, x in zip(normal, p)) for p in pts]
        if all(v <= off for v in vals):
            found.add((tuple(normal), off))
        if all(v >= off for v in vals):
            found.add((tuple(-n for n in normal), -off))
    return tuple(sorted(found))


def _box_bounds(cols):
    """Bounds on |c_i| for {c : 0 <= λᵀc <= 1} using g independent columns."""
    g = len(cols[0])
    basis = []
    for col in cols:
        trial = basis + [list(col)]
        if rank(trial) == len(trial):
            basis = trial
        if len(basis) == g:
            break
    if len(basis) < g:
        raise ValueError("system is unbounded: cycle matrix is rank deficient")
    # c = M^{-1} s with rows of M the chosen columns and s in [0,1]^g
    d = det_exact(basis)
    bounds = []
    for i in range(g):
        total = mpq(0)
        for j in range(g):
            # entry (i, j) of M^{-1} = cofactor(j, i) / det
            minor = [[basis[r][c] for c in range(g) if c != i] for r in range(g) if r != j]
            cof = det_exact(minor) * (-1 if (i + j) % 2 else 1)
            total += abs(QQ(cof) / d)
        bounds.append(int(total) + 1)
    return bounds


def delaunay_polytope_from_orientation(cycle_matrix, signs=None):
    """Lattice polytope {c : 0 <= s_e λ_eᵀ c <= 1 for all edges e}.

    ``cycle_matrix`` is g x E; ``signs`` flips the column orientations.
    Returns a ``DelaunayPolytope`` when full-dimensional, otherwise the bare
    list of lattice points.
    """
    lam = [list(r) for r in cycle_matrix]
    g = len(lam)
    E = len(lam[0]) if lam else 0
    signs = signs or [1] * E
    cols = [tuple(signs[e] * lam[i][e] for i in range(g)) for e in range(E)]
    cols = [c for c in cols if any(c)]
    if not cols or rank([list(c) for c in cols]) < g:
        raise ValueError("system is unbounded: cycle matrix is rank deficient")
    bounds = _box_bounds(cols)
    pts = []
    for c in itertools.product(*[range(-b, b + 1) for b in bounds]):
        vals = [sum(col[i] * c[i] for i in range(g)) for col in cols]
        if all(0 <= v <= 1 for v in vals):
            active = [list(col) for col, v in zip(cols, vals)]
            if rank(active) < g:
                raise ValueError(f"lattice point {c} is not a vertex")
            pts.append(tuple(c))
    if affine_dimension(pts) != g:
        return pts
    return DelaunayPolytope(tuple(pts), facets_of(pts))


def classify_delaunay(G) -> list:
    """Sorted distinct (vertex count, facet count) pairs over all orientations."""
    lam = G.cycles if isinstance(G, MetricGraph) else G
    lam = [list(r) for r in lam]
    g = len(lam)
    if g > 4:
        raise ValueError("classification certified only for g ≤ 4")
    E = len(lam[0])
    live = [e for e in range(E) if any(lam[i][e] for i in range(g))]
    types = set()
    if not live:
        return []
    # s and -s give the polytopes P and -P, so fix the first live sign
    for rest in itertools.product((1, -1), repeat=len(live) - 1):
        signs = [1] * E
        for e, s in zip(live[1:], rest):
            signs[e] = s
        poly = delaunay_polytope_from_orientation(lam, signs)
        if isinstance(poly, DelaunayPolytope):
            types.add(poly.signature)
    return sorted(types)


@dataclass(frozen=True)
class ThetaLimit:
    points: tuple
    exponents: tuple  # q_c = ½ cᵀ R0 c, exact

    def coefficients(self):
        """Numeric a_c = exp(q_c); only for numeric R0."""
        import math
        return [math.exp(float(QQ(q))) for q in self.exponents]


def theta_limit(Q, a, R0) -> ThetaLimit:
    pts = delaunay_set(Q, a)
    exps = tuple(simplify(qform(R0, c) / 2) for c in pts)
    return ThetaLimit(tuple(pts), exps)


def delaunay_orbits(Q, box: int = 2) -> list:
    """Voronoi vertices grouped up to translating the Delaunay set by a
    lattice vector and central symmetry.  Returns ``(vertex, points)`` pairs,
    one representative per orbit."""
    seen = set()
    out = []
    for a in voronoi_vertices(Q, box):
        pts = delaunay_set(Q, a)
        keys = []
        for sgn in (1, -1):
            p = sorted(tuple(sgn * x for x in c) for c in pts)
            base = p[0]
            keys.append(tuple(tuple(x - b for x, b in zip(c, base)) for c in p))
        key = min(keys)
        if key in seen:
            continue
        seen.add(key)
        out.append((a, pts))
    return out
