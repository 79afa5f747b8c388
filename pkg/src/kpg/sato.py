"""Sato Grassmannian tools: partitions, Maya diagrams, frames and their
Plücker coordinates, Schur polynomials in (x, y, t), truncated tau functions,
the Hirota operator on polynomials, and (k, n)-solitons.

A frame column is a Laurent series in z; row index r of the coefficient
matrix holds the coefficient of z^(r+1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import mpq

from .exact_algebra import (LaurentSeries, MultiPoly, PrecisionError,
                            RationalFunction, det_exact, is_zero, rank,
                            simplify, to_field)
from .hirota import ExpSum

WEIGHTS = {"x": 1, "y": 2, "t": 3}
X, Y, T = (MultiPoly.variable(v) for v in "xyt")


# ---------------------------------------------------------------- partitions


def check_partition(lam) -> tuple:
    lam = tuple(int(p) for p in lam)
    if any(p <= 0 for p in lam) or any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"{lam} is not a partition")
    return lam


def partitions(n: int, max_part: int | None = None):
    """Partitions of n in lexicographic order, e.g. 1111, 211, 22, 31, 4."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    yield from sorted(out)


def partitions_up_to(n: int, max_parts: int | None = None):
    for size in range(n + 1):
        for lam in partitions(size):
            if max_parts is None or len(lam) <= max_parts:
                yield lam


def partition_label(lam) -> str:
    if not lam:
        return "∅"
    if all(p < 10 for p in lam):
        return "".join(str(p) for p in lam)
    return ",".join(str(p) for p in lam)


def maya(lam, length: int | None = None) -> tuple:
    """First ``length`` entries m_i = λ_i - i (default: number of parts)."""
    lam = check_partition(lam)
    length = len(lam) if length is None else length
    return tuple((lam[i] if i < len(lam) else 0) - (i + 1) for i in range(length))


def partition_from_maya(m) -> tuple:
    m = tuple(m)
    if any(a <= b for a, b in zip(m, m[1:])):
        raise ValueError("Maya entries must be strictly decreasing")
    lam = tuple(mi + i + 1 for i, mi in enumerate(m))
    if any(p < 0 for p in lam):
        raise ValueError("not a Maya diagram of a partition")
    return tuple(p for p in lam if p > 0)


# ---------------------------------------------------------------- frames


class Frame:
    """Normalized frame of a point of the Sato Grassmannian.

    ``columns[j-1][r - row_lo]`` is the entry in row r of column j for rows
    ``row_lo = -J`` to ``row_hi``.  Columns are in column-echelon form: the
    leading (lowest nonzero) row decreases strictly with j, every leading
    coefficient is 1, and column j has leading row -j for j > ell.  When
    ``exact_tail`` is set, columns beyond J are the unit vectors at row -j;
    otherwise they exist but are not stored.
    """

    def __init__(self, columns, row_hi: int, exact_tail: bool):
        self.columns = [[simplify(e) for e in col] for col in columns]
        self.J = len(self.columns)
        self.row_lo = -self.J
        self.row_hi = row_hi
        self.exact_tail = exact_tail
        for col in self.columns:
            if len(col) != row_hi - self.row_lo + 1:
                raise ValueError("column length does not match the row range")
        leads = self.leading_rows()
        if any(a <= b for a, b in zip(leads, leads[1:])):
            raise ValueError("leading rows must decrease strictly")
        for j, r in enumerate(leads, start=1):
            if self.entry(r, j) != 1:
                raise ValueError("leading coefficients must be 1")
        if self.J and leads[-1] != -self.J:
            raise ValueError("last stored column must lead at row -J")
        self.ell = max((j for j, r in enumerate(leads, start=1) if r != -j), default=0)

    def leading_rows(self) -> list:
        out = []
        for col in self.columns:
            r = next((i for i, e in enumerate(col) if not is_zero(e)), None)
            if r is None:
                raise PrecisionError("insufficient frame precision: column vanishes on stored rows")
            out.append(r + self.row_lo)
        return out

    def entry(self, r: int, j: int):
        if j > self.J:
            if not self.exact_tail:
                raise PrecisionError("insufficient frame precision: column beyond stored range")
            return mpq(1) if r == -j else mpq(0)
        if r > self.row_hi:
            raise PrecisionError("insufficient frame precision: row beyond stored range")
        if r < self.row_lo:
            return mpq(0)
        return self.columns[j - 1][r - self.row_lo]

    def column_series(self, j: int, order: int | None = None) -> LaurentSeries:
        """Column j as a Laurent series in z (rows up to row_hi)."""
        top = self.row_hi if order is None else min(self.row_hi, order - 1)
        if j > self.J:
            return LaurentSeries.monomial(1 - j, top + 1)
        return LaurentSeries(self.row_lo + 1, self.columns[j - 1][: top - self.row_lo + 1], top + 1)

    @classmethod
    def from_series(cls, series, exact_tail: bool = False) -> "Frame":
        """Normalize a basis given as Laurent series by exact column operations."""
        return _echelon(list(series), exact_tail)

    @classmethod
    def identity(cls, rows: int = 0) -> "Frame":
        return cls([], rows, True)

    def to_json(self) -> dict:
        from .exact_algebra import render
        return {
            "rows": [self.row_lo, self.row_hi],
            "ell": self.ell,
            "exact_tail": self.exact_tail,
            "columns": [[render(e) for e in col] for col in self.columns],
        }

    @classmethod
    def from_json(cls, data) -> "Frame":
        from .exact_algebra import parse_expr
        if "series" in data:
            series = []
            for s in data["series"]:
                series.append(LaurentSeries(int(s["start"]), [parse_expr(str(c)) for c in s["coeffs"]],
                                            int(s["order"])))
            return cls.from_series(series, bool(data.get("exact_tail", False)))
        cols = [[parse_expr(str(e)) for e in col] for col in data["columns"]]
        return cls(cols, int(data["rows"][1]), bool(data.get("exact_tail", False)))


def _echelon(series: list, exact_tail: bool) -> Frame:
    if not series:
        return Frame.identity()
    order = min(s.order for s in series)
    row_hi = order - 1
    # column data as dict row -> entry on the common precision
    cols = []
    for s in series:
        col = {}
        for e, c in s.terms().items():
            if e <= order:
                col[e - 1] = c
        cols.append(col)

    def lead(col):
        if not col:
            raise PrecisionError("insufficient frame precision: a basis element vanishes to the known order")
        return min(col)

    while True:
        cols.sort(key=lead, reverse=True)
        clash = None
        for i in range(len(cols) - 1):
            if lead(cols[i]) == lead(cols[i + 1]):
                clash = i
                break
        if clash is None:
            break
        a, b = cols[clash], cols[clash + 1]
        r = lead(a)
        f = simplify(to_field(b[r]) / to_field(a[r]))
        new = dict(b)
        for row, val in a.items():
            v = simplify(new.get(row, 0) - f * val)
            if is_zero(v):
                new.pop(row, None)
            else:
                new[row] = v
        cols[clash + 1] = new
    J = len(cols)
    leads = [lead(c) for c in cols]
    if leads[-1] < -J:
        raise ValueError("basis does not match a point of the Sato Grassmannian: leading rows too low")
    if leads[-1] != -J and not exact_tail:
        raise ValueError("basis is incomplete: last column does not lead at row -J")
    out = []
    for col, r in zip(cols, leads):
        inv = 1 / to_field(col[r])
        out.append({row: simplify(v * inv) for row, v in col.items()})
    J = len(out)
    row_lo = -J
    columns = []
    for col in out:
        if min(col) < row_lo:
            raise ValueError("column leads below the frame's row range")
        columns.append([col.get(r, mpq(0)) for r in range(row_lo, row_hi + 1)])
    return Frame(columns, row_hi, exact_tail)


def plucker(frame: Frame, lam, q: int | None = None):
    """ξ_λ: determinant of rows m_1..m_q and columns 1..q of the frame,
    q = max(#parts, ell)."""
    lam = check_partition(lam)
    q_min = max(len(lam), frame.ell)
    q = q_min if q is None else q
    if q < q_min:
        raise ValueError("q below the stable size")
    rows = maya(lam, q)
    if rows and rows[0] > frame.row_hi:
        raise PrecisionError("insufficient frame precision: row beyond stored range")
    if q > frame.J and not frame.exact_tail:
        raise PrecisionError("insufficient frame precision: column beyond stored range")
    M = [[frame.entry(r, j) for j in range(1, q + 1)] for r in rows]
    return simplify(det_exact(M))


def plucker_vector(frame: Frame, n: int, max_parts: int | None = None) -> dict:
    return {lam: plucker(frame, lam) for lam in partitions_up_to(n, max_parts)}


# ---------------------------------------------------------------- Schur polynomials


@lru_cache(maxsize=None)
def _phi_cached(N: int) -> tuple:
    phi = [MultiPoly.constant(1)]
    for j in range(1, N + 1):
        acc = X * phi[j - 1]
        if j >= 2:
            acc = acc + 2 * Y * phi[j - 2]
        if j >= 3:
            acc = acc + 3 * T * phi[j - 3]
        phi.append(acc / j)
    return tuple(phi)


def elementary_schur(N: int) -> list:
    """φ_0..φ_N with exp(xλ + yλ² + tλ³) = Σ φ_j λ^j.

    From the λ-derivative of the generating series:
    j φ_j = x φ_{j-1} + 2y φ_{j-2} + 3t φ_{j-3}.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    return list(_phi_cached(N))


@lru_cache(maxsize=None)
def schur_sigma(lam) -> MultiPoly:
    """Jacobi-Trudi determinant det(φ_{λ_i - i + j})."""
    lam = check_partition(lam)
    if not lam:
        return MultiPoly.constant(1)
    k = len(lam)
    phi = _phi_cached(lam[0] + k)

    def p(i):
        return phi[i] if i >= 0 else MultiPoly()

    M = [[p(lam[i] - i + j) for j in range(k)] for i in range(k)]
    return simplify(det_exact(M)) if k > 1 else M[0][0]


def tau_truncated(frame: Frame, n: int):
    """Σ_{|λ| ≤ n} ξ_λ σ_λ(x, y, t).

    The ∅ term is included whenever ξ_∅ is nonzero, so the identity frame
    gives τ = 1.
    """
    total = MultiPoly()
    for lam in partitions_up_to(n):
        xi = plucker(frame, lam)
        if is_zero(xi):
            continue
        total = total + to_field(xi) * schur_sigma(lam)
    return simplify(total)


def hirota_apply(tau):
    """ττ_xxxx - 4τ_xxxτ_x + 3τ_xx² + 4τ_xτ_t - 4ττ_xt + 3ττ_yy - 3τ_y².

    Accepts a polynomial, or a rational function whose denominator is free
    of x, y, t (the result then has the squared denominator).
    """
    if isinstance(tau, RationalFunction):
        if set(tau.den.free_vars()) & set("xyt"):
            raise ValueError("denominator must not involve x, y, t")
        return simplify(RationalFunction(hirota_apply(tau.num), tau.den * tau.den))
    tau = to_field(tau)
    if not isinstance(tau, MultiPoly):
        return mpq(0)
    tx = tau.diff("x")
    txx = tx.diff("x")
    txxx = txx.diff("x")
    txxxx = txxx.diff("x")
    tt = tau.diff("t")
    txt = tx.diff("t")
    ty = tau.diff("y")
    tyy = ty.diff("y")
    out = (tau * (txxxx - 4 * txt + 3 * tyy) - 4 * txxx * tx + 3 * txx * txx
           + 4 * tx * tt - 3 * ty * ty)
    return simplify(out)


def lowest_weighted_part(poly, weights=WEIGHTS):
    """``(degree, part)`` of the lowest weighted degree in x, y, t; other
    variables carry weight 0."""
    if isinstance(poly, RationalFunction):
        poly = poly.num
    poly = to_field(poly)
    if not isinstance(poly, MultiPoly) or poly.is_zero():
        return None, poly
    d = poly.weighted_degree(weights, lowest=True)
    return d, poly.weighted_part(d, weights)


def _xyt_name(exps) -> str:
    return "".join(v if e == 1 else f"{v}^{e}" for v, e in zip("xyt", exps) if e) or "1"


def leading_xyt_monomial(part) -> str:
    """Largest x, y, t monomial of ``part`` in lex order with t > y > x."""
    exps = max(part.split(("x", "y", "t")), key=lambda e: (e[2], e[1], e[0]))
    return _xyt_name(exps)


def xyt_monomials(part) -> list:
    """Monomials in x, y, t occurring in ``part``, as strings like 'xt^2'."""
    out = []
    for exps, _ in sorted(part.split(("x", "y", "t")).items(), reverse=True):
        out.append(_xyt_name(exps))
    return out


# ---------------------------------------------------------------- solitons


def delta_lambda(kappas, lam):
    """Generalized Vandermonde Δ_λ(κ): with λ padded to k = len(κ) parts,
    the determinant with rows κ^(λ_{k-r} + r), r = 0..k-1, so that
    Δ_∅ = Π_{i<j}(κ_j - κ_i) and Δ_λ = s_λ(κ) Δ_∅."""
    k = len(kappas)
    lam = check_partition(lam)
    if len(lam) > k:
        return mpq(0)
    padded = list(lam) + [0] * (k - len(lam))
    M = [[to_field(kap) ** (padded[k - 1 - r] + r) for kap in kappas] for r in range(k)]
    return simplify(det_exact(M))


@dataclass
class SolitonData:
    kappa: list
    A: list | None = None
    p: dict | None = None  # k-subsets (0-based tuples) -> Plücker coordinate
    check: bool = True     # reject p vectors off the Grassmannian (k <= 3, n <= 6)

    def __post_init__(self):
        self.kappa = [to_field(k) for k in self.kappa]
        for i, j in itertools.combinations(range(len(self.kappa)), 2):
            if is_zero(simplify(self.kappa[i] - self.kappa[j])):
                raise ValueError("kappa values must be pairwise distinct")
        if self.A is None and self.p is None:
            raise ValueError("soliton data needs a matrix A or a Plücker vector")
        if self.A is not None:
            self.A = [[to_field(e) for e in row] for row in self.A]
            if any(len(row) != len(self.kappa) for row in self.A):
                raise ValueError("A must have one column per kappa")
            if len(self.A) > len(self.kappa):
                raise ValueError("A has more rows than columns")
            if rank(self.A) < len(self.A):
                raise ValueError("A must have full row rank")
        else:
            self.p = {tuple(I): to_field(v) for I, v in self.p.items()}
            ks = {len(I) for I in self.p}
            if len(ks) != 1:
                raise ValueError("Plücker vector indices must all have size k")
            if self.check and self.k <= 3 and self.n <= 6 and not all(
                    is_zero(r) for r in plucker_relations(self.plucker_vector(), self.n)):
                raise ValueError("vector violates the Plücker relations")

    @property
    def n(self) -> int:
        return len(self.kappa)

    @property
    def k(self) -> int:
        return len(self.A) if self.A is not None else len(next(iter(self.p)))

    def plucker_vector(self) -> dict:
        if self.p is not None:
            return {I: self.p.get(I, mpq(0)) for I in itertools.combinations(range(self.n), self.k)}
        return {I: simplify(det_exact([[row[i] for i in I] for row in self.A]))
                for I in itertools.combinations(range(self.n), self.k)}

    @classmethod
    def from_json(cls, data) -> "SolitonData":
        from .exact_algebra import parse_expr
        kappa = [parse_expr(str(k)) for k in data["kappa"]]
        if "A" in data:
            A = [[parse_expr(str(e)) for e in row] for row in data["A"]]
            return cls(kappa, A=A)
        p = {tuple(int(i) - 1 for i in key.split(",")): parse_expr(str(v))
             for key, v in data["p"].items()}
        return cls(kappa, p=p)


def plucker_relations(p: dict, n: int) -> list:
    """All quadratic Plücker relations on a vector indexed by sorted
    k-subsets of range(n): for |I| = k-1 and |J| = k+1,
    Σ_l (-1)^l p(I ∪ j_l) p(J minus j_l)."""
    if not p:
        return []
    k = len(next(iter(p)))

    def coord(idx):
        if len(set(idx)) < len(idx):
            return 0
        sign = 1
        idx = list(idx)
        for i in range(len(idx)):
            for j in range(i + 1, len(idx)):
                if idx[i] > idx[j]:
                    sign = -sign
        return sign * to_field(p.get(tuple(sorted(idx)), 0))

    out = []
    for I in itertools.combinations(range(n), k - 1):
        for J in itertools.combinations(range(n), k + 1):
            acc = 0
            for l, j in enumerate(J):
                a = coord(I + (j,))
                if is_zero(a):
                    continue
                acc = acc + (-1) ** l * a * coord(J[:l] + J[l + 1:])
            out.append(simplify(acc))
    return out


def soliton_tau(S: SolitonData) -> ExpSum:
    """Σ_I p_I Δ_∅(κ_I) exp[x Σκ + y Σκ² + t Σκ³] over k-subsets I."""
    terms = []
    for I, pI in S.plucker_vector().items():
        if is_zero(pI):
            continue
        ks = [S.kappa[i] for i in I]
        coeff = simplify(pI * delta_lambda(ks, ()))
        freq = tuple(simplify(sum((k ** e for k in ks), mpq(0))) for e in (1, 2, 3))
        terms.append((coeff, freq))
    return ExpSum(terms)


def soliton_residual(S: SolitonData) -> dict:
    return soliton_tau(S).hirota_residual()


def schur_coeffs(S: SolitonData, n: int) -> dict:
    """c_λ = Σ_I p_I Δ_λ(κ_I) for all |λ| ≤ n (zero beyond k parts)."""
    pv = [(I, pI) for I, pI in S.plucker_vector().items() if not is_zero(pI)]
    out = {}
    for lam in partitions_up_to(n):
        if len(lam) > S.k:
            out[lam] = mpq(0)
            continue
        out[lam] = simplify(sum((pI * delta_lambda([S.kappa[i] for i in I], lam) for I, pI in pv), mpq(0)))
    return out


def frame_from_soliton(S: SolitonData, n: int) -> Frame:
    """Frame of the span of f_j = z^(1-k) Σ_i a_ji / (1 - κ_i z), j ≤ k, and
    z^(1-j) for j > k, with enough rows for partitions of size ≤ n."""
    if S.A is None:
        raise ValueError("a frame needs the matrix A")
    k, N = S.k, S.n
    order = max(n, N) + 2
    series = []
    for row in S.A:
        coeffs = []
        for ell in range(0, order + k):
            coeffs.append(simplify(sum((a * kap ** ell for a, kap in zip(row, S.kappa) if not is_zero(a)), mpq(0))))
        series.append(LaurentSeries(1 - k, coeffs, order))
    # z^(-k) closes the block so the last stored column leads at row -J
    series.append(LaurentSeries.monomial(-k, order))
    return Frame.from_series(series, exact_tail=True)


def gauge_by_unit(frame: Frame, h: LaurentSeries, columns: int | None = None) -> Frame:
    """Frame of h·U for a unit h (nonzero constant term)."""
    if h.valuation() != 0:
        raise ValueError("gauge factor must be a unit: nonzero constant term required")
    if columns is None:
        columns = max(frame.J, frame.row_hi + 2)
    series = []
    for j in range(1, columns + 1):
        series.append(frame.column_series(j) * h)
    return Frame.from_series(series, exact_tail=False)


def projectively_equal(u: dict, v: dict) -> bool:
    """Two coefficient maps agree up to one global nonzero scalar."""
    keys = set(u) | set(v)
    ref = next((k for k in sorted(keys) if not is_zero(u.get(k, 0))), None)
    if ref is None:
        return all(is_zero(v.get(k, 0)) for k in keys)
    if is_zero(v.get(ref, 0)):
        return False
    ur, vr = to_field(u[ref]), to_field(v[ref])
    return all(is_zero(simplify(to_field(u.get(k, 0)) * vr - to_field(v.get(k, 0)) * ur)) for k in keys)


def example_plucker_relations(c: dict) -> list:
    """The three-term relation c211 c22 - c21 c221 + c2 c222 and the
    four-term relation c221 c31 - c21 c321 + c11 c331 + c c333."""
    def g(*lam):
        return to_field(c[tuple(lam)])
    three = g(2, 1, 1) * g(2, 2) - g(2, 1) * g(2, 2, 1) + g(2) * g(2, 2, 2)
    four = g(2, 2, 1) * g(3, 1) - g(2, 1) * g(3, 2, 1) + g(1, 1) * g(3, 3, 1) + g() * g(3, 3, 3)
    return [simplify(three), simplify(four)]
