"""Hyperelliptic curves y² = f(x) with two points at infinity, their
Riemann-Roch frames in the local coordinate z = 1/x at the point p where
y ~ +x^(g+1), truncated tau functions, and the ε → 0 degeneration of the
family y² = Π (x - κ_i)(x - κ_i - ε) to (1, n)-solitons.

A divisor ``D`` on a genus-g curve is one of

* ``D0 = (g-1)p``
* ``D1 = p1 + (g-2)p``
* ``D2 = p1 + p2 + (g-3)p``

so deg D = g - 1 throughout; for g = 2 these are p, p1 and p1 + p2 - p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .exact_algebra import (LaurentSeries, MultiPoly, PrecisionError,
                            _rational_sqrt, is_zero, parse_expr, poly_gcd, render, series_inverse,
                            series_sqrt, simplify, substitute, to_field)
from .sato import (Frame, SolitonData, partitions_up_to, plucker,
                   tau_truncated)

EPS = "eps"
MARGIN = 2


@dataclass
class CurveDivisor:
    kind: str = "D0"
    points: list = field(default_factory=list)

    def __post_init__(self):
        need = {"D0": 0, "D1": 1, "D2": 2}
        if self.kind not in need:
            raise ValueError(f"unknown divisor type {self.kind!r}; expected D0, D1 or D2")
        if len(self.points) != need[self.kind]:
            raise ValueError(f"divisor {self.kind} needs {need[self.kind]} affine point(s)")
        self.points = [(to_field(c), to_field(y)) for c, y in self.points]

    def order_at_p(self, g: int) -> int:
        return g - 1 - len(self.points)


class HyperellipticCurve:
    """y² = f(x) with f monic of even degree 2g + 2 and squarefree over the
    coefficient field.  ``coeffs`` lists f from the constant term upward."""

    def __init__(self, coeffs, check: bool = True):
        coeffs = [simplify(to_field(c)) for c in coeffs]
        while coeffs and is_zero(coeffs[-1]):
            coeffs.pop()
        deg = len(coeffs) - 1
        if deg < 2:
            raise ValueError("f must have degree at least 2")
        if deg % 2:
            raise ValueError("odd-degree model: complete the square at infinity "
                             "(move a root to infinity) to get an even-degree model with two points at infinity")
        lead = coeffs[-1]
        if not is_zero(simplify(lead - 1)):
            # y -> y/sqrt(lead) keeps both points at infinity rational;
            # affine points must then be given on the normalized model
            if _rational_sqrt(lead) is None:
                raise ValueError("leading coefficient must be a rational square so that both points at infinity are rational")
            coeffs = [simplify(c / lead) for c in coeffs]
        self.coeffs = coeffs
        self.genus = deg // 2 - 1
        if check:
            self._check_squarefree()

    @classmethod
    def from_roots(cls, roots, check: bool = True) -> "HyperellipticCurve":
        poly = [mpq(1)]
        for r in roots:
            r = to_field(r)
            nxt = [mpq(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] = nxt[i + 1] + c
                nxt[i] = nxt[i] - r * c
            poly = [simplify(c) for c in nxt]
        return cls(poly, check=check)

    @classmethod
    def from_json(cls, data) -> "HyperellipticCurve":
        if "roots" in data:
            curve = cls.from_roots([parse_expr(str(r)) for r in data["roots"]])
        else:
            curve = cls([parse_expr(str(c)) for c in data["f"]])
        if "genus" in data and int(data["genus"]) != curve.genus:
            raise ValueError(f"declared genus {data['genus']} but deg f gives genus {curve.genus}")
        return curve

    def to_json(self) -> dict:
        return {"genus": self.genus, "f": [render(c) for c in self.coeffs]}

    def f_poly(self) -> MultiPoly:
        x = MultiPoly.variable("x")
        out = MultiPoly()
        for i, c in enumerate(self.coeffs):
            out = out + to_field(c) * x ** i
        return out

    def _check_squarefree(self):
        # f = num/den with den free of x, so gcd(num, num') decides
        num = _clear_denominators(self.f_poly())
        g = poly_gcd(num, num.diff("x"))
        if g.degree("x") > 0:
            raise ValueError("f is not squarefree: the discriminant vanishes")

    def evaluate_f(self, c):
        c = to_field(c)
        acc = mpq(0)
        for coeff in reversed(self.coeffs):
            acc = simplify(acc * c + coeff)
        return acc

    def on_curve(self, c, y) -> bool:
        return is_zero(simplify(to_field(y) * to_field(y) - self.evaluate_f(c)))

    def alpha(self, N: int) -> list:
        """α_0..α_N with y = ± z^-(g+1) Σ α_n z^n near infinity; α_0 = 1."""
        d = len(self.coeffs) - 1
        s = LaurentSeries(0, [self.coeffs[d - j] if j <= d else 0 for j in range(N + 1)], N)
        root = series_sqrt(s, N)
        return [root.coeff(j) for j in range(N + 1)]

    def g_poly_series(self, m: int, alpha: list, order: int) -> LaurentSeries:
        """g_m(x) = Σ_{j≤m} α_j x^(m-j) as a series in z."""
        return LaurentSeries(-m, alpha[: m + 1], order)

    def f_series(self, m: int, order: int, branch: int = 1, alpha: list | None = None) -> LaurentSeries:
        """f_m = ½(x^(m-g-1) y + g_m(x)) in z = 1/x on the branch y ~ branch·x^(g+1)."""
        g = self.genus
        if m < g + 1:
            raise ValueError("f_m is defined for m ≥ g + 1")
        if alpha is None:
            alpha = self.alpha(order + m)
        if len(alpha) < order + m + 1:
            raise PrecisionError("insufficient frame precision: α series too short")
        ylike = LaurentSeries(-m, alpha[: order + m + 1], order)
        if branch < 0:
            ylike = -ylike
        return (ylike + self.g_poly_series(m, alpha, order)).scale(mpq(1, 2))

    def h_series(self, point, order: int, branch: int = 1, alpha: list | None = None) -> LaurentSeries:
        """(f_{g+1}(x, y) - f_{g+1}(c, -y_c)) / (x - c)."""
        g = self.genus
        c, yc = point
        if alpha is None:
            alpha = self.alpha(order + 2 * g + 1)
        gm = simplify(sum((alpha[j] * c ** (g + 1 - j) for j in range(g + 2)), mpq(0)))
        const = simplify((-yc + gm) / 2)
        # num has valuation -g (branch +) so it needs g extra terms
        num = self.f_series(g + 1, order + g - 1, branch, alpha) - const
        inv = series_inverse(LaurentSeries(0, [1, -c], order + g), order + g)
        return (num.shift(1) * inv).truncate(order)


def _clear_denominators(p):
    from .exact_algebra import RationalFunction
    if isinstance(p, RationalFunction):
        return p.num
    return p


def basis_series(X: HyperellipticCurve, D: CurveDivisor, J: int, order: int, branch: int = 1) -> list:
    """First J elements of the Riemann-Roch basis of H^0(X, D + ∞p) before the
    shift ι, each expanded to ``order`` in z: 1, h_1[, h_2], f_{g+1}, f_{g+2}, ..."""
    g = X.genus
    n_f = J - 1 - len(D.points)
    if n_f < 0:
        raise ValueError("J too small for the divisor")
    alpha = X.alpha(order + max(g + n_f, 2 * g) + 2)
    out = [LaurentSeries(0, [1], order)]
    for pt in D.points:
        if not X.on_curve(*pt):
            raise ValueError("divisor point does not lie on the curve")
        out.append(X.h_series(pt, order, branch, alpha))
    for m in range(g + 1, g + 1 + n_f):
        out.append(X.f_series(m, order, branch, alpha))
    return out


def pole_orders(X: HyperellipticCurve, D: CurveDivisor, J: int, order: int = 2) -> list:
    """Pole orders at p of an echelonized Riemann-Roch basis (first J)."""
    series = basis_series(X, D, J, order)
    cols = {}
    for s in series:
        # reduce against existing leads to get distinct pole orders
        while True:
            v, lc = s.leading()
            if v in cols:
                t, tc = cols[v]
                s = s - t.scale(simplify(lc / tc))
            else:
                cols[v] = (s, lc)
                break
    return sorted(-v for v in cols)


def frame_from_curve(X: HyperellipticCurve, D: CurveDivisor | None = None, n: int = 4,
                     margin: int = MARGIN) -> Frame:
    """Frame of ι(H^0(X, D + ∞p)) with ι = multiplication by z^(ord_p D + 1),
    with rows and columns enough for τ[n]."""
    D = D or CurveDivisor()
    g = X.genus
    shift = D.order_at_p(g) + 1
    J = max(n, g) + margin + 1
    top = n + margin           # highest exponent needed after the shift
    series = basis_series(X, D, J, top - shift)
    shifted = [s.shift(shift) for s in series]
    return Frame.from_series(shifted, exact_tail=False)


def tau_from_curve(X: HyperellipticCurve, D: CurveDivisor | None = None, n: int = 4):
    return tau_truncated(frame_from_curve(X, D, n), n)


def first_nonzero_tau(X: HyperellipticCurve, D: CurveDivisor | None = None, n_max: int = 8):
    """(n, τ[n]) for the least n with τ[n] ≠ 0."""
    frame = frame_from_curve(X, D, n_max)
    for n in range(n_max + 1):
        tau = tau_truncated(frame, n)
        if not is_zero(tau):
            return n, tau
    return None, None


# ---------------------------------------------------------------- degenerations


def degeneration_family(kappas) -> HyperellipticCurve:
    """y² = Π (x - κ_i)(x - κ_i - ε), genus n - 1 over ℚ(ε)."""
    kappas = [to_field(k) for k in kappas]
    if len(set(map(render, kappas))) != len(kappas):
        raise ValueError("kappa values must be pairwise distinct")
    eps = MultiPoly.variable(EPS)
    roots = []
    for k in kappas:
        roots += [k, k + eps]
    return HyperellipticCurve.from_roots(roots)


def h_polynomial(kappas, order: int) -> LaurentSeries:
    h = LaurentSeries(0, [1], order)
    for k in kappas:
        h = h * LaurentSeries(0, [1, -to_field(k)], order)
    return h


def limit_frame(kappas, n: int = 4, margin: int = MARGIN) -> Frame:
    """Frame of {1, z^-n h, z^-(n+1) h, ...} after the shift z^(n-1) used for
    D0 on the genus n-1 family, h = Π(1 - κ_i z)."""
    N = len(kappas)
    g = N - 1
    J = max(n, g) + margin + 1
    top = n + margin
    h = h_polynomial(kappas, top + 2 * J)
    series = [LaurentSeries(g, [1], top)]
    for j in range(J - 1):
        series.append(h.shift(-1 - j).truncate(top))
    return Frame.from_series(series, exact_tail=False)


def limit_soliton(kappas) -> SolitonData:
    """(1, n)-soliton with a_i = 1 / Π_{j≠i}(κ_i - κ_j)."""
    ks = [to_field(k) for k in kappas]
    row = []
    for i, ki in enumerate(ks):
        prod = mpq(1)
        for j, kj in enumerate(ks):
            if j != i:
                prod = prod * (ki - kj)
        if is_zero(simplify(prod)):
            raise ValueError("kappa values must be pairwise distinct")
        row.append(simplify(1 / prod))
    return SolitonData(ks, A=[row])


def specialize_plucker(values: dict, var: str = EPS, at=0) -> dict:
    """Specialize a projective Plücker vector at var = at after dividing by
    the largest common power of (var - at)."""
    from .exact_algebra import RationalFunction
    shift = {var: MultiPoly.variable(var) + at} if at else {}
    vals = {k: simplify(to_field(substitute(v, shift))) if shift else simplify(to_field(v))
            for k, v in values.items()}

    def val(e):
        if is_zero(e):
            return None
        if isinstance(e, RationalFunction):
            return _ord(e.num, var) - _ord(e.den, var)
        if isinstance(e, MultiPoly):
            return _ord(e, var)
        return 0

    m = min((v for v in map(val, vals.values()) if v is not None), default=0)
    eps = MultiPoly.variable(var)
    out = {}
    for k, e in vals.items():
        scaled = simplify(e / eps ** m) if m > 0 else simplify(e * eps ** (-m))
        out[k] = simplify(substitute(scaled, {var: 0}))
    return out


def _ord(p: MultiPoly, var: str) -> int:
    if var not in p.free_vars():
        return 0
    idx = p.vars.index(var)
    return min(exps[idx] for exps, _ in p.items())


def curve_plucker_vector(frame: Frame, weight: int) -> dict:
    return {lam: plucker(frame, lam) for lam in partitions_up_to(weight)}
