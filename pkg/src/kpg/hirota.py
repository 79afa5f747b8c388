"""Hirota varieties of lattice configurations.

A theta sum ``sum_k a_k exp[(c_k.u) x + (c_k.v) y + (c_k.w) t]`` solves the
bilinear KP equation exactly when certain polynomials in ``a, u, v, w``
vanish.  This module builds those polynomials, evaluates the equation on
concrete exponential sums, and provides the known rational parametrizations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .exact_algebra import (MultiPoly, QQ, is_zero, render, simplify, to_field,
                            variables)


def P(x, y, t):
    """The quartic x^4 - 4xt + 3y^2 attached to the KP equation."""
    return x ** 4 - 4 * x * t + 3 * y ** 2


# ---------------------------------------------------------------- configurations


@dataclass(frozen=True)
class LatticeConfiguration:
    points: tuple

    def __post_init__(self):
        pts = tuple(tuple(int(x) for x in p) for p in self.points)
        if not pts:
            raise ValueError("a configuration needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("configuration points must be distinct")
        if len({len(p) for p in pts}) != 1:
            raise ValueError("configuration points must share one dimension")
        object.__setattr__(self, "points", pts)

    @property
    def g(self) -> int:
        return len(self.points[0])

    @property
    def m(self) -> int:
        return len(self.points)

    @classmethod
    def from_json(cls, data) -> "LatticeConfiguration":
        conf = cls(tuple(tuple(p) for p in data["points"]))
        if "g" in data and int(data["g"]) != conf.g:
            raise ValueError("declared g does not match the point dimension")
        return conf

    def coefficient_names(self) -> list:
        return [coefficient_name(p) for p in self.points]


def coefficient_name(point) -> str:
    if all(0 <= x <= 9 for x in point):
        return "a" + "".join(str(x) for x in point)
    return "a_" + "_".join(str(x) if x >= 0 else f"m{-x}" for x in point)


def uvw(g: int):
    """Symbols u1..ug, v1..vg, w1..wg."""
    u = [MultiPoly.variable(f"u{i}") for i in range(1, g + 1)]
    v = [MultiPoly.variable(f"v{i}") for i in range(1, g + 1)]
    w = [MultiPoly.variable(f"w{i}") for i in range(1, g + 1)]
    return u, v, w


def _dot(c, vec):
    return simplify(sum((ci * x for ci, x in zip(c, vec) if ci), QQ(0)))


@dataclass
class ThetaSum:
    config: LatticeConfiguration
    coeffs: list

    def __post_init__(self):
        if len(self.coeffs) != self.config.m:
            raise ValueError("one coefficient per configuration point is required")
        self.coeffs = [to_field(a) for a in self.coeffs]
        if any(is_zero(a) for a in self.coeffs):
            raise ValueError("theta coefficients must be nonzero")

    @classmethod
    def symbolic(cls, config: LatticeConfiguration) -> "ThetaSum":
        return cls(config, [MultiPoly.variable(n) for n in config.coefficient_names()])

    def exp_sum(self, u, v, w) -> "ExpSum":
        return ExpSum([(a, (_dot(c, u), _dot(c, v), _dot(c, w)))
                       for a, c in zip(self.coeffs, self.config.points)])


# ---------------------------------------------------------------- C^[2]


def csum_index(config: LatticeConfiguration) -> dict:
    """Map each d in C^[2] to its index pairs (k, l), k < l, zero based."""
    out: dict = {}
    for k, l in itertools.combinations(range(config.m), 2):
        d = tuple(a + b for a, b in zip(config.points[k], config.points[l]))
        out.setdefault(d, []).append((k, l))
    return dict(sorted(out.items()))


def P_kl(config: LatticeConfiguration, k: int, l: int, u, v, w):
    diff = [a - b for a, b in zip(config.points[k], config.points[l])]
    return P(_dot(diff, u), _dot(diff, v), _dot(diff, w))


@dataclass
class Generator:
    d: tuple
    pairs: list
    unique: bool
    poly: object


@dataclass
class HirotaIdeal:
    config: LatticeConfiguration
    generators: list  # one per d in lex order
    quartics: list = field(default_factory=list)  # distinct quartics of unique pairs

    def polynomials(self) -> list:
        """Deduplicated defining polynomials: distinct quartics first, then the
        sums for non-unique points in lex order of d."""
        return list(self.quartics) + [g.poly for g in self.generators if not g.unique]

    def to_json(self) -> dict:
        return {
            "g": self.config.g,
            "points": [list(p) for p in self.config.points],
            "generators": [
                {"d": list(gen.d), "pairs": [[k + 1, l + 1] for k, l in gen.pairs],
                 "unique": gen.unique, "poly": render(gen.poly)}
                for gen in self.generators
            ],
            "quartics": [render(q) for q in self.quartics],
        }


def hirota_generators(config: LatticeConfiguration) -> HirotaIdeal:
    u, v, w = uvw(config.g)
    a = [MultiPoly.variable(n) for n in config.coefficient_names()]
    gens = []
    quartics = []
    for d, pairs in csum_index(config).items():
        if len(pairs) == 1:
            k, l = pairs[0]
            poly = P_kl(config, k, l, u, v, w)
            if not any(poly == q for q in quartics):
                quartics.append(poly)
            gens.append(Generator(d, pairs, True, poly))
        else:
            poly = sum((P_kl(config, k, l, u, v, w) * a[k] * a[l] for k, l in pairs), MultiPoly())
            gens.append(Generator(d, pairs, False, poly))
    return HirotaIdeal(config, gens, quartics)


def _point_vectors(point, g: int):
    if isinstance(point, dict) and "u" in point:
        u, v, w = point["u"], point["v"], point["w"]
    else:
        u = [point[f"u{i}"] for i in range(1, g + 1)]
        v = [point[f"v{i}"] for i in range(1, g + 1)]
        w = [point[f"w{i}"] for i in range(1, g + 1)]
    if not (len(u) == len(v) == len(w) == g):
        raise ValueError(f"point must give {g} values for each of u, v, w")
    return [to_field(x) for x in u], [to_field(x) for x in v], [to_field(x) for x in w]


def _bilinear_coefficient(ak, al, fk, fl):
    """Coefficient of exp[theta_k + theta_l] in the KP bilinear expression,
    summed over the ordered pairs (k, l) and (l, k)."""
    total = 0
    for (a1, (x1, y1, t1)), (a2, (x2, y2, t2)) in (((ak, fk), (al, fl)), ((al, fl), (ak, fk))):
        # tau * d^4 tau - 4 tau_xxx tau_x + 3 tau_xx^2 + 4 tau_x tau_t - 4 tau tau_xt
        # + 3 tau tau_yy - 3 tau_y^2, with tau_x -> x1 on the first factor etc.
        val = (x2 ** 4 - 4 * x2 ** 3 * x1 + 3 * x1 ** 2 * x2 ** 2 + 4 * x1 * t2
               - 4 * x2 * t2 + 3 * y2 ** 2 - 3 * y1 * y2)
        total = total + a1 * a2 * val
    return total


def hirota_residual(theta: ThetaSum, point) -> dict:
    """Coefficient of each exp[(d.u)x + (d.v)y + (d.w)t], d in C^[2], after
    applying the KP bilinear operator to the theta sum at ``point``.

    The coefficients are computed from the derivatives of the exponentials,
    not from the quartics P_kl.
    """
    config = theta.config
    u, v, w = _point_vectors(point, config.g)
    freqs = [(_dot(c, u), _dot(c, v), _dot(c, w)) for c in config.points]
    out = {}
    for d, pairs in csum_index(config).items():
        acc = 0
        for k, l in pairs:
            acc = acc + _bilinear_coefficient(theta.coeffs[k], theta.coeffs[l], freqs[k], freqs[l])
        out[d] = simplify(acc)
    return out


def residual_is_zero(residual: dict) -> bool:
    return all(is_zero(c) for c in residual.values())


# ---------------------------------------------------------------- exponential sums


@dataclass
class ExpSum:
    """Finite sum of ``coeff * exp[alpha x + beta y + gamma t]``."""
    terms: list  # [(coeff, (alpha, beta, gamma))]

    def combined(self) -> dict:
        out: dict = {}
        for c, f in self.terms:
            key = tuple(simplify(x) for x in f)
            out[key] = simplify(out.get(key, 0) + c)
        return {k: c for k, c in out.items() if not is_zero(c)}

    def hirota_residual(self) -> dict:
        """Coefficients of the KP bilinear expression grouped by the actual
        exponent (alpha, beta, gamma) of each product of exponentials."""
        terms = list(self.combined().items())
        out: dict = {}
        for i, j in itertools.combinations(range(len(terms)), 2):
            (fi, ai), (fj, aj) = terms[i], terms[j]
            key = tuple(simplify(a + b) for a, b in zip(fi, fj))
            out[key] = simplify(out.get(key, 0) + _bilinear_coefficient(ai, aj, fi, fj))
        return out

    def evaluate(self, x, y, t):
        import math
        total = 0.0
        for c, (a, b, g) in self.terms:
            total += float(QQ(c)) * math.exp(float(QQ(a)) * x + float(QQ(b)) * y + float(QQ(g)) * t)
        return total

    def subs(self, mapping: dict) -> "ExpSum":
        from .exact_algebra import substitute
        return ExpSum([(substitute(c, mapping), tuple(substitute(x, mapping) for x in f))
                       for c, f in self.terms])


@dataclass(frozen=True)
class Gauge:
    linear: tuple  # (lx, ly, lt): multiply by exp[lx x + ly y + lt t]
    scale: object  # constant factor


def soliton_gauge_equivalence(theta: ExpSum, soliton: ExpSum):
    """Find L and a constant s with theta = s * exp[L] * soliton, or None."""
    A = theta.combined()
    B = soliton.combined()
    if len(A) != len(B) or not A:
        return None
    fa0 = next(iter(A))
    for fb in B:
        L = tuple(simplify(p - q) for p, q in zip(fa0, fb))
        scale = simplify(to_field(A[fa0]) / to_field(B[fb]))
        ok = True
        for f, c in B.items():
            key = tuple(simplify(p + q) for p, q in zip(f, L))
            if key not in A or not is_zero(simplify(A[key] - scale * c)):
                ok = False
                break
        if ok:
            return Gauge(L, scale)
    return None


# ---------------------------------------------------------------- parametrizations


def simplex_param(kappas, sign: int = 1) -> dict:
    """Point of the Hirota variety of the simplex {0, e_1, ..., e_g} from
    kappa_0..kappa_g: u_j = k_j - k_0, v_j = ±(k_j^2 - k_0^2), w_j = k_j^3 - k_0^3."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    k0, *ks = [to_field(k) for k in kappas]
    return {
        "u": [simplify(k - k0) for k in ks],
        "v": [simplify(sign * (k ** 2 - k0 ** 2)) for k in ks],
        "w": [simplify(k ** 3 - k0 ** 3) for k in ks],
    }


def simplex_config(g: int) -> LatticeConfiguration:
    pts = [tuple([0] * g)] + [tuple(1 if i == j else 0 for i in range(g)) for j in range(g)]
    return LatticeConfiguration(tuple(pts))


def theorem35_generators(g: int) -> list:
    """The 2g^2 - g polynomials cutting out the simplex Hirota variety in
    the u, v, w coordinates: g(g-1)/2 of type (a), g of type (b),
    g(g-1) of type (c) and g(g-1)/2 of type (d)."""
    u, v, w = uvw(g)
    gens = []
    for i, j in itertools.combinations(range(g), 2):
        gens.append(v[i] * u[j] - v[j] * u[i] - u[i] * u[j] * (u[i] - u[j]))
    for i in range(g):
        gens.append(4 * w[i] * u[i] - 3 * v[i] ** 2 - u[i] ** 4)
    for i, j in itertools.permutations(range(g), 2):
        gens.append(4 * w[j] * u[i] - 3 * v[i] * v[j] + 3 * u[i] * (u[i] - u[j]) * v[j]
                    - u[i] * u[j] ** 3)
    for i, j in itertools.combinations(range(g), 2):
        gens.append(4 * w[i] * v[j] - 4 * w[j] * v[i] + 3 * u[i] * v[j] * (v[j] - v[i])
                    + u[i] * v[j] * (u[j] - u[i]) * (u[i] - 2 * u[j])
                    + u[i] * u[j] ** 3 * (u[i] - u[j]))
    return gens


def simplex_curve_substitution(g: int) -> dict:
    """v_j -> 2 u_j t + u_j^2, w_j -> 3 u_j t^2 + 3 u_j^2 t + u_j^3."""
    u, _, _ = uvw(g)
    t = variables("t")
    sub = {}
    for j in range(g):
        sub[f"v{j + 1}"] = 2 * u[j] * t + u[j] ** 2
        sub[f"w{j + 1}"] = 3 * u[j] * t ** 2 + 3 * u[j] ** 2 * t + u[j] ** 3
    return sub


CUBE_POINTS = tuple(itertools.product((0, 1), repeat=3))


def _require_distinct(kappas):
    for i, j in itertools.combinations(range(len(kappas)), 2):
        if is_zero(simplify(to_field(kappas[i]) - to_field(kappas[j]))):
            raise ValueError("kappa values must be pairwise distinct")


def cube_param(kappas, lambdas):
    """Rational parametrization of the cube's Hirota variety by
    kappa_1..kappa_6 and lambda_0..lambda_3.

    Returns ``(config, coeffs, point)``.
    """
    if len(kappas) != 6 or len(lambdas) != 4:
        raise ValueError("the cube needs six kappas and four lambdas")
    _require_distinct(kappas)
    k1, k2, k3, k4, k5, k6 = [to_field(k) for k in kappas]
    l0, l1, l2, l3 = [to_field(x) for x in lambdas]
    point = {
        "u": [k1 - k2, k3 - k4, k5 - k6],
        "v": [k1 ** 2 - k2 ** 2, k3 ** 2 - k4 ** 2, k5 ** 2 - k6 ** 2],
        "w": [k1 ** 3 - k2 ** 3, k3 ** 3 - k4 ** 3, k5 ** 3 - k6 ** 3],
    }
    point = {key: [simplify(x) for x in vals] for key, vals in point.items()}
    a = {
        (1, 1, 1): (k3 - k5) * (k1 - k5) * (k1 - k3) * l0 * l1 * l2 * l3,
        (0, 1, 1): (k3 - k5) * (k2 - k5) * (k2 - k3) * l0 * l2 * l3,
        (1, 0, 1): (k4 - k5) * (k1 - k5) * (k1 - k4) * l0 * l1 * l3,
        (0, 0, 1): (k4 - k5) * (k2 - k5) * (k2 - k4) * l0 * l3,
        (1, 1, 0): (k3 - k6) * (k1 - k6) * (k1 - k3) * l0 * l1 * l2,
        (0, 1, 0): (k3 - k6) * (k2 - k6) * (k2 - k3) * l0 * l2,
        (1, 0, 0): (k4 - k6) * (k1 - k6) * (k1 - k4) * l0 * l1,
        (0, 0, 0): (k4 - k6) * (k2 - k6) * (k2 - k4) * l0,
    }
    config = LatticeConfiguration(CUBE_POINTS)
    coeffs = [simplify(a[p]) for p in CUBE_POINTS]
    return config, coeffs, point


def cube_binomial(coeffs) -> object:
    """a000 a110 a101 a011 - a001 a010 a100 a111 for coefficients in
    ``CUBE_POINTS`` order."""
    a = dict(zip(CUBE_POINTS, coeffs))
    return simplify(a[0, 0, 0] * a[1, 1, 0] * a[1, 0, 1] * a[0, 1, 1]
                    - a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0] * a[1, 1, 1])


PRISM_POINTS = ((0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1))


def prism_param(kappas, lambdas):
    """Rational parametrization of the triangular prism's Hirota variety by
    kappa_1..kappa_5 and lambda_0..lambda_3.  The triangles are
    {000, 100, 110} and {001, 101, 111}.

    Returns ``(config, coeffs, point)``.
    """
    if len(kappas) != 5 or len(lambdas) != 4:
        raise ValueError("the prism needs five kappas and four lambdas")
    _require_distinct(kappas)
    k1, k2, k3, k4, k5 = [to_field(k) for k in kappas]
    l0, l1, l2, l3 = [to_field(x) for x in lambdas]
    point = {
        "u": [k1 - k2, k2 - k3, k4 - k5],
        "v": [k1 ** 2 - k2 ** 2, k2 ** 2 - k3 ** 2, k4 ** 2 - k5 ** 2],
        "w": [k1 ** 3 - k2 ** 3, k2 ** 3 - k3 ** 3, k4 ** 3 - k5 ** 3],
    }
    point = {key: [simplify(x) for x in vals] for key, vals in point.items()}
    a = {
        (0, 0, 0): (k1 - k4) * l0,
        (1, 0, 0): (k2 - k4) * l0 * l1,
        (1, 1, 0): (k3 - k4) * l0 * l1 * l2,
        (0, 0, 1): (k1 - k5) * l0 * l3,
        (1, 0, 1): (k2 - k5) * l0 * l1 * l3,
        (1, 1, 1): (k3 - k5) * l0 * l1 * l2 * l3,
    }
    config = LatticeConfiguration(PRISM_POINTS)
    coeffs = [simplify(a[p]) for p in PRISM_POINTS]
    return config, coeffs, point


def triangle_quartic(u1, u2, v1, v2):
    """u1^2 u2 + u1 u2^2 - u2 v1 + u1 v2: the component of the triangle's
    Hirota variety containing the soliton points."""
    return u1 ** 2 * u2 + u1 * u2 ** 2 - u2 * v1 + u1 * v2
