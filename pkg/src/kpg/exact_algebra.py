"""Exact arithmetic: rationals, sparse multivariate polynomials, rational
functions, truncated Laurent series and fraction-free linear algebra.

Polynomials store monomials as packed integers (16 bits per variable, top bit
of each field kept as a guard) so that monomial multiplication is integer
addition.  Variables of every polynomial are kept sorted by ``var_sort_key``;
operations between polynomials over different variable sets align them first.
"""

from __future__ import annotations

import ast
import heapq
import re
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

Scalar = mpq

_BITS = 16
_FIELD = (1 << _BITS) - 1
_MAX_EXP = 1 << (_BITS - 1)


class PrecisionError(ArithmeticError):
    """A coefficient beyond the known truncation order was requested."""


def QQ(value, den=None) -> mpq:
    """Coerce ints, Fractions, mpq and strings like ``"-3/4"`` to a rational.
    ``QQ(p, q)`` builds p/q."""
    if den is not None:
        return QQ(value) / QQ(den)
    if isinstance(value, mpq):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(Fraction(value.strip()))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return mpq(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def is_scalar(value) -> bool:
    return isinstance(value, (mpq, int, Fraction)) and not isinstance(value, bool)


# ---------------------------------------------------------------- variables

_FAMILY_RANK = {
    "x": 0, "y": 1, "t": 2, "u": 3, "v": 4, "w": 5, "a": 6, "k": 7,
    "l": 8, "m": 9, "q": 10, "c": 11, "s": 12, "z": 13, "eps": 14,
}
_NAME_RE = re.compile(r"([A-Za-z_]+)(\d*)(.*)")


@lru_cache(maxsize=None)
def var_sort_key(name: str):
    """Global variable order: x, y, t first, then the u/v/w, a, k, ... families,
    numeric suffixes compared as integers (``u2`` before ``u10``)."""
    m = _NAME_RE.fullmatch(name)
    if not m:
        return (99, name, -1, "")
    prefix, digits, rest = m.groups()
    rank = _FAMILY_RANK.get(prefix, 50)
    # for numbered families keep the digit count significant so a00 < a000
    return (rank, prefix, len(digits), int(digits) if digits else -1, rest)


def _merge_vars(a: tuple, b: tuple) -> tuple:
    if a == b:
        return a
    return tuple(sorted(set(a) | set(b), key=var_sort_key))


def _unpack(key: int, n: int) -> tuple:
    return tuple((key >> (_BITS * i)) & _FIELD for i in range(n))


def _pack(exps) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e >= _MAX_EXP:
            raise OverflowError(f"exponent {e} out of range")
        key |= e << (_BITS * i)
    return key


def _guard(n: int) -> int:
    return sum(1 << (_BITS * i + _BITS - 1) for i in range(n))


def _repack(terms: dict, old: tuple, new: tuple) -> dict:
    if old == new:
        return terms
    # variables missing from ``new`` must have exponent 0 in every term
    pos = [(i, new.index(v)) for i, v in enumerate(old) if v in new]
    out = {}
    for k, c in terms.items():
        nk = 0
        for i, p in pos:
            nk |= ((k >> (_BITS * i)) & _FIELD) << (_BITS * p)
        out[nk] = c
    return out


# ---------------------------------------------------------------- MultiPoly


class MultiPoly:
    """Sparse polynomial with rational coefficients.

    Instances are immutable.  ``vars`` is the sorted variable tuple and
    ``terms`` maps packed exponent keys to nonzero ``mpq`` coefficients.
    """

    __slots__ = ("vars", "terms", "_canon")

    def __init__(self, terms=None, vars=()):
        self.vars = tuple(vars)
        self.terms = terms if terms is not None else {}
        self._canon = None

    # -- construction
    @classmethod
    def constant(cls, c) -> "MultiPoly":
        c = QQ(c)
        return cls({0: c} if c else {}, ())

    @classmethod
    def variable(cls, name: str) -> "MultiPoly":
        return cls({1: mpq(1)}, (name,))

    @classmethod
    def from_dict(cls, data: dict, vars) -> "MultiPoly":
        """Build from ``{exponent tuple: coefficient}`` over ``vars``."""
        vars = tuple(vars)
        order = sorted(vars, key=var_sort_key)
        if len(set(vars)) != len(vars):
            raise ValueError("repeated variable names")
        perm = [order.index(v) for v in vars]
        terms = {}
        for exps, c in data.items():
            if len(exps) != len(vars):
                raise ValueError("exponent length mismatch")
            re_exps = [0] * len(vars)
            for i, e in enumerate(exps):
                re_exps[perm[i]] = e
            k = _pack(re_exps)
            terms[k] = terms.get(k, 0) + QQ(c)
        return cls({k: c for k, c in terms.items() if c}, tuple(order))

    # -- basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self) -> mpq:
        return self.terms.get(0, mpq(0))

    def free_vars(self) -> tuple:
        used = 0
        for k in self.terms:
            used |= k
        return tuple(v for i, v in enumerate(self.vars) if (used >> (_BITS * i)) & _FIELD)

    def items(self):
        """Iterate ``(exponent tuple over self.vars, coefficient)``."""
        n = len(self.vars)
        for k, c in self.terms.items():
            yield _unpack(k, n), c

    def monomials(self):
        """Iterate ``({var: exp}, coefficient)`` with zero exponents dropped."""
        for exps, c in self.items():
            yield {v: e for v, e in zip(self.vars, exps) if e}, c

    def coefficient(self, monomial: dict) -> mpq:
        for v, e in monomial.items():
            if e and v not in self.vars:
                return mpq(0)
        exps = [monomial.get(v, 0) for v in self.vars]
        return self.terms.get(_pack(exps), mpq(0))

    def __len__(self):
        return len(self.terms)

    # -- alignment
    def _with_vars(self, vars: tuple) -> dict:
        return _repack(self.terms, self.vars, vars)

    @staticmethod
    def _coerce(other):
        if isinstance(other, MultiPoly):
            return other
        if is_scalar(other):
            return MultiPoly.constant(other)
        return None

    def _aligned(self, other: "MultiPoly"):
        vars = _merge_vars(self.vars, other.vars)
        return vars, self._with_vars(vars), other._with_vars(vars)

    # -- arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        if not self.terms:
            return o
        vars, a, b = self._aligned(o)
        out = dict(a)
        for k, c in b.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return MultiPoly(out, vars)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({k: -c for k, c in self.terms.items()}, self.vars)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if is_scalar(other):
            c = QQ(other)
            if not c:
                return MultiPoly()
            return MultiPoly({k: v * c for k, v in self.terms.items()}, self.vars)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if not self.terms or not other.terms:
            return MultiPoly()
        vars, a, b = self._aligned(other)
        if len(a) > len(b):
            a, b = b, a
        out = {}
        get = out.get
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return MultiPoly({k: c for k, c in out.items() if c}, vars)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        if len(self.terms) == 1:
            (k, c), = self.terms.items()
            exps = [e * n for e in _unpack(k, len(self.vars))]
            return MultiPoly({_pack(exps): c ** n}, self.vars)
        result = MultiPoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        if is_scalar(other):
            c = QQ(other)
            if not c:
                raise ZeroDivisionError("division by zero")
            return self * (1 / c)
        if isinstance(other, MultiPoly):
            if other.is_constant():
                return self / other.constant_value()
            return RationalFunction(self, other)
        if isinstance(other, RationalFunction):
            return RationalFunction(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if is_scalar(other):
            if self.is_constant():
                return QQ(other) / self.constant_value()
            return RationalFunction(MultiPoly.constant(other), self)
        return NotImplemented

    # -- comparison
    def canonical(self):
        """Hashable normal form independent of unused variables."""
        if self._canon is None:
            used = self.free_vars()
            terms = _repack(self.terms, self.vars, used) if used != self.vars else self.terms
            self._canon = (used, frozenset(terms.items()))
        return self._canon

    def __eq__(self, other):
        if is_scalar(other):
            c = QQ(other)
            return self.is_constant() and self.constant_value() == c
        if isinstance(other, RationalFunction):
            return other == self
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if len(self.terms) != len(other.terms):
            return False
        if self.vars == other.vars:
            return self.terms == other.terms
        return self.canonical() == other.canonical()

    def __hash__(self):
        if self.is_constant():
            return hash(self.constant_value())
        return hash(self.canonical())

    # -- degrees
    def degree(self, var: str) -> int:
        if var not in self.vars:
            return 0 if self.terms else -1
        i = self.vars.index(var)
        if not self.terms:
            return -1
        return max((k >> (_BITS * i)) & _FIELD for k in self.terms)

    def total_degree(self) -> int:
        n = len(self.vars)
        return max((sum(_unpack(k, n)) for k in self.terms), default=-1)

    def weighted_degree(self, weights: dict, lowest: bool = False) -> int:
        """Largest (or smallest) weighted degree; variables absent from
        ``weights`` have weight 0."""
        if not self.terms:
            raise ValueError("weighted degree of the zero polynomial")
        w = [weights.get(v, 0) for v in self.vars]
        degs = (sum(a * b for a, b in zip(w, exps)) for exps, _ in self.items())
        return min(degs) if lowest else max(degs)

    def weighted_part(self, degree: int, weights: dict) -> "MultiPoly":
        w = [weights.get(v, 0) for v in self.vars]
        n = len(self.vars)
        out = {k: c for k, c in self.terms.items()
               if sum(a * b for a, b in zip(w, _unpack(k, n))) == degree}
        return MultiPoly(out, self.vars)

    def truncate_weighted(self, max_degree: int, weights: dict) -> "MultiPoly":
        w = [weights.get(v, 0) for v in self.vars]
        n = len(self.vars)
        out = {k: c for k, c in self.terms.items()
               if sum(a * b for a, b in zip(w, _unpack(k, n))) <= max_degree}
        return MultiPoly(out, self.vars)

    def split(self, vars) -> dict:
        """View as a polynomial in ``vars`` with polynomial coefficients in the
        remaining variables: returns ``{exponent tuple over vars: MultiPoly}``."""
        vars = tuple(vars)
        idx = [self.vars.index(v) if v in self.vars else None for v in vars]
        rest = tuple(v for v in self.vars if v not in vars)
        rest_idx = [self.vars.index(v) for v in rest]
        n = len(self.vars)
        groups: dict = {}
        for k, c in self.terms.items():
            exps = _unpack(k, n)
            outer = tuple(exps[i] if i is not None else 0 for i in idx)
            inner = _pack([exps[i] for i in rest_idx])
            groups.setdefault(outer, {})[inner] = c
        return {o: MultiPoly(t, rest) for o, t in groups.items()}

    # -- calculus and substitution
    def diff(self, var: str, times: int = 1) -> "MultiPoly":
        if var not in self.vars:
            return MultiPoly()
        i = self.vars.index(var)
        shift = _BITS * i
        out = {}
        for k, c in self.terms.items():
            e = (k >> shift) & _FIELD
            if e < times:
                continue
            f = 1
            for j in range(times):
                f *= e - j
            out[k - (times << shift)] = c * f
        return MultiPoly(out, self.vars)

    def subs(self, mapping: dict):
        """Substitute field elements for variables.  Unlisted variables stay."""
        if not any(v in mapping for v in self.vars):
            return self
        keep = [v for v in self.vars if v not in mapping]
        keep_idx = [self.vars.index(v) for v in keep]
        sub_idx = [(self.vars.index(v), mapping[v]) for v in self.vars if v in mapping]
        n = len(self.vars)
        powers: dict = {}

        def power(i, val, e):
            key = (i, e)
            if key not in powers:
                powers[key] = val ** e
            return powers[key]

        result = 0
        base_terms: dict = {}
        for k, c in self.terms.items():
            exps = _unpack(k, n)
            sub_key = tuple(exps[i] for i, _ in sub_idx)
            kept = _pack([exps[i] for i in keep_idx])
            base_terms.setdefault(sub_key, {})[kept] = c
        for sub_key, kept_terms in base_terms.items():
            factor = 1
            for (i, val), e in zip(sub_idx, sub_key):
                if e:
                    factor = factor * power(i, val, e)
            rest = MultiPoly(kept_terms, tuple(keep))
            if rest.is_constant():
                result = result + factor * rest.constant_value()
            else:
                result = result + factor * rest
        return simplify(result)

    def evaluate(self, point: dict):
        missing = set(self.free_vars()) - set(point)
        if missing:
            raise ValueError(f"missing values for {sorted(missing)}")
        return self.subs(point)

    # -- content and division
    def content(self) -> mpq:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return mpq(1)
        from math import gcd, lcm
        nums = [int(c.numerator) for c in self.terms.values()]
        dens = [int(c.denominator) for c in self.terms.values()]
        return mpq(gcd(*nums), lcm(*dens))

    def leading_coefficient(self) -> mpq:
        """Coefficient of the first term in canonical (graded-lex) order."""
        return self._sorted_terms()[0][1]

    def _sorted_terms(self):
        n = len(self.vars)
        items = [(_unpack(k, n), c) for k, c in self.terms.items()]
        items.sort(key=lambda it: (sum(it[0]), it[0]), reverse=True)
        return items

    def exquo(self, other: "MultiPoly") -> "MultiPoly":
        """Exact quotient; raises ArithmeticError when ``other`` does not divide."""
        if is_scalar(other):
            return self / other
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return MultiPoly()
        if other.is_constant():
            return self / other.constant_value()
        vars, num, den = self._aligned(other)
        guard = _guard(len(vars))
        lead_k = max(den)
        lead_c = den[lead_k]
        den_items = list(den.items())
        rem = dict(num)
        heap = [-k for k in rem]
        heapq.heapify(heap)
        quot = {}
        while rem:
            k = -heapq.heappop(heap)
            c = rem.get(k)
            if c is None:
                continue
            d = k - lead_k
            if d < 0 or d & guard:
                raise ArithmeticError("polynomial division is not exact")
            qc = c / lead_c
            quot[d] = qc
            for kd, cd in den_items:
                kk = kd + d
                val = rem.get(kk, 0) - qc * cd
                if val:
                    if kk not in rem:
                        heapq.heappush(heap, -kk)
                    rem[kk] = val
                else:
                    rem.pop(kk, None)
        return MultiPoly(quot, vars)

    def divides(self, other: "MultiPoly") -> bool:
        try:
            other.exquo(self)
        except ArithmeticError:
            return False
        return True

    # -- output
    def __str__(self):
        return render_poly(self)

    def __repr__(self):
        return f"MultiPoly({render_poly(self)!r})"


def render_scalar(c) -> str:
    c = QQ(c)
    return str(c)


def render_poly(p: MultiPoly) -> str:
    """Canonical text: graded-lex order, ``^`` for powers, ``*`` for products."""
    if not p.terms:
        return "0"
    parts = []
    for exps, c in p._sorted_terms():
        mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in zip(p.vars, exps) if e)
        neg = c < 0
        a = -c if neg else c
        if not mono:
            body = render_scalar(a)
        elif a == 1:
            body = mono
        else:
            body = f"{render_scalar(a)}*{mono}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def variables(*names: str):
    """Convenience: ``x, y = variables("x", "y")``."""
    out = tuple(MultiPoly.variable(n) for n in names)
    return out[0] if len(out) == 1 else out


# ---------------------------------------------------------------- gcd


def _dense(p: MultiPoly, var: str) -> list:
    out = [mpq(0)] * (p.degree(var) + 1)
    i = p.vars.index(var) if var in p.vars else None
    for k, c in p.terms.items():
        e = 0 if i is None else (k >> (_BITS * i)) & _FIELD
        out[e] = c
    return out


def _from_dense(coeffs: list, var: str) -> MultiPoly:
    return MultiPoly({e << 0: c for e, c in enumerate(coeffs) if c}, (var,))


def _dense_rem(a: list, b: list) -> list:
    a = list(a)
    db = len(b) - 1
    inv = 1 / b[-1]
    while len(a) - 1 >= db and any(a):
        if not a[-1]:
            a.pop()
            continue
        q = a[-1] * inv
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[shift + i] -= q * c
        a.pop()
    while a and not a[-1]:
        a.pop()
    return a


def _univariate_gcd(a: MultiPoly, b: MultiPoly, var: str) -> MultiPoly:
    x, y = _dense(a, var), _dense(b, var)
    while y:
        x, y = y, _dense_rem(x, y)
    inv = 1 / x[-1]
    return _from_dense([c * inv for c in x], var)


def _monomial_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    vars = _merge_vars(a.vars, b.vars)
    n = len(vars)
    mins = None
    for k in list(a._with_vars(vars)) + list(b._with_vars(vars)):
        e = _unpack(k, n)
        mins = e if mins is None else tuple(min(p, q) for p, q in zip(mins, e))
    return MultiPoly({_pack(mins): mpq(1)}, vars)


@lru_cache(maxsize=64)
def _sympy_ring(vars: tuple):
    from sympy.polys.domains import QQ as SQQ
    from sympy.polys.rings import ring
    R = ring(",".join(vars), SQQ)[0]
    return R, SQQ


def _sympy_gcd(a: MultiPoly, b: MultiPoly, vars: tuple) -> MultiPoly:
    R, dom = _sympy_ring(vars)
    pa = R.from_dict({e: dom(int(c.numerator), int(c.denominator)) for e, c in _items_in(a, vars)})
    pb = R.from_dict({e: dom(int(c.numerator), int(c.denominator)) for e, c in _items_in(b, vars)})
    g = pa.gcd(pb)
    return MultiPoly.from_dict({tuple(e): QQ(Fraction(int(c.numerator), int(c.denominator)))
                                for e, c in g.items()}, vars)


def _items_in(p: MultiPoly, vars: tuple):
    n = len(vars)
    for k, c in p._with_vars(vars).items():
        yield _unpack(k, n), c


def poly_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Greatest common divisor, normalized to leading coefficient 1."""
    if a.is_zero():
        return b / b.leading_coefficient() if b else MultiPoly.constant(1)
    if b.is_zero():
        return a / a.leading_coefficient()
    if a.is_constant() or b.is_constant():
        return MultiPoly.constant(1)
    used = tuple(sorted(set(a.free_vars()) | set(b.free_vars()), key=var_sort_key))
    if len(a.terms) == 1 or len(b.terms) == 1:
        return _monomial_gcd(a, b)
    if len(used) == 1:
        return _univariate_gcd(a, b, used[0])
    g = _sympy_gcd(a, b, used)
    return g / g.leading_coefficient()


# ---------------------------------------------------------------- RationalFunction


class RationalFunction:
    """Quotient of polynomials kept in lowest terms with a denominator whose
    leading coefficient is 1.  Equality is decided by cross-multiplication."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _reduced=False):
        num = _as_poly(num)
        den = MultiPoly.constant(1) if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> MultiPoly:
        if not self.den.is_constant():
            raise ValueError("not a polynomial")
        return self.num / self.den.constant_value()

    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, MultiPoly) or is_scalar(other):
            return RationalFunction(_as_poly(other), None, _reduced=True)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if is_scalar(other):
            return RationalFunction(self.num * other, self.den, _reduced=True) if other else RationalFunction(MultiPoly())
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n, _reduced=True)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    def __hash__(self):
        if self.den.is_constant():
            return hash(self.num / self.den.constant_value())
        return hash((self.num, self.den))

    def free_vars(self) -> tuple:
        return tuple(sorted(set(self.num.free_vars()) | set(self.den.free_vars()), key=var_sort_key))

    def subs(self, mapping: dict):
        num = self.num.subs(mapping)
        den = self.den.subs(mapping)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes under substitution")
        return simplify(num / den)

    def evaluate(self, point: dict):
        return self.subs(point)

    def diff(self, var: str):
        n, d = self.num, self.den
        return RationalFunction(n.diff(var) * d - n * d.diff(var), d * d)

    def __str__(self):
        if self.den.is_constant():
            return render_poly(self.num / self.den.constant_value())
        n = render_poly(self.num)
        if len(self.num) > 1:
            n = f"({n})"
        d = render_poly(self.den)
        if len(self.den) > 1 or "*" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"RationalFunction({self!s})"


def _as_poly(x) -> MultiPoly:
    if isinstance(x, MultiPoly):
        return x
    if is_scalar(x):
        return MultiPoly.constant(x)
    raise TypeError(f"expected a polynomial, got {type(x).__name__}")


def _reduce(num: MultiPoly, den: MultiPoly):
    if num.is_zero():
        return MultiPoly(), MultiPoly.constant(1)
    if den.is_constant():
        return num / den.constant_value(), MultiPoly.constant(1)
    g = poly_gcd(num, den)
    if not g.is_constant():
        num = num.exquo(g)
        den = den.exquo(g)
    lc = den.leading_coefficient()
    if lc != 1:
        num = num / lc
        den = den / lc
    return num, den


def simplify(x):
    """Collapse a field element to the simplest representation: rational
    functions with constant denominators become polynomials, constant
    polynomials become scalars."""
    if isinstance(x, RationalFunction):
        if x.den.is_constant():
            x = x.num / x.den.constant_value()
        else:
            return x
    if isinstance(x, MultiPoly):
        return x.constant_value() if x.is_constant() else x
    if is_scalar(x):
        return QQ(x)
    return x


def is_zero(x) -> bool:
    if is_scalar(x):
        return x == 0
    return x.is_zero()


def render(x) -> str:
    """Canonical text for any field element."""
    x = simplify(x)
    if is_scalar(x):
        return render_scalar(x)
    return str(x)


def free_vars(x) -> tuple:
    if is_scalar(x):
        return ()
    return tuple(x.free_vars())


def substitute(x, mapping: dict):
    if is_scalar(x):
        return QQ(x)
    return x.subs(mapping)


def to_field(x):
    """Field element used in mixed arithmetic: polynomials and rationals pass
    through, other scalars become ``mpq``."""
    if isinstance(x, (MultiPoly, RationalFunction)):
        return x
    return QQ(x)


def diff(x, var: str):
    if is_scalar(x):
        return mpq(0)
    return x.diff(var)


# ---------------------------------------------------------------- parsing

_ALLOWED_BIN = {ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow}


def parse_expr(text, allowed_vars=None):
    """Parse an arithmetic expression in rationals and named variables.

    Accepts ``+ - * / ^ **`` and parentheses.  Returns a simplified field
    element.  ``allowed_vars`` restricts the variable names.
    """
    if is_scalar(text):
        return QQ(text)
    if not isinstance(text, str):
        raise TypeError(f"cannot parse {text!r}")
    src = text.strip().replace("^", "**")
    if not src:
        raise ValueError("empty expression")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"malformed expression {text!r}") from exc

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ValueError(f"unsupported literal in {text!r}")
            if isinstance(node.value, float):
                seg = ast.get_source_segment(src, node)
                return QQ(Fraction(seg))
            return mpq(node.value)
        if isinstance(node, ast.Name):
            if allowed_vars is not None and node.id not in allowed_vars:
                raise ValueError(f"unknown variable {node.id!r} in {text!r}")
            return MultiPoly.variable(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = walk(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BIN:
            left = walk(node.left)
            right = walk(node.right)
            if isinstance(node.op, ast.Pow):
                right = simplify(right)
                if not is_scalar(right) or QQ(right).denominator != 1:
                    raise ValueError(f"exponent must be an integer in {text!r}")
                return left ** int(right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            return to_field(left) / to_field(right) if not is_scalar(right) or not is_scalar(left) else QQ(left) / QQ(right)
        raise ValueError(f"unsupported syntax in {text!r}")

    return simplify(walk(tree))


# ---------------------------------------------------------------- Laurent series


class LaurentSeries:
    """Truncated Laurent series in z.

    ``coeffs[i]`` is the coefficient of ``z**(start + i)``; coefficients are
    known exactly for exponents ``<= order`` and unknown beyond.
    """

    __slots__ = ("start", "coeffs", "order")

    def __init__(self, start: int, coeffs, order: int):
        coeffs = [to_field(c) for c in coeffs]
        span = order - start + 1
        if span < 0:
            coeffs, span = [], 0
        if len(coeffs) > span:
            coeffs = coeffs[:span]
        else:
            coeffs = coeffs + [mpq(0)] * (span - len(coeffs))
        self.start = start
        self.coeffs = coeffs
        self.order = order

    @classmethod
    def from_terms(cls, terms: dict, order: int) -> "LaurentSeries":
        """``terms`` maps exponents to coefficients; everything else is 0."""
        if not terms:
            return cls(order + 1, [], order)
        lo = min(terms)
        coeffs = [terms.get(e, 0) for e in range(lo, order + 1)]
        return cls(lo, coeffs, order)

    @classmethod
    def monomial(cls, exponent: int, order: int, coeff=1) -> "LaurentSeries":
        return cls.from_terms({exponent: coeff}, order)

    def coeff(self, e: int):
        if e > self.order:
            raise PrecisionError(f"coefficient of z^{e} requested beyond truncation order {self.order}")
        if e < self.start:
            return mpq(0)
        return self.coeffs[e - self.start]

    def __getitem__(self, e: int):
        return self.coeff(e)

    def valuation(self):
        for i, c in enumerate(self.coeffs):
            if not is_zero(c):
                return self.start + i
        return None

    def leading(self):
        v = self.valuation()
        if v is None:
            raise PrecisionError("series vanishes to its truncation order")
        return v, self.coeff(v)

    def truncate(self, order: int) -> "LaurentSeries":
        if order > self.order:
            raise PrecisionError("cannot extend a truncated series")
        return LaurentSeries(self.start, self.coeffs, order)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by z**k."""
        return LaurentSeries(self.start + k, self.coeffs, self.order + k)

    def scale(self, c) -> "LaurentSeries":
        return LaurentSeries(self.start, [c * a for a in self.coeffs], self.order)

    def map(self, fn) -> "LaurentSeries":
        return LaurentSeries(self.start, [fn(a) for a in self.coeffs], self.order)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.from_terms({0: other}, self.order)
        order = min(self.order, other.order)
        lo = min(self.start, other.start)
        coeffs = [self.coeff(e) + other.coeff(e) if e <= order else 0 for e in range(lo, order + 1)]
        return LaurentSeries(lo, coeffs, order)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other if isinstance(other, LaurentSeries) else -to_field(other))

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return self.scale(to_field(other))
        va = self.valuation()
        vb = other.valuation()
        if va is None or vb is None:
            # one factor is zero up to its precision
            o = min(self.order + (vb if vb is not None else other.order + 1),
                    other.order + (va if va is not None else self.order + 1))
            return LaurentSeries(o + 1, [], o)
        order = min(self.order + vb, other.order + va)
        lo = va + vb
        out = [mpq(0)] * (order - lo + 1)
        for i in range(va, self.order + 1):
            a = self.coeff(i)
            if is_zero(a):
                continue
            for j in range(vb, order - i + 1):
                b = other.coeff(j)
                if not is_zero(b):
                    out[i + j - lo] = out[i + j - lo] + a * b
        return LaurentSeries(lo, out, order)

    __rmul__ = __mul__

    def terms(self) -> dict:
        return {self.start + i: c for i, c in enumerate(self.coeffs) if not is_zero(c)}

    def subs(self, mapping: dict) -> "LaurentSeries":
        return self.map(lambda c: substitute(c, mapping))

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        order = min(self.order, other.order)
        lo = min(self.start, other.start)
        return all(self.coeff(e) == other.coeff(e) for e in range(lo, order + 1))

    def __repr__(self):
        shown = " + ".join(f"({render(c)})*z^{e}" for e, c in sorted(self.terms().items()))
        return f"LaurentSeries({shown or '0'} + O(z^{self.order + 1}))"


def series_inverse(s: LaurentSeries, order: int) -> LaurentSeries:
    """Inverse of a series with nonzero leading coefficient, to ``order``."""
    v, a0 = s.leading()
    n_max = order + v
    if n_max < 0:
        return LaurentSeries(order + 1, [], order)
    need = v + n_max
    if need > s.order:
        raise PrecisionError(f"inverse to order {order} needs input to order {need}")
    a = [s.coeff(v + k) for k in range(n_max + 1)]
    inv0 = 1 / to_field(a0)
    b = [inv0]
    for n in range(1, n_max + 1):
        acc = 0
        for k in range(1, n + 1):
            if not is_zero(a[k]):
                acc = acc + a[k] * b[n - k]
        b.append(simplify(-acc * inv0))
    return LaurentSeries(-v, b, order)


def series_sqrt(s: LaurentSeries, order: int) -> LaurentSeries:
    """Square root with leading coefficient the positive rational root of the
    input's leading coefficient."""
    v, a0 = s.leading()
    if v % 2:
        raise ValueError("no square root in series ring: odd valuation")
    r0 = _rational_sqrt(a0)
    if r0 is None:
        raise ValueError("no square root in series ring: leading coefficient is not a rational square")
    h = v // 2
    n_max = order - h
    if n_max < 0:
        return LaurentSeries(order + 1, [], order)
    need = v + n_max
    if need > s.order:
        raise PrecisionError(f"square root to order {order} needs input to order {need}")
    a = [s.coeff(v + k) for k in range(n_max + 1)]
    inv = 1 / (2 * r0)
    b = [r0]
    for n in range(1, n_max + 1):
        acc = a[n]
        for k in range(1, n):
            acc = acc - b[k] * b[n - k]
        b.append(simplify(acc * inv))
    return LaurentSeries(h, b, order)


def _rational_sqrt(c):
    from gmpy2 import is_square, isqrt
    c = simplify(c)
    if not is_scalar(c):
        return None
    c = QQ(c)
    if c <= 0:
        return None
    n, d = c.numerator, c.denominator
    if is_square(n) and is_square(d):
        return mpq(isqrt(n), isqrt(d))
    return None


# ---------------------------------------------------------------- linear algebra


def _domain(matrix):
    kind = "scalar"
    for row in matrix:
        for e in row:
            if isinstance(e, RationalFunction):
                return "rational"
            if isinstance(e, MultiPoly):
                kind = "poly"
    return kind


def _det_scalar(m):
    n = len(m)
    a = [[QQ(e) for e in row] for row in m]
    det = mpq(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return mpq(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        p = a[k][k]
        det *= p
        inv = 1 / p
        for i in range(k + 1, n):
            f = a[i][k] * inv
            if f:
                row_i, row_k = a[i], a[k]
                for j in range(k + 1, n):
                    row_i[j] -= f * row_k[j]
    return det


def _det_bareiss(m):
    n = len(m)
    a = [[_as_poly(e) for e in row] for row in m]
    sign = 1
    prev = MultiPoly.constant(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            cands = [i for i in range(k + 1, n) if not a[i][k].is_zero()]
            if not cands:
                return MultiPoly()
            piv = min(cands, key=lambda i: len(a[i][k]))
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        p = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                val = row_i[j] * p
                if not aik.is_zero() and not row_k[j].is_zero():
                    val = val - aik * row_k[j]
                row_i[j] = val.exquo(prev) if not val.is_zero() else val
        prev = p
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def det_exact(matrix):
    """Determinant by fraction-free elimination.

    Scalars use rational Gaussian elimination, polynomial entries use Bareiss
    with exact division, and rational-function entries are first cleared of
    denominators row by row.  The empty matrix has determinant 1.
    """
    n = len(matrix)
    if n == 0:
        return mpq(1)
    if any(len(row) != n for row in matrix):
        raise ValueError("determinant of a non-square matrix")
    kind = _domain(matrix)
    if kind == "scalar":
        return _det_scalar(matrix)
    if kind == "poly":
        return simplify(_det_bareiss(matrix))
    scale = MultiPoly.constant(1)
    cleared = []
    for row in matrix:
        dens = [e.den for e in row if isinstance(e, RationalFunction)]
        l = MultiPoly.constant(1)
        for d in dens:
            if not d.is_constant():
                g = poly_gcd(l, d)
                l = l * d.exquo(g)
        scale = scale * l
        new_row = []
        for e in row:
            if isinstance(e, RationalFunction):
                new_row.append((l.exquo(e.den)) * e.num)
            else:
                new_row.append(_as_poly(e) * l)
        cleared.append(new_row)
    return simplify(RationalFunction(_det_bareiss(cleared), scale))


def rref(matrix):
    """Reduced row echelon form over the field of fractions.

    Returns ``(rows, pivot_columns)``.
    """
    a = [[simplify(to_field(e)) for e in row] for row in matrix]
    if not a:
        return [], []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        best = None
        for i in range(r, len(a)):
            if not is_zero(a[i][c]):
                size = _size(a[i][c])
                if best is None or size < best:
                    piv, best = i, size
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / to_field(a[r][c])
        a[r] = [simplify(e * inv) if not is_zero(e) else e for e in a[r]]
        for i in range(len(a)):
            if i != r and not is_zero(a[i][c]):
                f = a[i][c]
                a[i] = [simplify(x - f * y) if not is_zero(y) else x for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def _size(e) -> int:
    if is_scalar(e):
        return 1
    if isinstance(e, MultiPoly):
        return 1 + len(e)
    return 1 + len(e.num) + len(e.den)


def kernel_basis(matrix, ncols: int | None = None):
    """Basis of the right kernel ``{v : M v = 0}`` as a list of vectors."""
    if ncols is None:
        if not matrix:
            raise ValueError("kernel of an empty matrix needs ncols")
        ncols = len(matrix[0])
    if not matrix:
        return [[mpq(1) if i == j else mpq(0) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(matrix)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for row, p in zip(red, pivots):
            if not is_zero(row[f]):
                v[p] = simplify(-row[f])
        basis.append(v)
    return basis


def rank(matrix) -> int:
    if not matrix:
        return 0
    return len(rref(matrix)[1])


def mat_mul(a, b):
    return [[sum((x * y for x, y in zip(row, col)), mpq(0)) for col in zip(*b)] for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)]
