"""Exact arithmetic on finite-difference operators.

Three layers:

* :class:`ParamPoly`, polynomials with rational coefficients in named scheme
  parameters (``lambda``, ``s``, ``C`` ...);
* :class:`RationalCoeff`, quotients of two of those, the field every operator
  weight lives in;
* :class:`OperatorPoly`, finite weighted sums of lattice shifts, that is
  Laurent polynomials in the generators ``x``, ``y``, ``z``.

The shift ``x^k`` acts on lattice functions as ``(x^k f)(x) = f(x - k dx)``.
Every object is immutable once built.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from numbers import Rational
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

Monomial = Tuple[Tuple[str, int], ...]
Shift = Tuple[int, ...]

SHIFT_NAMES = ("x", "y", "z")


class OperatorError(ValueError):
    pass


class DimensionMismatch(OperatorError):
    pass


class NotAUnit(OperatorError):
    pass


class NotDivisible(OperatorError):
    pass


class UnboundParameter(KeyError):
    pass


class VanishingDenominator(ZeroDivisionError):
    pass


# -- monomials in the parameters --------------------------------------------

def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    return tuple(sorted((n, e) for n, e in exps.items() if e))


def _mono_div(a: Monomial, b: Monomial) -> Monomial:
    return _mono_mul(a, tuple((n, -e) for n, e in b))


def _mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    db = dict(b)
    return tuple((n, min(e, db[n])) for n, e in a if n in db)


def _mono_key(m: Monomial):
    # graded, ties broken lexicographically over alphabetical names
    return (sum(e for _, e in m), m)


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)) and not isinstance(v, bool):
        return Fraction(v)
    raise TypeError(f"exact rational expected, got {type(v).__name__}")


class ParamPoly:
    """Polynomial in named parameters with exact rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: Dict[Monomial, Fraction] = {}
        for m, c in (terms or {}).items():
            c = _as_fraction(c)
            if c:
                key = tuple(sorted((n, e) for n, e in m if e))
                clean[key] = clean.get(key, 0) + c
        self.terms = {m: c for m, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "ParamPoly":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c) -> "ParamPoly":
        c = _as_fraction(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def var(cls, name: str, exp: int = 1) -> "ParamPoly":
        return cls._raw({((name, exp),): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise OperatorError(f"{self.render()} is not a constant")
        return self.terms.get((), Fraction(0))

    def variables(self) -> set:
        return {n for m in self.terms for n, _ in m}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _mono_key(t[0]))

    def leading(self) -> Tuple[Monomial, Fraction]:
        return max(self.terms.items(), key=lambda t: _mono_key(t[0]))

    def __add__(self, other) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            other = ParamPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return ParamPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            other = ParamPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "ParamPoly":
        return (-self) + other

    def scale(self, c: Fraction) -> "ParamPoly":
        if not c:
            return ParamPoly._raw({})
        return ParamPoly._raw({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            return self.scale(_as_fraction(other))
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return ParamPoly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ParamPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = ParamPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamPoly):
            try:
                other = ParamPoly.const(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def content(self) -> Fraction:
        """Positive c such that self / c has coprime integer coefficients."""
        if not self.terms:
            return Fraction(1)
        g = 0
        for c in self.terms.values():
            g = gcd(g, c.numerator)
        return Fraction(g, lcm(*(c.denominator for c in self.terms.values())))

    def min_monomial(self) -> Monomial:
        """Largest monomial dividing every term."""
        it = iter(self.terms)
        out = next(it)
        for m in it:
            if not out:
                break
            out = _mono_gcd(out, m)
        return out

    def div_monomial(self, mono: Monomial) -> "ParamPoly":
        if not mono:
            return self
        return ParamPoly._raw({_mono_div(m, mono): c for m, c in self.terms.items()})

    def evaluate(self, bindings: Mapping[str, object]):
        total = 0
        for m, c in self.terms.items():
            term = c
            for name, e in m:
                try:
                    v = bindings[name]
                except KeyError:
                    raise UnboundParameter(name) from None
                term = term * v ** e
            total = total + term
        return total

    def render(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for i, (m, c) in enumerate(self.sorted_terms()):
            factors = [n if e == 1 else f"{n}^{e}" for n, e in m]
            a = abs(c)
            if a != 1 or not factors:
                factors.insert(0, str(a))
            body = "*".join(factors)
            if i == 0:
                out = ("-" if c < 0 else "") + body
            else:
                out += ("-" if c < 0 else "+") + body
        return out

    def __repr__(self) -> str:
        return f"ParamPoly({self.render()})"


# -- multivariate gcd over Q, delegated to sympy's sparse polynomial rings --

@lru_cache(maxsize=64)
def _sympy_ring(nvars: int):
    from sympy.polys.domains import QQ
    from sympy.polys.rings import ring

    R, *_ = ring(",".join(f"v{i}" for i in range(nvars)), QQ)
    return R


def _to_sympy(p: ParamPoly, names: Tuple[str, ...]):
    R = _sympy_ring(len(names))
    idx = {n: i for i, n in enumerate(names)}
    data = {}
    for m, c in p.terms.items():
        exps = [0] * len(names)
        for n, e in m:
            exps[idx[n]] = e
        data[tuple(exps)] = R.domain.convert(c)
    return R.from_dict(data)


def _from_sympy(poly, names: Tuple[str, ...]) -> ParamPoly:
    terms = {}
    for exps, c in poly.items():
        m = tuple((names[i], e) for i, e in enumerate(exps) if e)
        terms[m] = Fraction(int(c.numerator), int(c.denominator))
    return ParamPoly(terms)


def param_gcd(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    names = tuple(sorted(a.variables() | b.variables()))
    if not names:
        return ParamPoly.const(1)
    return _from_sympy(_to_sympy(a, names).gcd(_to_sympy(b, names)), names)


def param_exact_div(a: ParamPoly, b: ParamPoly) -> ParamPoly:
    names = tuple(sorted(a.variables() | b.variables()))
    if not names:
        return a.scale(1 / b.constant_value())
    q, r = _to_sympy(a, names).div(_to_sympy(b, names))
    if r:
        raise NotDivisible(f"{b.render()} does not divide {a.render()}")
    return _from_sympy(q, names)


_ZERO = ParamPoly._raw({})
_ONE = ParamPoly._raw({(): Fraction(1)})


def _normalize(num: ParamPoly, den: ParamPoly) -> Tuple[ParamPoly, ParamPoly]:
    if not num.terms:
        return _ZERO, _ONE
    if len(den.terms) == 1:
        (mono, c), = den.terms.items()
        if mono:
            shared = _mono_gcd(num.min_monomial(), mono)
            if shared:
                num = num.div_monomial(shared)
                mono = _mono_div(mono, shared)
        num = num.scale(1 / c) if c != 1 else num
        return num, (ParamPoly._raw({mono: Fraction(1)}) if mono else _ONE)
    shared = _mono_gcd(num.min_monomial(), den.min_monomial())
    if shared:
        num = num.div_monomial(shared)
        den = den.div_monomial(shared)
    if not num.is_constant():
        g = param_gcd(num, den)
        if not g.is_constant():
            num = param_exact_div(num, g)
            den = param_exact_div(den, g)
            if len(den.terms) == 1:
                return _normalize(num, den)
    c = den.content()
    if den.leading()[1] < 0:
        c = -c
    return num.scale(1 / c), den.scale(1 / c)


class RationalCoeff:
    """Canonical quotient ``num / den`` of parameter polynomials.

    The denominator has coprime integer coefficients and a positive leading
    term, and shares no common factor with the numerator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, ParamPoly):
            num = ParamPoly.const(num)
        if den is None:
            den = _ONE
        elif not isinstance(den, ParamPoly):
            den = ParamPoly.const(den)
        if den.is_zero():
            raise VanishingDenominator("zero denominator")
        self.num, self.den = _normalize(num, den)

    @classmethod
    def _raw(cls, num: ParamPoly, den: ParamPoly) -> "RationalCoeff":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    @classmethod
    def const(cls, c) -> "RationalCoeff":
        return cls._raw(ParamPoly.const(c), _ONE)

    @classmethod
    def zero(cls) -> "RationalCoeff":
        return cls._raw(_ZERO, _ONE)

    @classmethod
    def param(cls, name: str) -> "RationalCoeff":
        return cls._raw(ParamPoly.var(name), _ONE)

    def is_zero(self) -> bool:
        return not self.num.terms

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def variables(self) -> set:
        return self.num.variables() | self.den.variables()

    def __add__(self, other) -> "RationalCoeff":
        other = _coerce_coeff(other)
        if not self.num.terms:
            return other
        if not other.num.terms:
            return self
        if self.den == other.den:
            return RationalCoeff(self.num + other.num, self.den)
        return RationalCoeff(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalCoeff":
        return RationalCoeff._raw(-self.num, self.den)

    def __sub__(self, other) -> "RationalCoeff":
        return self + (-_coerce_coeff(other))

    def __rsub__(self, other) -> "RationalCoeff":
        return _coerce_coeff(other) + (-self)

    def __mul__(self, other) -> "RationalCoeff":
        other = _coerce_coeff(other)
        if not self.num.terms or not other.num.terms:
            return RationalCoeff.zero()
        if self.den is _ONE and other.den is _ONE:
            return RationalCoeff._raw(self.num * other.num, _ONE)
        return RationalCoeff(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalCoeff":
        if self.is_zero():
            raise VanishingDenominator("inverse of a zero coefficient")
        return RationalCoeff(self.den, self.num)

    def __truediv__(self, other) -> "RationalCoeff":
        return self * _coerce_coeff(other).inverse()

    def __rtruediv__(self, other) -> "RationalCoeff":
        return _coerce_coeff(other) * self.inverse()

    def __pow__(self, n: int) -> "RationalCoeff":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return RationalCoeff.const(1)
        return RationalCoeff._raw(self.num ** n, self.den ** n)

    def __eq__(self, other) -> bool:
        try:
            other = _coerce_coeff(other)
        except TypeError:
            return NotImplemented
        if self.num == other.num and self.den == other.den:
            return True
        return (self.num * other.den - other.num * self.den).is_zero()

    def __hash__(self):
        return hash((self.num, self.den))

    def evaluate(self, bindings: Mapping[str, object]):
        d = self.den.evaluate(bindings)
        if d == 0:
            raise VanishingDenominator(f"denominator {self.den.render()} vanishes")
        return self.num.evaluate(bindings) / d

    def substitute(self, values: Mapping[str, "RationalCoeff"]) -> "RationalCoeff":
        """Replace some parameters by coefficients, keeping the others symbolic."""
        def sub(p: ParamPoly) -> RationalCoeff:
            total = RationalCoeff.zero()
            for m, c in p.terms.items():
                term = RationalCoeff.const(c)
                for name, e in m:
                    base = values.get(name)
                    term = term * (base ** e if base is not None else RationalCoeff(ParamPoly.var(name, e)))
                total = total + term
            return total
        return sub(self.num) / sub(self.den)

    def render(self) -> str:
        if self.is_zero():
            return "0"
        c = self.num.content()
        prim = self.num.scale(1 / c)
        sign = ""
        if prim.sorted_terms()[0][1] < 0:
            sign, prim = "-", -prim
        if prim.is_constant():
            num_s = str(c.numerator)
        else:
            factors = [] if c.numerator == 1 else [str(c.numerator)]
            mono = prim.min_monomial() if len(prim.terms) > 1 else ()
            if mono:
                factors.append(ParamPoly._raw({mono: Fraction(1)}).render())
                prim = prim.div_monomial(mono)
            body = prim.render()
            factors.append(f"({body})" if len(prim.terms) > 1 else body)
            num_s = "*".join(factors)
        den_parts = []
        if c.denominator != 1:
            den_parts.append(str(c.denominator))
        if not self.den.is_constant():
            d = self.den.render()
            den_parts.append(f"({d})" if len(self.den.terms) > 1 else d)
        if not den_parts:
            return sign + num_s
        den_s = "*".join(den_parts)
        if "*" in den_s and not den_s.startswith("("):
            den_s = f"({den_s})"
        return f"{sign}{num_s}/{den_s}"

    def __repr__(self) -> str:
        return f"RationalCoeff({self.render()})"


def _coerce_coeff(v) -> RationalCoeff:
    if isinstance(v, RationalCoeff):
        return v
    if isinstance(v, ParamPoly):
        return RationalCoeff._raw(v, _ONE)
    return RationalCoeff.const(_as_fraction(v))


def as_coeff(v) -> RationalCoeff:
    """Coerce ints, Fractions, parameter polynomials or parameter names."""
    if isinstance(v, str):
        return RationalCoeff.param(v)
    return _coerce_coeff(v)


class OperatorPoly:
    """Finite sum of shifts weighted by :class:`RationalCoeff`.

    ``terms`` maps an integer shift vector of length ``dim`` to its weight;
    zero is the empty map.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Iterable[int], object] | None = None):
        if dim not in (1, 2, 3):
            raise OperatorError(f"dimension must be 1, 2 or 3, got {dim}")
        clean: Dict[Shift, RationalCoeff] = {}
        for z, c in (terms or {}).items():
            z = tuple(int(v) for v in z)
            if len(z) != dim:
                raise DimensionMismatch(f"shift {z} does not have length {dim}")
            c = as_coeff(c)
            clean[z] = clean[z] + c if z in clean else c
        self.dim = dim
        self.terms = {z: c for z, c in clean.items() if not c.is_zero()}

    @classmethod
    def _raw(cls, dim: int, terms: Dict[Shift, RationalCoeff]) -> "OperatorPoly":
        obj = cls.__new__(cls)
        obj.dim = dim
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, dim: int) -> "OperatorPoly":
        return cls._raw(dim, {})

    @classmethod
    def const(cls, dim: int, c) -> "OperatorPoly":
        c = as_coeff(c)
        return cls._raw(dim, {} if c.is_zero() else {(0,) * dim: c})

    @classmethod
    def one(cls, dim: int) -> "OperatorPoly":
        return cls.const(dim, 1)

    @classmethod
    def shift(cls, z: Iterable[int], coeff=1) -> "OperatorPoly":
        z = tuple(int(v) for v in z)
        return cls(len(z), {z: coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.dim in self.terms)

    def scalar_value(self) -> RationalCoeff:
        if not self.is_scalar():
            raise OperatorError(f"{self.render()} involves shifts")
        return self.terms.get((0,) * self.dim, RationalCoeff.zero())

    def coeff(self, z: Iterable[int]) -> RationalCoeff:
        return self.terms.get(tuple(z), RationalCoeff.zero())

    def variables(self) -> set:
        out = set()
        for c in self.terms.values():
            out |= c.variables()
        return out

    def support_radius(self) -> int:
        return max((max(abs(v) for v in z) for z in self.terms), default=0)

    def _coerce(self, other) -> "OperatorPoly":
        if isinstance(other, OperatorPoly):
            if other.dim != self.dim:
                raise DimensionMismatch(f"dimensions {self.dim} and {other.dim} differ")
            return other
        return OperatorPoly.const(self.dim, other)

    def __add__(self, other) -> "OperatorPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for z, c in other.terms.items():
            if z in out:
                v = out[z] + c
                if v.is_zero():
                    del out[z]
                else:
                    out[z] = v
            else:
                out[z] = c
        return OperatorPoly._raw(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> "OperatorPoly":
        return OperatorPoly._raw(self.dim, {z: -c for z, c in self.terms.items()})

    def __sub__(self, other) -> "OperatorPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "OperatorPoly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "OperatorPoly":
        if not isinstance(other, OperatorPoly):
            c = as_coeff(other)
            if c.is_zero():
                return OperatorPoly.zero(self.dim)
            return OperatorPoly._raw(self.dim, {z: v * c for z, v in self.terms.items()})
        other = self._coerce(other)
        out: Dict[Shift, RationalCoeff] = {}
        for z1, c1 in self.terms.items():
            for z2, c2 in other.terms.items():
                z = tuple(a + b for a, b in zip(z1, z2))
                p = c1 * c2
                out[z] = out[z] + p if z in out else p
        return OperatorPoly._raw(self.dim, {z: c for z, c in out.items() if not c.is_zero()})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "OperatorPoly":
        if n < 0:
            return unit_invert(self) ** (-n)
        result = OperatorPoly.one(self.dim)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other) -> "OperatorPoly":
        if isinstance(other, OperatorPoly):
            return exact_div(self, other)
        return self * as_coeff(other).inverse()

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorPoly):
            try:
                other = OperatorPoly.const(self.dim, other)
            except TypeError:
                return NotImplemented
        if self.dim != other.dim or self.terms.keys() != other.terms.keys():
            return False
        return all(self.terms[z] == other.terms[z] for z in self.terms)

    __hash__ = None

    def map_coeffs(self, fn) -> "OperatorPoly":
        return OperatorPoly(self.dim, {z: fn(c) for z, c in self.terms.items()})

    def substitute(self, values: Mapping[str, RationalCoeff]) -> "OperatorPoly":
        return self.map_coeffs(lambda c: c.substitute(values))

    def numeric_terms(self, bindings: Mapping[str, float]):
        """Shift vectors as a (k, dim) int array and float weights, parameters bound."""
        zs = sorted(self.terms)
        ws = np.array([float(self.terms[z].evaluate(bindings)) for z in zs], dtype=float)
        return np.array(zs, dtype=int).reshape(-1, self.dim), ws

    def render(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for coeff, members in _group_by_coefficient(self):
            body = _render_shift_sum(members)
            c = coeff.render()
            if body == "1":
                piece = c
            elif c == "1":
                piece = body
            elif c == "-1":
                piece = "-" + (f"({body})" if len(members) > 1 else body)
            else:
                piece = f"{c} * " + (f"({body})" if len(members) > 1 else body)
            pieces.append(piece)
        out = pieces[0]
        for p in pieces[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"OperatorPoly({self.render()})"


def _shift_order(z: Shift):
    # descending powers of x, then y, then z: x, 1, x^-1
    return tuple(-v for v in z)


def _group_by_coefficient(a: OperatorPoly):
    """Gather shifts whose weights are rational multiples of one another."""
    items = sorted(a.terms.items(), key=lambda t: _shift_order(t[0]))
    used = [False] * len(items)
    groups = []
    for i, (z, c) in enumerate(items):
        if used[i]:
            continue
        used[i] = True
        members = [(z, Fraction(1))]
        for j in range(i + 1, len(items)):
            if not used[j]:
                ratio = items[j][1] / c
                if ratio.is_constant():
                    members.append((items[j][0], ratio.constant_value()))
                    used[j] = True
        g = 0
        for _, r in members:
            g = gcd(g, r.numerator)
        g = Fraction(g, lcm(*(r.denominator for _, r in members)))
        groups.append((c * g, [(zz, r / g) for zz, r in members]))
    return groups


def render_shift(z: Shift) -> str:
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(SHIFT_NAMES, z) if e]
    return "*".join(parts) if parts else "1"


def _render_shift_sum(members) -> str:
    out = ""
    for i, (z, r) in enumerate(members):
        s = render_shift(z)
        a = abs(r)
        body = s if a == 1 else (str(a) if s == "1" else f"{a}*{s}")
        if i == 0:
            out = ("-" if r < 0 else "") + body
        else:
            out += (" - " if r < 0 else " + ") + body
    return out


def generators(dim: int):
    """Unit shifts along each axis."""
    out = []
    for k in range(dim):
        z = [0] * dim
        z[k] = 1
        out.append(OperatorPoly.shift(z))
    return tuple(out)


def op_add(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    return a + a._coerce(b)


def op_mul(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    return a * a._coerce(b)


def unit_invert(u: OperatorPoly) -> OperatorPoly:
    """Inverse of a unit ``alpha * shift_z``, namely ``(1/alpha) * shift_{-z}``."""
    if len(u.terms) != 1:
        raise NotAUnit(f"{u.render()} is not a unit ({len(u.terms)} terms)")
    (z, c), = u.terms.items()
    return OperatorPoly._raw(u.dim, {tuple(-v for v in z): c.inverse()})


def eval_fourier(a: OperatorPoly, xi, dx: float, bindings: Mapping[str, float]) -> complex:
    """Symbol ``sum_z a_z exp(-i dx z.xi)`` with the parameters bound."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (a.dim,):
        raise DimensionMismatch(f"wave vector of length {a.dim} expected")
    return complex(fourier_symbol(a, dx * xi[None, :], bindings)[0])


def fourier_symbol(a: OperatorPoly, thetas, bindings: Mapping[str, float]) -> np.ndarray:
    """Symbol over many phases ``theta = dx * xi`` given as an (n, dim) array."""
    thetas = np.asarray(thetas, dtype=float).reshape(-1, a.dim)
    if not a.terms:
        return np.zeros(len(thetas), dtype=complex)
    zs, ws = a.numeric_terms(bindings)
    return np.exp(-1j * (thetas @ zs.T)) @ ws.astype(complex)


def _to_polynomial(a: OperatorPoly):
    lo = tuple(min(z[k] for z in a.terms) for k in range(a.dim))
    return lo, {tuple(v - m for v, m in zip(z, lo)): c for z, c in a.terms.items()}


def exact_div(a: OperatorPoly, b: OperatorPoly) -> OperatorPoly:
    """Quotient ``a / b`` in the operator ring, or :class:`NotDivisible`."""
    b = a._coerce(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero operator")
    if a.is_zero():
        return OperatorPoly.zero(a.dim)
    if len(b.terms) == 1:
        return a * unit_invert(b)
    alo, rem = _to_polynomial(a)
    blo, bb = _to_polynomial(b)
    # once both sides have nonnegative exponents, lex-order polynomial division decides divisibility
    lead = max(bb)
    inv = bb[lead].inverse()
    quot: Dict[Shift, RationalCoeff] = {}
    while rem:
        z = max(rem)
        dz = tuple(p - q for p, q in zip(z, lead))
        if any(v < 0 for v in dz):
            raise NotDivisible(f"{b.render()} does not divide {a.render()}")
        f = rem[z] * inv
        quot[dz] = f
        for zb, cb in bb.items():
            zz = tuple(p + q for p, q in zip(dz, zb))
            v = rem.get(zz, RationalCoeff.zero()) - f * cb
            if v.is_zero():
                rem.pop(zz, None)
            else:
                rem[zz] = v
    off = tuple(p - q for p, q in zip(alo, blo))
    return OperatorPoly._raw(a.dim, {tuple(v + o for v, o in zip(z, off)): c for z, c in quot.items()})
