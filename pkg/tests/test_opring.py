from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lbmfd.opring import (
    DimensionMismatch,
    NotAUnit,
    NotDivisible,
    OperatorPoly,
    ParamPoly,
    RationalCoeff,
    UnboundParameter,
    VanishingDenominator,
    eval_fourier,
    exact_div,
    fourier_symbol,
    generators,
    param_gcd,
    unit_invert,
)

from conftest import op


def test_shift_composition_and_inverse():
    x = OperatorPoly.shift((1,))
    assert x * OperatorPoly.shift((-1,)) == OperatorPoly.one(1)
    assert x ** 3 == OperatorPoly.shift((3,))
    assert x ** -2 == OperatorPoly.shift((-2,))
    assert unit_invert(OperatorPoly.shift((2,), 3)) == OperatorPoly.shift((-2,), Fraction(1, 3))


def test_non_unit_cannot_be_inverted():
    with pytest.raises(NotAUnit):
        unit_invert(op("x + 1"))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        OperatorPoly.one(1) + OperatorPoly.one(2)


def test_generators_2d():
    x, y = generators(2)
    assert (x * y).terms.keys() == {(1, 1)}


def test_rational_coefficients_normalise():
    a = RationalCoeff.param("s") - 1
    b = (1 - RationalCoeff.param("s")) * -1
    assert a == b
    assert (a * a) / a == a
    assert (RationalCoeff.param("s") / (2 * RationalCoeff.param("lambda"))).render() == "s/(2*lambda)"
    assert (RationalCoeff.const(1) - RationalCoeff.param("s")).render() == "(1-s)"


def test_param_gcd():
    s, p = ParamPoly.var("s"), ParamPoly.var("p")
    g = param_gcd((1 - s) * (1 - p), (1 - s) * (2 + p))
    assert g == 1 - s or g == s - 1


def test_evaluate_and_unbound():
    c = RationalCoeff.param("s") / 2
    assert c.evaluate({"s": Fraction(3)}) == Fraction(3, 2)
    with pytest.raises(UnboundParameter):
        c.evaluate({})
    with pytest.raises(VanishingDenominator):
        (1 / RationalCoeff.param("s")).evaluate({"s": 0})


def test_render_groups_coefficients():
    assert op("(1-s)*(x - x^-1)/(2*lambda)").render() == "(1-s)/(2*lambda) * (x - x^-1)"
    assert op("(x + 1 + x^-1)/3").render() == "1/3 * (x + 1 + x^-1)"
    assert OperatorPoly.zero(1).render() == "0"


def test_fourier_symbol_follows_shift_convention():
    # (shift_z f)(x) = f(x - z dx) has symbol exp(-i z dx xi)
    a = op("2*x + 3*x^-1")
    xi, dx = 0.7, 0.1
    expected = 2 * np.exp(-1j * dx * xi) + 3 * np.exp(1j * dx * xi)
    assert abs(eval_fourier(a, [xi], dx, {}) - expected) < 1e-14


def test_fourier_symbol_is_multiplicative(rng):
    a, b = op("s*x + 1 - x^-2"), op("x^-1/2 + 3*x")
    th = rng.uniform(-np.pi, np.pi, size=(20, 1))
    env = {"s": 0.3}
    lhs = fourier_symbol(a * b, th, env)
    rhs = fourier_symbol(a, th, env) * fourier_symbol(b, th, env)
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_exact_division():
    a, b = op("x + 1"), op("x - x^-1")
    assert exact_div(a * b, b) == a
    with pytest.raises(NotDivisible):
        exact_div(op("x + 2"), op("x + 1"))


small = st.integers(-3, 3)
terms_1d = st.dictionaries(st.tuples(st.integers(-2, 2)), small.filter(bool), max_size=4)


def _from(terms):
    return OperatorPoly(1, {z: c for z, c in terms.items()})


@settings(max_examples=60, deadline=None)
@given(terms_1d, terms_1d, terms_1d)
def test_ring_axioms(a, b, c):
    a, b, c = _from(a), _from(b), _from(c)
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == OperatorPoly.zero(1)


@settings(max_examples=40, deadline=None)
@given(terms_1d, terms_1d)
def test_division_undoes_multiplication(a, b):
    a, b = _from(a), _from(b)
    if not b.is_zero():
        assert (a * b) / b == a
