import pytest
from hypothesis import given, settings, strategies as st

from lbmfd.linalg import (
    OpMatrix,
    RingPoly,
    ShapeError,
    SingularMatrix,
    annihilates_row,
    apply_ring_poly,
    charpoly_by_determinant,
    charpoly_trimmed,
    faddeev_leverrier,
    field_invert,
    kernel_fraction_field,
    minimal_polynomial,
    mpamfr,
)
from lbmfd.opring import OperatorPoly

from conftest import mat, op, poly

A_I = [[1, 1, 1], [1, 2, 1], [1, 2, 0]]
A_II = [[1, 1, 1], [0, 2, 0], [0, 0, 2]]
A_III = [[1, 1, 0], [1, 2, 0], [1, 2, 1]]
A_IV = [[1, 0, 1], [0, -2, 0], [0, 0, 2]]


def test_charpoly_of_integer_examples():
    assert faddeev_leverrier(mat(A_I)) == poly(1, 1, -2, -3, 1)
    assert faddeev_leverrier(mat(A_II)) == poly(1, -4, 8, -5, 1)
    assert faddeev_leverrier(mat(A_III)) == poly(1, -1, 4, -4, 1)
    assert faddeev_leverrier(mat(A_IV)) == poly(1, 4, -4, -1, 1)


def test_minimal_polynomial_smaller_than_charpoly():
    assert minimal_polynomial(mat(A_II)) == poly(1, 2, -3, 1)
    assert minimal_polynomial(mat(A_IV)) == faddeev_leverrier(mat(A_IV))


def test_trimming_integer_example():
    C = mat(A_III)
    trimmed = charpoly_trimmed(C, [0, 1])
    assert trimmed == poly(1, 1, -3, 1)
    assert faddeev_leverrier(C.cut([0, 1])) == trimmed * RingPoly.monomial(1, 1)
    chi = faddeev_leverrier(C)
    assert chi.divmod(trimmed)[1].is_zero()


def test_row_annihilator_of_integer_example():
    # first row of A_IV is killed by a degree-2 divisor of its charpoly
    nu = mpamfr(mat(A_IV))
    assert nu == poly(1, 2, -3, 1)
    assert annihilates_row(nu, mat(A_IV), 0)
    assert not annihilates_row(nu, mat(A_IV), 1)


def test_faddeev_leverrier_matches_determinant_symbolic():
    C = OpMatrix(1, [[op("(1-s)*x"), op("s/2")], [op("lambda*(x-x^-1)"), op("1-p")]])
    assert faddeev_leverrier(C) == charpoly_by_determinant(C)
    assert apply_ring_poly(faddeev_leverrier(C), C).is_zero()


def test_field_inverse():
    M = mat([["1", "1", "1"], ["0", "lambda", "-lambda"], ["-2*lambda^2", "lambda^2", "lambda^2"]])
    assert M @ field_invert(M) == OpMatrix.identity(1, 3)
    with pytest.raises(SingularMatrix):
        field_invert(mat([[1, 2], [2, 4]]))


def test_shapes():
    with pytest.raises(ShapeError):
        faddeev_leverrier(OpMatrix(1, [[1, 2]]))
    with pytest.raises(ShapeError):
        mat([[1, 2]]) @ mat([[1, 2]])


def test_kernel_over_fraction_field():
    V = OpMatrix(1, [[op("x"), op("1-s"), op("x + x^-1")]])
    ker = kernel_fraction_field(V)
    assert len(ker) == 2
    for v in ker:
        total = sum((a * b for a, b in zip(V.row(0), v)), OperatorPoly.zero(1))
        assert total.is_zero()


def test_ring_poly_arithmetic():
    P = poly(1, "1-s", "x", 1)
    Q = poly(1, "x^-1", 1)
    q, r = (P * Q + poly(1, 3)).divmod(Q)
    assert q == P and r == poly(1, 3)
    assert P.render() == "X^2 + (x)*X + (1-s)"


entries = st.sampled_from(["0", "1", "-1", "2", "x", "x^-1", "x + 1", "s", "1-s", "x - x^-1", "s*x"])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.lists(entries, min_size=n, max_size=n),
                                                     min_size=n, max_size=n)))
def test_cayley_hamilton_and_oracle(rows):
    C = mat(rows)
    chi = faddeev_leverrier(C)
    assert chi.is_monic() and chi.degree == len(rows)
    assert apply_ring_poly(chi, C).is_zero()
    assert chi == charpoly_by_determinant(C)
    mu = minimal_polynomial(C)
    assert chi.divmod(mu)[1].is_zero()
