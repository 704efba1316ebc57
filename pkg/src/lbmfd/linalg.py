"""Matrices and polynomials over the operator ring.

Characteristic polynomials come from the Faddeev-Leverrier recursion, which
only needs ring operations plus exact division of traces by integers.
Kernels over the fraction field are computed from minors (Cramer's rule),
so no rational function of shifts is ever formed.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .opring import (
    NotDivisible,
    OperatorError,
    OperatorPoly,
    RationalCoeff,
    VanishingDenominator,
    as_coeff,
    exact_div,
)


class ShapeError(ValueError):
    pass


class SingularMatrix(ArithmeticError):
    pass


def _op(dim: int, v) -> OperatorPoly:
    if isinstance(v, OperatorPoly):
        if v.dim != dim:
            raise ShapeError(f"entry of dimension {v.dim} in a matrix of dimension {dim}")
        return v
    return OperatorPoly.const(dim, v)


class OpMatrix:
    """Dense matrix with :class:`OperatorPoly` entries (all of one lattice dimension)."""

    __slots__ = ("dim", "rows", "cols", "entries")

    def __init__(self, dim: int, entries: Sequence[Sequence[object]]):
        rows = [tuple(_op(dim, v) for v in row) for row in entries]
        if not rows or not rows[0]:
            raise ShapeError("matrix must have at least one row and one column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ShapeError("ragged matrix rows")
        self.dim = dim
        self.rows = len(rows)
        self.cols = len(rows[0])
        self.entries = tuple(rows)

    @classmethod
    def zeros(cls, dim: int, rows: int, cols: Optional[int] = None) -> "OpMatrix":
        cols = rows if cols is None else cols
        z = OperatorPoly.zero(dim)
        return cls(dim, [[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, dim: int, n: int) -> "OpMatrix":
        return cls.diag(dim, [1] * n)

    @classmethod
    def diag(cls, dim: int, values: Sequence[object]) -> "OpMatrix":
        n = len(values)
        z = OperatorPoly.zero(dim)
        return cls(dim, [[values[i] if i == j else z for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> OperatorPoly:
        i, j = ij
        return self.entries[i][j]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def _same_shape(self, other: "OpMatrix") -> None:
        if self.shape != other.shape or self.dim != other.dim:
            raise ShapeError(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        self._same_shape(other)
        return OpMatrix(self.dim, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        self._same_shape(other)
        return OpMatrix(self.dim, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self) -> "OpMatrix":
        return OpMatrix(self.dim, [[-a for a in r] for r in self.entries])

    def scale(self, c) -> "OpMatrix":
        c = _op(self.dim, c)
        return OpMatrix(self.dim, [[c * a for a in r] for r in self.entries])

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        return mat_mul(self, other)

    def __pow__(self, n: int) -> "OpMatrix":
        if not self.is_square():
            raise ShapeError("power of a non-square matrix")
        result = OpMatrix.identity(self.dim, self.rows)
        for _ in range(n):
            result = result @ self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2)
        )

    __hash__ = None

    def trace(self) -> OperatorPoly:
        total = OperatorPoly.zero(self.dim)
        for i in range(min(self.rows, self.cols)):
            total = total + self.entries[i][i]
        return total

    def transpose(self) -> "OpMatrix":
        return OpMatrix(self.dim, list(zip(*self.entries)))

    def row(self, i: int) -> Tuple[OperatorPoly, ...]:
        return self.entries[i]

    def col(self, j: int) -> Tuple[OperatorPoly, ...]:
        return tuple(r[j] for r in self.entries)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "OpMatrix":
        return OpMatrix(self.dim, [[self.entries[i][j] for j in cols] for i in rows])

    def keep_columns(self, cols: Iterable[int]) -> "OpMatrix":
        """Same shape, with every column outside ``cols`` set to zero."""
        keep = set(cols)
        z = OperatorPoly.zero(self.dim)
        return OpMatrix(self.dim, [[e if j in keep else z for j, e in enumerate(r)] for r in self.entries])

    def cut(self, idx: Iterable[int]) -> "OpMatrix":
        """Same shape, keeping only the rows and columns in ``idx``."""
        keep = set(idx)
        z = OperatorPoly.zero(self.dim)
        return OpMatrix(
            self.dim,
            [[e if (i in keep and j in keep) else z for j, e in enumerate(r)] for i, r in enumerate(self.entries)],
        )

    def permute(self, perm: Sequence[int]) -> "OpMatrix":
        """Symmetric permutation: entry (i, j) of the result is entry (perm[i], perm[j])."""
        return self.submatrix(perm, perm)

    def map(self, fn: Callable[[OperatorPoly], OperatorPoly]) -> "OpMatrix":
        return OpMatrix(self.dim, [[fn(e) for e in r] for r in self.entries])

    def is_scalar(self) -> bool:
        return all(e.is_scalar() for r in self.entries for e in r)

    def render(self) -> str:
        return "\n".join("[" + ", ".join(e.render() for e in r) + "]" for r in self.entries)

    def __repr__(self) -> str:
        return f"OpMatrix({self.rows}x{self.cols}, dim={self.dim})"


def mat_mul(A: OpMatrix, B: OpMatrix) -> OpMatrix:
    if A.cols != B.rows:
        raise ShapeError(f"cannot multiply {A.shape} by {B.shape}")
    if A.dim != B.dim:
        raise ShapeError("lattice dimensions differ")
    Bt = list(zip(*B.entries))
    out = []
    for row in A.entries:
        new = []
        for col in Bt:
            acc = OperatorPoly.zero(A.dim)
            for a, b in zip(row, col):
                if a.terms and b.terms:
                    acc = acc + a * b
            new.append(acc)
        out.append(new)
    return OpMatrix(A.dim, out)


def mat_vec(A: OpMatrix, v: Sequence[OperatorPoly]) -> List[OperatorPoly]:
    if len(v) != A.cols:
        raise ShapeError("vector length does not match the column count")
    out = []
    for row in A.entries:
        acc = OperatorPoly.zero(A.dim)
        for a, b in zip(row, v):
            if a.terms and b.terms:
                acc = acc + a * b
        out.append(acc)
    return out


def field_invert(M: OpMatrix) -> OpMatrix:
    """Inverse of a shift-free matrix over the coefficient field (Gauss-Jordan)."""
    if not M.is_square():
        raise ShapeError("only square matrices can be inverted")
    if not M.is_scalar():
        raise OperatorError("field inversion needs entries without shifts")
    n = M.rows
    a = [[M.entries[i][j].scalar_value() for j in range(n)] + [RationalCoeff.const(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        # prefer the simplest nonzero pivot to limit expression growth
        candidates = [r for r in range(col, n) if not a[r][col].is_zero()]
        if not candidates:
            raise SingularMatrix(f"no nonzero pivot in column {col + 1}: determinant vanishes")
        piv = min(candidates, key=lambda r: (len(a[r][col].num.terms) + len(a[r][col].den.terms), r))
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inverse()
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return OpMatrix(M.dim, [[OperatorPoly.const(M.dim, v) for v in row[n:]] for row in a])


# -- polynomials in X with operator coefficients ----------------------------

class RingPoly:
    """Polynomial ``sum_k coeffs[k] X^k`` with :class:`OperatorPoly` coefficients."""

    __slots__ = ("dim", "coeffs")

    def __init__(self, dim: int, coeffs: Sequence[object]):
        cs = [_op(dim, c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.dim = dim
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, dim: int, k: int, c=1) -> "RingPoly":
        return cls(dim, [0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def coeff(self, k: int) -> OperatorPoly:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return OperatorPoly.zero(self.dim)

    def _coerce(self, other) -> "RingPoly":
        if isinstance(other, RingPoly):
            if other.dim != self.dim:
                raise ShapeError("lattice dimensions differ")
            return other
        return RingPoly(self.dim, [other])

    def __add__(self, other) -> "RingPoly":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return RingPoly(self.dim, [self.coeff(k) + other.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "RingPoly":
        return RingPoly(self.dim, [-c for c in self.coeffs])

    def __sub__(self, other) -> "RingPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RingPoly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "RingPoly":
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RingPoly(self.dim, [])
        out = [OperatorPoly.zero(self.dim)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.terms:
                for j, b in enumerate(other.coeffs):
                    if b.terms:
                        out[i + j] = out[i + j] + a * b
        return RingPoly(self.dim, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except (ShapeError, TypeError):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def shift_down(self, k: int) -> "RingPoly":
        """Divide by ``X^k``; the low coefficients must vanish."""
        if any(not c.is_zero() for c in self.coeffs[:k]):
            raise NotDivisible(f"X^{k} does not divide the polynomial")
        return RingPoly(self.dim, self.coeffs[k:])

    def low_order_zeros(self) -> int:
        k = 0
        while k < len(self.coeffs) and self.coeffs[k].is_zero():
            k += 1
        return k

    def divmod(self, divisor: "RingPoly") -> Tuple["RingPoly", "RingPoly"]:
        """Long division by a monic divisor, exact over the operator ring."""
        divisor = self._coerce(divisor)
        if not divisor.is_monic():
            raise ValueError("divisor must be monic")
        rem = list(self.coeffs)
        dq = divisor.degree
        quot = [OperatorPoly.zero(self.dim)] * max(len(rem) - dq, 1)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if c.is_zero():
                continue
            quot[k - dq] = c
            for j, d in enumerate(divisor.coeffs):
                rem[k - dq + j] = rem[k - dq + j] - c * d
        return RingPoly(self.dim, quot), RingPoly(self.dim, rem[:dq] if dq else [])

    def map(self, fn) -> "RingPoly":
        return RingPoly(self.dim, [fn(c) for c in self.coeffs])

    def variables(self) -> set:
        out = set()
        for c in self.coeffs:
            out |= c.variables()
        return out

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        pieces = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c.is_zero():
                continue
            xk = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
            cs = c.render()
            if not xk:
                piece = cs
            elif cs == "1":
                piece = xk
            elif cs == "-1":
                piece = "-" + xk
            elif c.is_scalar():
                piece = f"{cs}*{xk}"
            else:
                piece = f"({cs})*{xk}"
            pieces.append(piece)
        out = pieces[0]
        for p in pieces[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self) -> str:
        return f"RingPoly({self.render()})"


def ring_poly(dim: int, coeffs: Sequence[object]) -> RingPoly:
    return RingPoly(dim, coeffs)


def apply_ring_poly(P: RingPoly, C: OpMatrix) -> OpMatrix:
    """``sum_k P_k C^k`` by Horner's rule."""
    if not C.is_square():
        raise ShapeError("polynomial evaluation needs a square matrix")
    if P.dim != C.dim:
        raise ShapeError("lattice dimensions differ")
    n = C.rows
    acc = OpMatrix.zeros(C.dim, n)
    for c in reversed(P.coeffs):
        acc = acc @ C + OpMatrix.identity(C.dim, n).scale(c)
    return acc


def faddeev_leverrier(C: OpMatrix) -> RingPoly:
    """Characteristic polynomial ``(-1)^r det(C - X I)``, monic of degree r."""
    if not C.is_square():
        raise ShapeError("characteristic polynomial needs a square matrix")
    r = C.rows
    gam = [OperatorPoly.zero(C.dim)] * (r + 1)
    gam[r] = OperatorPoly.one(C.dim)
    D = C
    for k in range(1, r + 1):
        if k > 1:
            D = C @ (D + OpMatrix.identity(C.dim, r).scale(gam[r - k + 1]))
        gam[r - k] = D.trace() * Fraction(-1, k)
    return RingPoly(C.dim, gam)


def charpoly_trimmed(C: OpMatrix, idx: Sequence[int]) -> RingPoly:
    """Characteristic polynomial of the principal submatrix on ``idx`` (0-based)."""
    idx = sorted(set(idx))
    if not idx:
        raise ValueError("index set must not be empty")
    if not C.is_square():
        raise ShapeError("square matrix expected")
    return faddeev_leverrier(C.submatrix(idx, idx))


# -- determinants by cofactor expansion (independent of the recursion above) --

def determinant(entries: Sequence[Sequence[object]], zero, one):
    """Laplace expansion along rows with memoized column subsets; any commutative ring."""
    n = len(entries)
    if n == 0:
        return one

    @lru_cache(maxsize=None)
    def det(row: int, cols: Tuple[int, ...]):
        if row == n:
            return one
        total = zero
        for pos, j in enumerate(cols):
            a = entries[row][j]
            if _is_zero(a):
                continue
            minor = det(row + 1, cols[:pos] + cols[pos + 1:])
            term = a * minor
            total = total - term if pos % 2 else total + term
        return total

    return det(0, tuple(range(n)))


def _is_zero(a) -> bool:
    if hasattr(a, "is_zero"):
        return a.is_zero()
    return a == 0


def det_op(C: OpMatrix) -> OperatorPoly:
    if not C.is_square():
        raise ShapeError("determinant needs a square matrix")
    return determinant(C.entries, OperatorPoly.zero(C.dim), OperatorPoly.one(C.dim))


def adjugate(C: OpMatrix) -> OpMatrix:
    """Classical adjoint from cofactors."""
    n = C.rows
    if n == 1:
        return OpMatrix.identity(C.dim, 1)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[C.entries[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            d = determinant(minor, OperatorPoly.zero(C.dim), OperatorPoly.one(C.dim))
            out[j][i] = d if (i + j) % 2 == 0 else -d
    return OpMatrix(C.dim, out)


def charpoly_by_determinant(C: OpMatrix) -> RingPoly:
    """``(-1)^r det(C - X I)`` expanded over polynomials in X."""
    r = C.rows
    X = RingPoly.monomial(C.dim, 1)
    ents = [[RingPoly(C.dim, [C.entries[i][j]]) - (X if i == j else 0) for j in range(r)] for i in range(r)]
    d = determinant(ents, RingPoly(C.dim, []), RingPoly(C.dim, [1]))
    return d if r % 2 == 0 else -d


# -- kernels over the fraction field -----------------------------------------

def _sample_point(variables: Iterable[str], dim: int, rng: random.Random):
    def pick():
        while True:
            v = Fraction(rng.randint(-97, 97), rng.randint(1, 31))
            if v:
                return v
    return {n: pick() for n in sorted(variables)}, tuple(pick() for _ in range(dim))


def _eval_op(a: OperatorPoly, params: Mapping[str, Fraction], shifts: Tuple[Fraction, ...]) -> Fraction:
    total = Fraction(0)
    for z, c in a.terms.items():
        v = c.evaluate(params)
        for g, e in zip(shifts, z):
            v *= g ** e
        total += v
    return total


def _rank_profile(M: List[List[Fraction]]):
    """Pivot rows and columns of a rational matrix, by exact elimination."""
    a = [row[:] for row in M]
    nr, nc = len(a), len(a[0]) if a else 0
    pivot_cols = []
    row_ids = list(range(nr))
    r = 0
    for c in range(nc):
        p = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        row_ids[r], row_ids[p] = row_ids[p], row_ids[r]
        for i in range(r + 1, nr):
            if a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivot_cols.append(c)
        r += 1
        if r == nr:
            break
    return sorted(row_ids[:r]), pivot_cols


def kernel_fraction_field(V: OpMatrix, seed: int = 0, attempts: int = 8) -> List[List[OperatorPoly]]:
    """Basis of the right null space of ``V`` over the fraction field of the ring.

    The generic rank and a nonsingular minor are located by exact evaluation
    at a random rational point; kernel vectors are then built from minors of
    the symbolic matrix, so every component stays in the ring.  Each vector
    is checked exactly before it is returned.
    """
    rng = random.Random(seed)
    variables = set()
    for row in V.entries:
        for e in row:
            variables |= e.variables()
    one, zero = OperatorPoly.one(V.dim), OperatorPoly.zero(V.dim)
    for _ in range(attempts):
        params, shifts = _sample_point(variables, V.dim, rng)
        try:
            num = [[_eval_op(e, params, shifts) for e in row] for row in V.entries]
        except VanishingDenominator:
            continue
        prow, pcol = _rank_profile(num)
        free = [j for j in range(V.cols) if j not in pcol]
        basis = []
        ok = True
        B = [[V.entries[i][j] for j in pcol] for i in prow]
        detB = determinant(B, zero, one) if pcol else one
        if detB.is_zero():
            continue
        for j in free:
            rhs = [V.entries[i][j] for i in prow]
            v = [zero] * V.cols
            v[j] = detB
            for a, pc in enumerate(pcol):
                Ba = [[(-rhs[i] if c == a else B[i][c]) for c in range(len(pcol))] for i in range(len(prow))]
                v[pc] = determinant(Ba, zero, one)
            if not all(e.is_zero() for e in mat_vec(V, v)):
                ok = False
                break
            basis.append(_tidy_vector(v))
        if ok:
            return basis
    raise ArithmeticError("kernel computation did not stabilise at random sample points")


def _tidy_vector(v: List[OperatorPoly]) -> List[OperatorPoly]:
    """Scale so that the last nonzero entry is 1 when that keeps all entries in the ring."""
    last = next(e for e in reversed(v) if not e.is_zero())
    try:
        return [exact_div(e, last) for e in v]
    except NotDivisible:
        return v


def minimal_polynomial(C: OpMatrix) -> RingPoly:
    """Monic annihilator of least degree, by an ascending kernel search."""
    if not C.is_square():
        raise ShapeError("square matrix expected")
    n = C.rows
    chi = faddeev_leverrier(C)
    powers = [OpMatrix.identity(C.dim, n)]
    for k in range(1, chi.degree):
        powers.append(powers[-1] @ C)
        # columns are vec(C^0) ... vec(C^k)
        W = OpMatrix(C.dim, [[P.entries[i][j] for P in powers] for i in range(n) for j in range(n)])
        ker = kernel_fraction_field(W)
        if not ker:
            continue
        v = ker[0]
        if v[k].is_zero():
            continue
        try:
            coeffs = [exact_div(e, v[k]) for e in v]
        except NotDivisible:
            continue
        P = RingPoly(C.dim, coeffs)
        if apply_ring_poly(P, C).is_zero():
            return P
    return chi


def mpamfr(A: OpMatrix, row: int = 0) -> RingPoly:
    """Monic polynomial of least degree annihilating row ``row`` of A, constant term completed.

    The kernel search only constrains the off-diagonal entries of the row;
    the free constant term is then fixed so that the diagonal entry vanishes too.
    """
    if not A.is_square():
        raise ShapeError("square matrix expected")
    n = A.rows
    others = [j for j in range(n) if j != row]
    mu = minimal_polynomial(A)
    power = OpMatrix.identity(A.dim, n)
    row_powers = []
    for K in range(1, mu.degree + 1):
        power = power @ A
        row_powers.append(power.row(row))
        if not others:
            psi = [OperatorPoly.one(A.dim)]
        else:
            V = OpMatrix(A.dim, [[rp[j] for rp in row_powers] for j in others])
            ker = kernel_fraction_field(V)
            if not ker:
                continue
            v = ker[0]
            if v[K - 1].is_zero():
                continue
            try:
                psi = [exact_div(e, v[K - 1]) for e in v]
            except NotDivisible:
                continue
        psi0 = OperatorPoly.zero(A.dim)
        for l, p in enumerate(psi):
            psi0 = psi0 - p * row_powers[l][row]
        return RingPoly(A.dim, [psi0] + psi)
    return mu


def annihilates_row(P: RingPoly, C: OpMatrix, row: int) -> bool:
    return all(e.is_zero() for e in apply_ring_poly(P, C).row(row))
