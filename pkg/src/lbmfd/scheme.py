"""Lattice Boltzmann schemes in monolithic operator form.

A scheme with moment matrix M, velocities c_j and relaxation rates S evolves
moments by ``m^{n+1} = A m^n + B m^{eq,n}`` where

    T = M diag(shift_{c_j}) M^{-1},  A = T (I - S),  B = T S.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from . import expr as ex
from .linalg import OpMatrix, field_invert
from .opring import OperatorPoly, RationalCoeff, as_coeff

_MOMENT = re.compile(r"^m(\d+)$")


class SchemeError(ValueError):
    pass


class RateWarning(UserWarning):
    pass


def _as_expr(v) -> ex.Expr:
    if isinstance(v, str):
        return ex.parse(v)
    if isinstance(v, int) and v >= 0:
        return ex.Num(v)
    if isinstance(v, int):
        return ex.Neg(ex.Num(-v))
    return v


@dataclass(frozen=True)
class SchemeSpec:
    """User-level description of a scheme.

    Indices are 0-based: moment ``i`` is printed as ``m{i+1}``.  The first
    ``conserved`` rates must vanish and ``equilibria`` maps each other moment
    index to an expression in the conserved moments and the parameters.
    """

    name: str
    dim: int
    velocities: Tuple[Tuple[int, ...], ...]
    moment_matrix: Tuple[Tuple[ex.Expr, ...], ...]
    rates: Tuple[ex.Expr, ...]
    equilibria: Tuple[Tuple[int, ex.Expr], ...]
    conserved: int = 1
    parameters: Tuple[str, ...] = ()

    def __post_init__(self):
        self.validate()

    @classmethod
    def create(cls, name, dim, velocities, moment_matrix, rates, equilibria, conserved=1, parameters=()):
        """Build from strings or ints; ``equilibria`` maps 0-based index to expression."""
        eq = equilibria.items() if isinstance(equilibria, Mapping) else equilibria
        return cls(
            name=name,
            dim=dim,
            velocities=tuple(tuple(int(v) for v in c) for c in velocities),
            moment_matrix=tuple(tuple(_as_expr(e) for e in row) for row in moment_matrix),
            rates=tuple(_as_expr(r) for r in rates),
            equilibria=tuple(sorted((int(i), _as_expr(e)) for i, e in eq)),
            conserved=conserved,
            parameters=tuple(parameters),
        )

    @property
    def q(self) -> int:
        return len(self.velocities)

    @property
    def moment_names(self) -> Tuple[str, ...]:
        return tuple(f"m{i + 1}" for i in range(self.q))

    @property
    def conserved_names(self) -> Tuple[str, ...]:
        return self.moment_names[: self.conserved]

    def equilibrium(self, i: int) -> ex.Expr:
        return dict(self.equilibria)[i]

    def validate(self) -> None:
        q, N = self.q, self.conserved
        if self.dim not in (1, 2, 3):
            raise SchemeError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if q < 1:
            raise SchemeError("at least one velocity is needed")
        for c in self.velocities:
            if len(c) != self.dim:
                raise SchemeError(f"velocity {c} does not have {self.dim} components")
        if len(self.moment_matrix) != q or any(len(r) != q for r in self.moment_matrix):
            raise SchemeError(f"moment matrix must be {q}x{q}")
        if len(self.rates) != q:
            raise SchemeError(f"{len(self.rates)} relaxation rates given for {q} moments")
        if not 1 <= N <= q:
            raise SchemeError(f"conserved count {N} out of range 1..{q}")
        declared = set(self.parameters)
        for name in declared:
            if _MOMENT.match(name):
                raise SchemeError(f"parameter name {name!r} is reserved for moments")
        for i, r in enumerate(self.rates):
            self._check_symbols(r, declared, f"rate of m{i + 1}")
            if i < N and not ex.to_coeff(r).is_zero():
                raise SchemeError(f"rate of conserved moment m{i + 1} must be 0")
        for row in self.moment_matrix:
            for e in row:
                self._check_symbols(e, declared, "moment matrix")
        keys = [i for i, _ in self.equilibria]
        if sorted(keys) != list(range(N, q)):
            raise SchemeError(f"equilibria must be given for m{N + 1}..m{q}")
        allowed = declared | set(self.conserved_names)
        for i, e in self.equilibria:
            self._check_symbols(e, allowed, f"equilibrium of m{i + 1}")

    def _check_symbols(self, e: ex.Expr, allowed: set, where: str) -> None:
        for name in ex.symbols(e):
            if name in allowed:
                continue
            m = _MOMENT.match(name)
            if m and not (1 <= int(m.group(1)) <= self.conserved):
                raise SchemeError(f"unknown symbol {name!r} in {where}: not a conserved moment")
            raise SchemeError(f"unknown symbol {name!r} in {where}")

    def substitute(self, **values) -> "SchemeSpec":
        """Replace parameters by expressions (or integers) everywhere."""
        subs = {k: _as_expr(v) for k, v in values.items()}

        def sub(e):
            if isinstance(e, ex.Sym):
                return subs.get(e.name, e)
            if isinstance(e, ex.Num):
                return e
            if isinstance(e, ex.Neg):
                return ex.Neg(sub(e.arg))
            if isinstance(e, ex.Pow):
                return ex.Pow(sub(e.base), e.exp)
            return type(e)(sub(e.left), sub(e.right))

        params = tuple(p for p in self.parameters if p not in subs)
        for e in subs.values():
            params += tuple(sorted(ex.symbols(e) - set(params)))
        return replace(
            self,
            moment_matrix=tuple(tuple(sub(e) for e in row) for row in self.moment_matrix),
            rates=tuple(sub(r) for r in self.rates),
            equilibria=tuple((i, sub(e)) for i, e in self.equilibria),
            parameters=params,
        )

    def with_equilibria(self, equilibria: Mapping[int, object], parameters: Sequence[str] = ()) -> "SchemeSpec":
        eq = dict(self.equilibria)
        eq.update({int(i): _as_expr(e) for i, e in equilibria.items()})
        params = self.parameters + tuple(p for p in parameters if p not in self.parameters)
        return replace(self, equilibria=tuple(sorted(eq.items())), parameters=params)


@dataclass(frozen=True)
class TrimInfo:
    """Moments whose rate is exactly 1 drop out of A (their columns vanish)."""

    Q: int
    kept: Tuple[int, ...]
    dropped: Tuple[int, ...]
    order: Tuple[int, ...]


@dataclass(frozen=True)
class BuiltScheme:
    spec: SchemeSpec
    M: OpMatrix
    Minv: OpMatrix
    S: OpMatrix
    T: OpMatrix
    A: OpMatrix
    B: OpMatrix
    rates: Tuple[RationalCoeff, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def conserved(self) -> Tuple[int, ...]:
        return tuple(range(self.spec.conserved))

    @property
    def nonconserved(self) -> Tuple[int, ...]:
        return tuple(range(self.spec.conserved, self.spec.q))


def build(spec: SchemeSpec) -> BuiltScheme:
    """Compile a specification into its operator matrices."""
    d, q = spec.dim, spec.q
    M = OpMatrix(d, [[ex.to_coeff(e) for e in row] for row in spec.moment_matrix])
    try:
        Minv = field_invert(M)
    except ArithmeticError as err:
        raise SchemeError(f"moment matrix of {spec.name} is singular: {err}") from None
    rates = tuple(ex.to_coeff(r) for r in spec.rates)
    for i, r in enumerate(rates[spec.conserved:], start=spec.conserved):
        if r.is_constant() and not (0 < r.constant_value() <= 2):
            warnings.warn(f"rate of m{i + 1} is {r.constant_value()}, outside (0, 2]", RateWarning, stacklevel=2)
    shifts = OpMatrix.diag(d, [OperatorPoly.shift(c) for c in spec.velocities])
    T = M @ shifts @ Minv
    S = OpMatrix.diag(d, list(rates))
    # T S and T (I - S) are column scalings of T
    A = OpMatrix(d, [[t * (1 - rates[j]) for j, t in enumerate(row)] for row in T.entries])
    B = OpMatrix(d, [[t * rates[j] for j, t in enumerate(row)] for row in T.entries])
    return BuiltScheme(spec, M, Minv, S, T, A, B, rates)


def decompose_conserved(b: BuiltScheme, ell: int) -> Tuple[OpMatrix, OpMatrix]:
    """Split ``A = A_l + A_l^o`` for conserved moment ``ell`` (0-based).

    ``A_l`` keeps the columns of ``ell`` and of the non-conserved moments,
    ``A_l^o`` the columns of the other conserved moments.
    """
    if not 0 <= ell < b.spec.conserved:
        raise IndexError(f"conserved index {ell} out of range 0..{b.spec.conserved - 1}")
    own = (ell,) + b.nonconserved
    other = tuple(j for j in b.conserved if j != ell)
    return b.A.keep_columns(own), b.A.keep_columns(other)


def detect_trim(b: BuiltScheme) -> TrimInfo:
    """Count non-conserved moments with rate different from 1 and order them first."""
    N = b.spec.conserved
    keep = tuple(i for i in b.nonconserved if not b.rates[i] == 1)
    drop = tuple(i for i in b.nonconserved if b.rates[i] == 1)
    for j in drop:
        if not all(e.is_zero() for e in b.A.col(j)):
            raise AssertionError(f"column {j + 1} of A should vanish for a unit rate")
    return TrimInfo(Q=len(keep), kept=tuple(range(N)) + keep, dropped=drop, order=tuple(range(N)) + keep + drop)


def equilibrium_coefficients(b: BuiltScheme) -> Dict[int, Dict[int, RationalCoeff]]:
    """For linear equilibria: ``{i: {j: eps_ij}}`` with ``m_i^eq = sum_j eps_ij m_j``."""
    names = b.spec.conserved_names
    out = {}
    for i, e in b.spec.equilibria:
        lf = ex.linear_form(e, names)
        out[i] = {j: lf[n] for j, n in enumerate(names)}
    return out


def linearize_equilibria(b: BuiltScheme, eps: Optional[Sequence[object]] = None) -> OpMatrix:
    """Closed-loop matrix ``A + B (eps x e_1)`` for one conserved moment.

    ``eps`` gives ``m^eq = eps m_1`` componentwise (entries for conserved
    moments are ignored since B has zero columns there); by default it is
    read off the scheme's equilibria, which must then be linear.
    """
    if b.spec.conserved != 1:
        raise SchemeError("closed-loop matrix is defined for one conserved moment")
    if eps is None:
        lin = equilibrium_coefficients(b)
        eps = [0] + [lin[i][0] for i in range(1, b.q)]
    if len(eps) != b.q:
        raise SchemeError(f"eps must have {b.q} entries")
    d = b.dim
    eps_op = [e if isinstance(e, OperatorPoly) else OperatorPoly.const(d, as_coeff(e)) for e in eps]
    col = []
    for row in b.B.entries:
        acc = OperatorPoly.zero(d)
        for j in range(1, b.q):
            acc = acc + row[j] * eps_op[j]
        col.append(acc)
    return OpMatrix(d, [[(row[0] + col[i]) if j == 0 else row[j] for j in range(b.q)]
                        for i, row in enumerate(b.A.entries)])
