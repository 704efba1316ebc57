"""Fourier analysis of linear schemes.

With linear equilibria ``m^eq = eps m_1`` the scheme is ``m^{n+1} = (A + B eps x e_1) m^n``.
Sampling the operator entries at a phase ``theta = dx * xi`` turns polynomials with
operator coefficients into complex polynomials whose roots are the growth factors.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .linalg import OpMatrix, RingPoly, faddeev_leverrier
from .opring import OperatorPoly, as_coeff, fourier_symbol
from .reduce import FDScheme
from .scheme import BuiltScheme, SchemeError, equilibrium_coefficients, linearize_equilibria

TOL_MOD = 1e-10
TOL_SEP = 1e-8
XI_POINTS = 257
GAMMA_POINTS = 1001


class NonlinearEquilibrium(SchemeError):
    pass


# -- symbolic side ----------------------------------------------------------------

def equilibrium_eps(b: BuiltScheme) -> List[OperatorPoly]:
    """``eps`` with ``m^eq = eps m_1`` read off the scheme; raises for nonlinear equilibria."""
    if b.spec.conserved != 1:
        raise SchemeError("linear stability is defined for one conserved moment")
    try:
        lin = equilibrium_coefficients(b)
    except ValueError as err:
        raise NonlinearEquilibrium(str(err)) from None
    return [OperatorPoly.zero(b.dim)] + [OperatorPoly.const(b.dim, lin[i][0]) for i in range(1, b.q)]


def symbolic_eps(b: BuiltScheme, prefix: str = "eps") -> List[OperatorPoly]:
    """Generic ``eps`` with one free parameter ``eps{i+1}`` per non-conserved moment."""
    return [OperatorPoly.zero(b.dim)] + [OperatorPoly.const(b.dim, as_coeff(f"{prefix}{i + 1}"))
                                         for i in range(1, b.q)]


def _eps_ops(dim: int, q: int, eps) -> List[OperatorPoly]:
    if isinstance(eps, Mapping):
        eps = [eps.get(i, 0) for i in range(q)]
    if len(eps) != q:
        raise SchemeError(f"eps must have {q} entries")
    return [e if isinstance(e, OperatorPoly) else OperatorPoly.const(dim, as_coeff(e)) for e in eps]


def closed_loop_matrix(b: BuiltScheme, eps=None) -> OpMatrix:
    if eps is None:
        eps = equilibrium_eps(b)
    return linearize_equilibria(b, _eps_ops(b.dim, b.q, eps))


def closed_loop_charpoly(b: BuiltScheme, eps=None) -> RingPoly:
    """Characteristic polynomial of ``A + B eps x e_1`` (degree q)."""
    if b.spec.conserved != 1:
        raise SchemeError("closed-loop polynomial is defined for one conserved moment")
    return faddeev_leverrier(closed_loop_matrix(b, eps))


def amplification_from_fd(fd: FDScheme, eps, degree: Optional[int] = None) -> RingPoly:
    """Amplification polynomial of a linear FD scheme.

    ``m^{n+1} = sum_L (h_L + sum_i src[L][i] eps_i) m^{n-L}`` gives
    ``Phi = X^K - sum_L (h_L + sum_i src[L][i] eps_i) X^{K-1-L}``.
    ``degree`` pads with powers of X (dropped trailing lags or trimmed moments).
    """
    if fd.conserved != 0 or any(lag for lag in fd.xsrc):
        raise SchemeError("amplification polynomial is defined for one conserved moment")
    if eps is None:
        raise NonlinearEquilibrium("linear equilibria eps are required")
    q = 1 + max((i for lag in fd.src for i in lag), default=0)
    if isinstance(eps, Mapping):
        q = max(q, 1 + max(eps, default=0))
    elif len(eps) > q:
        q = len(eps)
    eps = _eps_ops(fd.dim, q, eps)
    K = fd.K
    coeffs = [OperatorPoly.zero(fd.dim)] * (K + 1)
    coeffs[K] = OperatorPoly.one(fd.dim)
    for L in range(K):
        total = fd.h[L]
        for i, op in fd.src[L].items():
            total = total + op * eps[i]
        coeffs[K - 1 - L] = -total
    P = RingPoly(fd.dim, coeffs)
    if degree is not None:
        if degree < K:
            raise ValueError(f"degree {degree} below the step count {K}")
        P = P * RingPoly.monomial(fd.dim, degree - K)
    return P


# -- numerical side ----------------------------------------------------------------

def xi_grid(dim: int, points: int = XI_POINTS, dx: float = 1.0) -> np.ndarray:
    """Tensor grid over ``[-pi/dx, pi/dx]^dim`` as an (n, dim) array."""
    axis = np.linspace(-np.pi / dx, np.pi / dx, points)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sampled_coefficients(P: RingPoly, thetas: np.ndarray, bindings: Mapping[str, float]) -> np.ndarray:
    """Complex coefficients, shape (n, degree + 1), ascending."""
    thetas = np.asarray(thetas, dtype=float).reshape(-1, P.dim)
    return np.stack([fourier_symbol(c, thetas, bindings) for c in P.coeffs], axis=1)


def sample_matrix(C: OpMatrix, thetas: np.ndarray, bindings: Mapping[str, float]) -> np.ndarray:
    """Fourier transform of an operator matrix, shape (n, rows, cols)."""
    thetas = np.asarray(thetas, dtype=float).reshape(-1, C.dim)
    out = np.empty((len(thetas), C.rows, C.cols), dtype=complex)
    for i in range(C.rows):
        for j in range(C.cols):
            out[:, i, j] = fourier_symbol(C.entries[i][j], thetas, bindings)
    return out


def companion(coeffs: np.ndarray) -> np.ndarray:
    """Batched companion matrices of monic polynomials with ascending coefficients."""
    coeffs = np.atleast_2d(coeffs)
    n, r = coeffs.shape[0], coeffs.shape[1] - 1
    lead = coeffs[:, -1]
    if not np.allclose(lead, 1.0):
        raise ValueError("polynomial must be monic")
    comp = np.zeros((n, r, r), dtype=complex)
    if r > 1:
        comp[:, 1:, :-1] = np.eye(r - 1)
    comp[:, :, -1] = -coeffs[:, :-1]
    return comp


def batched_roots(coeffs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Roots per row; rows where the eigen-solver fails are NaN and flagged."""
    comp = companion(coeffs)
    n, r = comp.shape[0], comp.shape[1]
    if r == 0:
        return np.zeros((n, 0), dtype=complex), np.zeros(n, dtype=bool)
    try:
        return np.linalg.eigvals(comp), np.zeros(n, dtype=bool)
    except np.linalg.LinAlgError:
        roots = np.full((n, r), np.nan, dtype=complex)
        failed = np.zeros(n, dtype=bool)
        for k in range(n):
            try:
                roots[k] = np.linalg.eigvals(comp[k])
            except np.linalg.LinAlgError:
                failed[k] = True
        return roots, failed


@dataclass(frozen=True)
class AmplificationSample:
    xi: Tuple[float, ...]
    coefficients: Tuple[complex, ...]
    roots: Tuple[complex, ...]

    def __post_init__(self):
        if abs(self.coefficients[-1] - 1) > 1e-12:
            raise ValueError("amplification polynomial must be monic")
        if len(self.roots) != len(self.coefficients) - 1:
            raise ValueError("one root per degree expected")


def sample(P: RingPoly, xi, bindings: Mapping[str, float], dx: float = 1.0) -> AmplificationSample:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    coeffs = sampled_coefficients(P, dx * xi[None, :], bindings)
    roots, _ = batched_roots(coeffs)
    return AmplificationSample(tuple(xi), tuple(coeffs[0]), tuple(roots[0]))


@dataclass
class StabilityReport:
    """Outcome of the growth-factor test over a wave-number grid."""

    stable: bool
    worst_modulus: float
    offending_xi: Optional[Tuple[float, ...]] = None
    multiple_root: bool = False
    failed_xi: Tuple[Tuple[float, ...], ...] = field(default=())

    def __bool__(self) -> bool:
        return self.stable


def _verdict(roots: np.ndarray, failed: np.ndarray, xis: np.ndarray,
             tol_mod: float, tol_sep: float) -> StabilityReport:
    mods = np.abs(roots)
    mods_ok = np.where(failed[:, None], 0.0, mods)
    worst_per = mods_ok.max(axis=1) if mods_ok.shape[1] else np.zeros(len(xis))
    too_big = worst_per > 1 + tol_mod
    r = roots.shape[1]
    near_unit = mods_ok >= 1 - tol_mod
    dist = np.abs(roots[:, :, None] - roots[:, None, :])
    dist[:, np.arange(r), np.arange(r)] = np.inf
    clash = (near_unit & (dist.min(axis=2, initial=np.inf) <= tol_sep)).any(axis=1) & ~failed
    bad = too_big | clash | failed
    worst = float(worst_per.max()) if len(worst_per) else 0.0
    offending = None
    if bad.any():
        k = int(np.argmax(np.where(bad, worst_per, -1.0)))
        offending = tuple(float(v) for v in xis[k])
    return StabilityReport(
        stable=not bad.any(),
        worst_modulus=worst,
        offending_xi=offending,
        multiple_root=bool(clash.any()),
        failed_xi=tuple(tuple(float(v) for v in xis[k]) for k in np.flatnonzero(failed)),
    )


def sample_and_test(P: RingPoly, bindings: Mapping[str, float], dx: float = 1.0,
                    xi: Optional[np.ndarray] = None, points: int = XI_POINTS,
                    tol_mod: float = TOL_MOD, tol_sep: float = TOL_SEP) -> StabilityReport:
    """Von Neumann test: all roots in the closed unit disc, those on its edge simple."""
    if not P.is_monic():
        raise ValueError("polynomial must be monic")
    xis = xi_grid(P.dim, points, dx) if xi is None else np.asarray(xi, dtype=float).reshape(-1, P.dim)
    coeffs = sampled_coefficients(P, dx * xis, bindings)
    roots, failed = batched_roots(coeffs)
    return _verdict(roots, failed, xis, tol_mod, tol_sep)


@dataclass
class RegionScan:
    s_values: np.ndarray
    D_values: np.ndarray
    stable: np.ndarray          # shape (len(s), len(D))
    worst_modulus: np.ndarray

    def rows(self) -> Iterator[Tuple[float, float, bool, float]]:
        for i, s in enumerate(self.s_values):
            for j, D in enumerate(self.D_values):
                yield float(s), float(D), bool(self.stable[i, j]), float(self.worst_modulus[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "D", "stable", "worst_modulus"])
        for s, D, ok, worst in self.rows():
            w.writerow([repr(s), repr(D), int(ok), f"{worst:.17g}"])
        return buf.getvalue()


def region_scan(b: BuiltScheme, s_values: Sequence[float], D_values: Sequence[float],
                bindings: Mapping[str, float], eps=None, points: int = XI_POINTS,
                s_name: str = "s", D_name: str = "D",
                tol_mod: float = TOL_MOD, tol_sep: float = TOL_SEP) -> RegionScan:
    """Stability verdict per (s, D) cell; the polynomial is formed once symbolically."""
    P = closed_loop_charpoly(b, eps)
    xis = xi_grid(b.dim, points)
    s_values = np.asarray(s_values, dtype=float)
    D_values = np.asarray(D_values, dtype=float)
    stable = np.zeros((len(s_values), len(D_values)), dtype=bool)
    worst = np.zeros_like(stable, dtype=float)
    for i, s in enumerate(s_values):
        for j, D in enumerate(D_values):
            env = dict(bindings)
            env[s_name], env[D_name] = float(s), float(D)
            rep = sample_and_test(P, env, xi=xis, tol_mod=tol_mod, tol_sep=tol_sep)
            stable[i, j], worst[i, j] = rep.stable, rep.worst_modulus
    return RegionScan(s_values, D_values, stable, worst)


# -- closed-form conditions for the three-velocity advection-diffusion study --------

@dataclass(frozen=True)
class ClosedFormVerdict:
    """Rectangle condition and sampled maximum condition; iterates as the boolean pair."""

    rectangle: bool
    maximum_ok: bool
    maximum: float
    argmax_gamma: float

    def __iter__(self):
        return iter((self.rectangle, self.maximum_ok))

    @property
    def stable(self) -> bool:
        return self.rectangle and self.maximum_ok


def chebyshev_points(n: int = GAMMA_POINTS) -> np.ndarray:
    """Chebyshev-Lobatto points on [-1, 1], endpoints included."""
    return np.cos(np.pi * np.arange(n) / (n - 1))[::-1]


def closed_form_expression(C: float, D: float, s: float, gamma) -> np.ndarray:
    g = np.asarray(gamma, dtype=float)
    om = (1 - s) * (g + 2 + 2 * D * (1 - g)) / 3
    return (s ** 2 * C ** 2 * (1 + g) * (1 + om) ** 2
            + 4 / 9 * (2 - s) * (D + 1) * (1 - om)
            * ((2 - s) * (D + 1) * (1 - g) * (1 - om) + 3 * (om ** 2 - 1)))


def closed_form_conditions(C: float, D: float, s: float, gammas: Optional[np.ndarray] = None,
                      tol: float = 1e-12) -> ClosedFormVerdict:
    """Sufficient conditions for a simple von Neumann amplification polynomial (p = 1)."""
    gammas = chebyshev_points() if gammas is None else np.asarray(gammas, dtype=float)
    if gammas.size == 0 or np.any(np.abs(gammas) > 1):
        raise ValueError("gamma samples must lie in [-1, 1]")
    rect = 1.5 * C ** 2 - 1 - tol <= D <= 0.5 + tol
    vals = closed_form_expression(C, D, s, gammas)
    k = int(np.argmax(vals))
    return ClosedFormVerdict(bool(rect), bool(vals[k] <= tol), float(vals[k]), float(gammas[k]))


# name used by the interface contract
prop71_conditions = closed_form_conditions


def equivalent_diffusion(C: float, D: float, s: float) -> float:
    """Dimensionless residual diffusion ``(1/s - 1/2)(2(1 + D)/3 - C^2)``; multiply by lambda dx."""
    if s == 0:
        raise ZeroDivisionError("relaxation rate s must be nonzero")
    return (1 / s - 0.5) * (2 * (1 + D) / 3 - C ** 2)
