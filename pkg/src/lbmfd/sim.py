"""Double-precision engine on periodic grids.

Moments are stored as arrays of shape ``(q, *grid)``.  A lattice Boltzmann
step relaxes in moment space, goes to distributions with ``M^{-1}``, streams
with ``f_j(x) <- f_j(x - c_j dx)`` and returns to moments.  Multi-step FD
schemes apply their stencils with the same shift convention.
"""
from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Deque, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import expr as ex
from .opring import OperatorPoly, UnboundParameter
from .reduce import FDScheme, reduce_multi
from .scheme import BuiltScheme, SchemeSpec, build


class HistoryUnderfilled(RuntimeError):
    pass


class Divergence(RuntimeError):
    """Raised by the convergence study when the solution blows up."""

    def __init__(self, message: str, table: "ConvergenceTable"):
        super().__init__(message)
        self.table = table


def _eval_float(node: ex.Expr, env: Mapping[str, object]):
    """Evaluate with floats or float arrays; rational literals become floats."""
    if isinstance(node, ex.Num):
        return float(node.value)
    if isinstance(node, ex.Sym):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundParameter(node.name) from None
    if isinstance(node, ex.Neg):
        return -_eval_float(node.arg, env)
    if isinstance(node, ex.Pow):
        base = _eval_float(node.base, env)
        return base ** node.exp if node.exp >= 0 else 1.0 / base ** (-node.exp)
    a, b = _eval_float(node.left, env), _eval_float(node.right, env)
    if isinstance(node, ex.Add):
        return a + b
    if isinstance(node, ex.Sub):
        return a - b
    if isinstance(node, ex.Mul):
        return a * b
    return a / b


def _scalar(op: OperatorPoly, bindings: Mapping[str, float]) -> float:
    if not op.terms:
        return 0.0
    if not op.is_scalar():
        raise ValueError("scalar entry expected")
    return float(op.scalar_value().evaluate(bindings))


def _roll(f: np.ndarray, z: Sequence[int]) -> np.ndarray:
    """``(shift_z f)(x) = f(x - z dx)`` on a periodic grid (axes are the trailing ones)."""
    if not any(z):
        return f
    nd = len(z)
    return np.roll(f, tuple(int(v) for v in z), axis=tuple(range(f.ndim - nd, f.ndim)))


@dataclass
class NumericScheme:
    """A scheme with all parameters bound to floats."""

    built: BuiltScheme
    bindings: Dict[str, float]
    M: np.ndarray
    Minv: np.ndarray
    rates: np.ndarray
    velocities: np.ndarray

    @classmethod
    def create(cls, b: Union[BuiltScheme, SchemeSpec], bindings: Mapping[str, float]) -> "NumericScheme":
        if isinstance(b, SchemeSpec):
            b = build(b)
        env = {k: float(v) for k, v in bindings.items()}
        M = np.array([[_scalar(e, env) for e in row] for row in b.M.entries])
        Minv = np.array([[_scalar(e, env) for e in row] for row in b.Minv.entries])
        rates = np.array([float(r.evaluate(env)) for r in b.rates])
        return cls(b, env, M, Minv, rates, np.array(b.spec.velocities, dtype=int))

    @property
    def q(self) -> int:
        return self.built.q

    @property
    def conserved(self) -> int:
        return self.built.spec.conserved

    def equilibria(self, cons: np.ndarray) -> np.ndarray:
        """Equilibrium moments, shape ``(q, *grid)``, conserved rows copied through."""
        env = dict(self.bindings)
        names = self.built.spec.conserved_names
        for k, n in enumerate(names):
            env[n] = cons[k]
        out = np.empty((self.q,) + cons.shape[1:])
        out[: self.conserved] = cons
        for i, e in self.built.spec.equilibria:
            out[i] = _eval_float(e, env)
        return out


@dataclass
class LBMState:
    scheme: NumericScheme
    m: np.ndarray
    dx: float = 1.0
    time_step: int = 0

    @property
    def grid(self) -> Tuple[int, ...]:
        return self.m.shape[1:]

    def distributions(self) -> np.ndarray:
        return np.tensordot(self.scheme.Minv, self.m, axes=1)

    def conserved(self) -> np.ndarray:
        return self.m[: self.scheme.conserved]


def initial_state(ns: NumericScheme, cons: np.ndarray, dx: float = 1.0,
                  nonequilibrium: Optional[np.ndarray] = None) -> LBMState:
    """Conserved moments given; the others at equilibrium unless moments are supplied."""
    cons = np.asarray(cons, dtype=float)
    if cons.ndim == len(ns.velocities[0]):
        cons = cons[None]
    m = ns.equilibria(cons)
    if nonequilibrium is not None:
        m = np.array(nonequilibrium, dtype=float)
        m[: ns.conserved] = cons
    return LBMState(ns, m, dx)


def collide(state: LBMState) -> np.ndarray:
    ns = state.scheme
    meq = ns.equilibria(state.conserved())
    s = ns.rates.reshape((-1,) + (1,) * len(state.grid))
    return state.m + s * (meq - state.m)


def stream(ns: NumericScheme, m: np.ndarray) -> np.ndarray:
    f = np.tensordot(ns.Minv, m, axes=1)
    f = np.stack([_roll(f[j], c) for j, c in enumerate(ns.velocities)])
    return np.tensordot(ns.M, f, axes=1)


def lbm_step(state: LBMState) -> LBMState:
    """One collide-then-stream update."""
    return replace(state, m=stream(state.scheme, collide(state)), time_step=state.time_step + 1)


# -- multi-step FD ----------------------------------------------------------------

Stencil = List[Tuple[Tuple[int, ...], float]]


@dataclass
class CompiledFD:
    """Numeric stencils of an FD scheme, per lag."""

    target: int
    K: int
    h: List[Stencil]
    src: List[Dict[int, Stencil]]
    xsrc: List[Dict[int, Stencil]]


def _compile_op(op: OperatorPoly, env: Mapping[str, float]) -> Stencil:
    return [(z, float(c.evaluate(env))) for z, c in sorted(op.terms.items())]


def compile_fd(fd: FDScheme, bindings: Mapping[str, float]) -> CompiledFD:
    env = {k: float(v) for k, v in bindings.items()}
    return CompiledFD(
        fd.conserved, fd.K,
        [_compile_op(op, env) for op in fd.h],
        [{i: _compile_op(op, env) for i, op in lag.items() if op.terms} for lag in fd.src],
        [{j: _compile_op(op, env) for j, op in lag.items() if op.terms} for lag in fd.xsrc],
    )


def _apply(stencil: Stencil, f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f)
    for z, w in stencil:
        out += w * _roll(f, z)
    return out


@dataclass
class FDHistory:
    """Last ``depth`` time levels of conserved moments and equilibria, newest first."""

    depth: int
    cons: Deque[np.ndarray] = field(default_factory=deque)
    eq: Deque[np.ndarray] = field(default_factory=deque)

    def push(self, cons: np.ndarray, eq: np.ndarray) -> None:
        self.cons.appendleft(cons)
        self.eq.appendleft(eq)
        while len(self.cons) > self.depth:
            self.cons.pop()
            self.eq.pop()

    @property
    def full(self) -> bool:
        return len(self.cons) >= self.depth


def fd_step(history: FDHistory, fd: Union[FDScheme, CompiledFD], bindings: Mapping[str, float] = None) -> np.ndarray:
    """New value of the scheme's conserved moment from the stored history."""
    c = fd if isinstance(fd, CompiledFD) else compile_fd(fd, bindings or {})
    if len(history.cons) < c.K:
        raise HistoryUnderfilled(f"{c.K} time levels needed, {len(history.cons)} stored")
    if c.K == 0:
        return np.zeros_like(history.cons[0][c.target]) if history.cons else np.zeros(0)
    out = np.zeros_like(history.cons[0][c.target])
    for L in range(c.K):
        cons, eq = history.cons[L], history.eq[L]
        out += _apply(c.h[L], cons[c.target])
        for j, st in c.xsrc[L].items():
            out += _apply(st, cons[j])
        for i, st in c.src[L].items():
            out += _apply(st, eq[i])
    return out


def _rel_dev(ref: np.ndarray, other: np.ndarray) -> float:
    scale = float(np.max(np.abs(ref)))
    diff = float(np.max(np.abs(ref - other)))
    return diff / scale if scale > 0 else diff


def compare_trajectories(b: BuiltScheme, fds: Union[FDScheme, Sequence[FDScheme]], steps: int,
                         bindings: Mapping[str, float], cons0: np.ndarray, dx: float = 1.0) -> float:
    """Largest per-step relative l-inf gap between LBM and FD conserved moments.

    The FD history is bootstrapped with ``K - 1`` lattice Boltzmann steps.
    """
    fds = [fds] if isinstance(fds, FDScheme) else list(fds)
    ns = NumericScheme.create(b, bindings)
    compiled = [compile_fd(fd, ns.bindings) for fd in fds]
    K = max(c.K for c in compiled)
    state = initial_state(ns, cons0, dx)
    levels = [state.conserved().copy()]
    for _ in range(steps):
        state = lbm_step(state)
        levels.append(state.conserved().copy())
    if steps == 0:
        return 0.0
    hist = FDHistory(max(K, 1))
    for n in range(min(K, steps + 1)):
        hist.push(levels[n], ns.equilibria(levels[n]))
    worst = 0.0
    for n in range(max(K - 1, 0), steps):
        new = levels[n].copy()
        for c in compiled:
            new[c.target] = fd_step(hist, c)
        worst = max(worst, _rel_dev(levels[n + 1], new))
        hist.push(new, ns.equilibria(new))
    return worst


def smooth_random_field(grid: Sequence[int], seed: int, modes: int = 4) -> np.ndarray:
    """Constant plus a few random low Fourier modes, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    axes = np.meshgrid(*[2 * np.pi * np.arange(n) / n for n in grid], indexing="ij")
    out = np.ones(tuple(grid))
    for _ in range(modes):
        k = rng.integers(-3, 4, size=len(grid))
        a, phase = rng.normal(scale=0.3), rng.uniform(0, 2 * np.pi)
        out += a * np.cos(sum(kk * x for kk, x in zip(k, axes)) + phase)
    return out


# -- errors and the convergence study ------------------------------------------------

def l2_error(numeric: np.ndarray, exact: np.ndarray, dx: float) -> float:
    """``sqrt(dx^d sum |diff|^2)``."""
    numeric, exact = np.asarray(numeric), np.asarray(exact)
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch {numeric.shape} vs {exact.shape}")
    return math.sqrt(dx ** numeric.ndim * float(np.sum((numeric - exact) ** 2)))


def _indicator(x):
    return (np.abs(x) <= 0.5).astype(float)


def _hat(x):
    return (1 - 2 * np.abs(x)) * _indicator(x)


def _cos2(x):
    return np.cos(np.pi * x) ** 2 * _indicator(x)


def _bump(x):
    y = (2 * x) ** 2
    inside = y < 1
    out = np.zeros_like(x, dtype=float)
    out[inside] = np.exp(-1 / (1 - y[inside]))
    return out


INITIAL_DATA: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "a": _indicator,
    "b": _hat,
    "c": _cos2,
    "d": _bump,
}

# Sobolev index bound sigma_0 of each datum; None means smooth
SMOOTHNESS = {"a": 0.5, "b": 1.5, "c": 2.5, "d": None}


def expected_order(datum: str, D: float, C: float = 0.5) -> float:
    """Rate predicted for the three-velocity study: sigma_0/2 or 2 sigma_0/3, capped."""
    second = abs(D - (1.5 * C ** 2 - 1)) < 1e-12
    sigma = SMOOTHNESS[datum]
    if second:
        return 2.0 if sigma is None else min(2 * sigma / 3, 2.0)
    return 1.0 if sigma is None else min(sigma / 2, 1.0)


@dataclass
class ConvergenceConfig:
    D: float
    s: float
    datum: str
    C: float = 0.5
    lam: float = 1.0
    T: float = 0.5
    levels: Tuple[int, ...] = (6, 7, 8, 9, 10, 11)
    domain: Tuple[float, float] = (-1.0, 1.0)
    guard: float = 1e6

    def label(self) -> str:
        return f"d1q3_{self.datum}_s{self.s:g}_D{self.D:g}"


@dataclass
class ConvergenceTable:
    config: ConvergenceConfig
    rows: List[Tuple[float, float, Optional[float]]] = field(default_factory=list)
    diverged: bool = False

    def add(self, dx: float, err: float) -> None:
        order = None
        if self.rows:
            dx0, e0, _ = self.rows[-1]
            order = math.log(e0 / err) / math.log(dx0 / dx) if err > 0 and e0 > 0 else float("nan")
        self.rows.append((dx, err, order))

    @property
    def errors(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def fitted_order(self) -> float:
        """Least-squares slope of log(error) against log(dx)."""
        dx = np.log([r[0] for r in self.rows])
        err = np.log([r[1] for r in self.rows])
        return float(np.polyfit(dx, err, 1)[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dx", "error", "order"])
        for dx, err, order in self.rows:
            w.writerow([repr(dx), f"{err:.17g}", "" if order is None else f"{order:.17g}"])
        return buf.getvalue()


def advection_d1q3() -> BuiltScheme:
    from .catalog import d1q3
    return build(d1q3().substitute(p=1))


def run_advection(cfg: ConvergenceConfig, level: int, b: Optional[BuiltScheme] = None):
    """Final conserved field, exact field and dx on the grid of spacing 2^-level."""
    b = b or advection_d1q3()
    lo, hi = cfg.domain
    dx = 2.0 ** -level
    n = int(round((hi - lo) / dx))
    x = lo + dx * np.arange(n)
    ns = NumericScheme.create(b, {"lambda": cfg.lam, "s": cfg.s, "C": cfg.C, "D": cfg.D})
    u0 = INITIAL_DATA[cfg.datum]
    state = initial_state(ns, u0(x), dx)
    steps = int(round(cfg.T * cfg.lam / dx))
    norm0 = l2_error(state.m[0], np.zeros(n), dx)
    for _ in range(steps):
        state = lbm_step(state)
        if not np.isfinite(state.m[0]).all() or l2_error(state.m[0], np.zeros(n), dx) > cfg.guard * norm0:
            return None, None, dx
    shift = cfg.lam * cfg.C * cfg.T
    y = (x - shift - lo) % (hi - lo) + lo
    return state.m[0], u0(y), dx


def convergence_study(cfg: ConvergenceConfig) -> ConvergenceTable:
    """Errors at the final time on the refinement sequence, with empirical orders."""
    b = advection_d1q3()
    table = ConvergenceTable(cfg)
    for level in cfg.levels:
        num, exact, dx = run_advection(cfg, level, b)
        if num is None:
            table.diverged = True
            raise Divergence(f"{cfg.label()} diverged at dx = 2^-{level}", table)
        table.add(dx, l2_error(num, exact, dx))
    return table


PRESETS = {
    "fig3": dict(D=0.4, s=(0.5, 1.0, 1.5, 1.9)),
    "fig4": dict(D=-0.625, s=(1.0, 1.1, 1.15, 1.2)),
}


def preset_configs(name: str, data: Sequence[str] = ("a", "b", "c", "d")) -> List[ConvergenceConfig]:
    try:
        p = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    return [ConvergenceConfig(D=p["D"], s=s, datum=d) for d in data for s in p["s"]]


# -- raw field dumps ----------------------------------------------------------------

def dump_field(path, values: np.ndarray, dx: float) -> None:
    """Little-endian float64, row-major, after a one-line text header."""
    values = np.ascontiguousarray(values, dtype="<f8")
    shape = "x".join(str(n) for n in values.shape)
    with open(path, "wb") as fh:
        fh.write(f"shape={shape} dx={dx!r} dtype=<f8\n".encode("ascii"))
        fh.write(values.tobytes(order="C"))


def load_field(path) -> Tuple[np.ndarray, float]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        meta = dict(item.split("=", 1) for item in header)
        shape = tuple(int(n) for n in meta["shape"].split("x"))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(shape)
    return data, float(meta["dx"])
