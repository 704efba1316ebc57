"""Command-line front end.

Exit codes: 0 success, 1 user error, 2 internal invariant failure,
3 numerical divergence.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import catalog, schemefile, sim, spectral
from . import expr as ex
from .linalg import (
    RingPoly,
    apply_ring_poly,
    charpoly_by_determinant,
    charpoly_trimmed,
    faddeev_leverrier,
    minimal_polynomial,
    mpamfr,
)
from .opring import UnboundParameter, VanishingDenominator
from .reduce import PATHS, AnnihilationError, reduce_multi, render, to_dict
from .scheme import SchemeError, SchemeSpec, build, detect_trim

EXIT_OK, EXIT_USER, EXIT_INVARIANT, EXIT_DIVERGENCE = 0, 1, 2, 3


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    scheme: Optional[str] = None
    W: Optional[int] = None
    bindings: Dict[str, Fraction] = field(default_factory=dict)
    grids: List[str] = field(default_factory=list)
    out: Optional[str] = None
    path: str = "charpoly"
    trim: bool = True
    timestamp: bool = True
    xi_points: int = spectral.XI_POINTS
    tol_mod: float = spectral.TOL_MOD
    tol_sep: float = spectral.TOL_SEP
    steps: int = 100
    seed: int = 0
    compare: bool = False
    preset: Optional[str] = None
    data: Tuple[str, ...] = ("a", "b", "c", "d")
    levels: Tuple[int, ...] = (6, 7, 8, 9, 10, 11)

    def numeric_bindings(self) -> Dict[str, float]:
        return {k: float(v) for k, v in self.bindings.items()}


# -- helpers ---------------------------------------------------------------------

def parse_binding(text: str) -> Tuple[str, Fraction]:
    if "=" not in text:
        raise UserError(f"binding {text!r} must look like name=value")
    name, value = (p.strip() for p in text.split("=", 1))
    try:
        return name, Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise UserError(f"value of {name} must be a number or a fraction, got {value!r}") from None


def _fraction_expr(v: Fraction) -> ex.Expr:
    num = ex.Num(abs(v.numerator))
    node = num if v.denominator == 1 else ex.Div(num, ex.Num(v.denominator))
    return ex.Neg(node) if v < 0 else node


def _header(cfg: RunConfig) -> str:
    if not cfg.timestamp:
        return ""
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return f"# generated by lbmfd {__version__} ({cfg.command}) at {now}\n"


def _emit(cfg: RunConfig, text: str, path: Optional[str] = None) -> None:
    text = _header(cfg) + text
    target = path or cfg.out
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def load_spec(cfg: RunConfig) -> SchemeSpec:
    if not cfg.scheme:
        raise UserError("--scheme is required")
    if cfg.scheme == "link" or cfg.W is not None:
        if cfg.scheme not in ("link", None):
            raise UserError("--W only applies to the link scheme")
        spec = catalog.link(cfg.W or 1)
    else:
        try:
            spec = schemefile.load_scheme(cfg.scheme)
        except FileNotFoundError as err:
            raise UserError(str(err)) from None
    return spec


def exact_spec(cfg: RunConfig) -> SchemeSpec:
    """Specification with the bindings substituted exactly."""
    spec = load_spec(cfg)
    unknown = set(cfg.bindings) - set(spec.parameters)
    if unknown:
        raise UserError(f"unknown parameter(s) {', '.join(sorted(unknown))} for {spec.name}")
    if cfg.bindings:
        spec = spec.substitute(**{k: _fraction_expr(v) for k, v in cfg.bindings.items()})
    return spec


def _require_bound(spec: SchemeSpec, cfg: RunConfig, free: Sequence[str] = ()) -> None:
    missing = [p for p in spec.parameters if p not in cfg.bindings and p not in free]
    if missing:
        raise UserError(f"unbound parameter(s): {', '.join(missing)}; use --bind name=value")
    unknown = set(cfg.bindings) - set(spec.parameters)
    if unknown:
        raise UserError(f"unknown parameter(s) {', '.join(sorted(unknown))} for {spec.name}")


def _parse_range(text: str) -> Tuple[str, np.ndarray]:
    try:
        name, rng = text.split("=", 1)
        lo, hi, n = rng.split(":")
        return name.strip(), np.linspace(float(Fraction(lo)), float(Fraction(hi)), int(n))
    except ValueError:
        raise UserError(f"scan grid {text!r} must look like name=lo:hi:n") from None


def _parse_shape(text: str) -> Tuple[int, ...]:
    try:
        shape = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UserError(f"grid {text!r} must look like 64 or 32x32") from None
    if any(n < 1 for n in shape):
        raise UserError("grid sizes must be positive")
    return shape


# -- commands ----------------------------------------------------------------------

def cmd_derive(cfg: RunConfig) -> int:
    spec = exact_spec(cfg)
    b = build(spec)
    fds = reduce_multi(b, path=cfg.path, trim=cfg.trim)
    text = "\n\n".join(render(fd) for fd in fds) + "\n"
    if cfg.out:
        payload = [to_dict(fd) for fd in fds]
        doc = {"scheme": spec.name, "path": cfg.path, "schemes": payload}
        if cfg.timestamp:
            doc["generated"] = _header(cfg).strip("# \n")
        Path(cfg.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(_header(cfg) + text)
    return EXIT_OK


def run_checks(spec: SchemeSpec) -> List[Tuple[str, bool]]:
    """Symbolic invariants of a specification."""
    b = build(spec)
    out = []
    chi = faddeev_leverrier(b.A)
    out.append(("cayley-hamilton", apply_ring_poly(chi, b.A).is_zero()))
    if b.q <= 4:
        out.append(("charpoly matches determinant", chi == charpoly_by_determinant(b.A)))
    info = detect_trim(b)
    if b.spec.conserved == 1 and info.dropped:
        trimmed = charpoly_trimmed(b.A, info.kept)
        out.append(("trimmed charpoly", trimmed * RingPoly.monomial(b.dim, len(info.dropped)) == chi))
    for path in PATHS:
        if path == "mpafr" and b.spec.conserved != 1:
            continue
        try:
            reduce_multi(b, path=path)
            out.append((f"reduction {path}", True))
        except AnnihilationError:
            out.append((f"reduction {path}", False))
    if b.spec.conserved == 1:
        mu = minimal_polynomial(b.A)
        out.append(("minimal divides charpoly", chi.divmod(mu)[1].is_zero()))
        out.append(("mpafr divides minimal", mu.divmod(mpamfr(b.A, 0))[1].is_zero()))
        eps = spectral.symbolic_eps(b)
        fd = reduce_multi(b, trim=False)[0]
        out.append(("amplification equals closed-loop charpoly",
                    spectral.amplification_from_fd(fd, eps, degree=b.q) == spectral.closed_loop_charpoly(b, eps)))
    return out


def cmd_check(cfg: RunConfig) -> int:
    spec = exact_spec(cfg)
    results = run_checks(spec)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in results]
    _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if all(ok for _, ok in results) else EXIT_INVARIANT


def cmd_stability(cfg: RunConfig) -> int:
    spec = load_spec(cfg)
    _require_bound(spec, cfg)
    b = build(spec)
    P = spectral.closed_loop_charpoly(b)
    rep = spectral.sample_and_test(P, cfg.numeric_bindings(), points=cfg.xi_points,
                                   tol_mod=cfg.tol_mod, tol_sep=cfg.tol_sep)
    xi = "" if rep.offending_xi is None else " ".join(repr(v) for v in rep.offending_xi)
    text = ("stable,worst_modulus,offending_xi,multiple_root\n"
            f"{int(rep.stable)},{rep.worst_modulus:.17g},{xi},{int(rep.multiple_root)}\n")
    _emit(cfg, text)
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    spec = load_spec(cfg)
    grids = cfg.grids or ["s=0:2:40", "D=-1:0.6:40"]
    if len(grids) != 2:
        raise UserError("scan needs exactly two --grid name=lo:hi:n ranges")
    (sn, sv), (dn, dv) = (_parse_range(g) for g in grids)
    _require_bound(spec, cfg, free=(sn, dn))
    b = build(spec)
    res = spectral.region_scan(b, sv, dv, cfg.numeric_bindings(), points=cfg.xi_points,
                               s_name=sn, D_name=dn, tol_mod=cfg.tol_mod, tol_sep=cfg.tol_sep)
    text = res.to_csv()
    if (sn, dn) != ("s", "D"):
        text = f"{sn},{dn}" + text[len("s,D"):]
    _emit(cfg, text)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    spec = load_spec(cfg)
    _require_bound(spec, cfg)
    b = build(spec)
    shape = _parse_shape(cfg.grids[0]) if cfg.grids else (64,) * spec.dim
    if len(shape) != spec.dim:
        raise UserError(f"grid must have {spec.dim} sizes")
    cons0 = np.stack([sim.smooth_random_field(shape, cfg.seed + k) for k in range(spec.conserved)])
    ns = sim.NumericScheme.create(b, cfg.numeric_bindings())
    state = sim.initial_state(ns, cons0)
    mass0 = cons0.sum(axis=tuple(range(1, cons0.ndim)))
    for n in range(cfg.steps):
        with np.errstate(over="ignore", invalid="ignore"):
            state = sim.lbm_step(state)
        if not np.isfinite(state.m).all():
            sys.stderr.write(f"diverged at step {n + 1}\n")
            return EXIT_DIVERGENCE
    lines = [f"steps,{cfg.steps}"]
    mass = state.conserved().sum(axis=tuple(range(1, cons0.ndim)))
    for k, name in enumerate(spec.conserved_names):
        lines.append(f"mass_drift_{name},{abs(mass[k] - mass0[k]):.3e}")
    if cfg.compare:
        fds = reduce_multi(b, path=cfg.path)
        dev = sim.compare_trajectories(b, fds, cfg.steps, cfg.numeric_bindings(), cons0)
        lines.append(f"max_relative_deviation,{dev:.3e}")
    if cfg.out:
        sim.dump_field(cfg.out, state.conserved(), state.dx)
    sys.stdout.write(_header(cfg) + "\n".join(lines) + "\n")
    return EXIT_OK


def _converge_configs(cfg: RunConfig) -> List[sim.ConvergenceConfig]:
    if cfg.preset:
        configs = sim.preset_configs(cfg.preset, cfg.data)
    else:
        missing = [k for k in ("s", "D") if k not in cfg.bindings]
        if missing:
            raise UserError("converge needs --preset or --bind s=... --bind D=...")
        configs = [sim.ConvergenceConfig(D=float(cfg.bindings["D"]), s=float(cfg.bindings["s"]), datum=d)
                   for d in cfg.data]
    return [sim.ConvergenceConfig(D=c.D, s=c.s, datum=c.datum, levels=cfg.levels) for c in configs]


def cmd_converge(cfg: RunConfig) -> int:
    configs = _converge_configs(cfg)
    outdir = Path(cfg.out) if cfg.out else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)
    summary = ["label,expected_order,finest_order,fitted_order,diverged"]
    status = EXIT_OK
    for c in configs:
        try:
            table = sim.convergence_study(c)
        except sim.Divergence as err:
            table = err.table
            status = EXIT_DIVERGENCE
        body = table.to_csv() + ("# diverged\n" if table.diverged else "")
        if outdir:
            (outdir / f"{c.label()}.csv").write_text(_header(cfg) + body)
        finest = table.rows[-1][2] if len(table.rows) > 1 else None
        fitted = table.fitted_order() if len(table.rows) > 1 else None
        fmt = lambda v: "" if v is None else f"{v:.4f}"
        summary.append(f"{c.label()},{sim.expected_order(c.datum, c.D, c.C):.4f},{fmt(finest)},{fmt(fitted)},"
                       f"{int(table.diverged)}")
    sys.stdout.write(_header(cfg) + "\n".join(summary) + "\n")
    return status


COMMANDS = {
    "derive": cmd_derive,
    "check": cmd_check,
    "stability": cmd_stability,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lbmfd", description="Turn lattice Boltzmann schemes into multi-step finite-difference schemes.")
    p.add_argument("--version", action="version", version=f"lbmfd {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in [
        ("derive", "print the finite-difference scheme of each conserved moment"),
        ("check", "run the symbolic invariants on a scheme"),
        ("stability", "von Neumann test at bound parameter values"),
        ("scan", "stability verdicts over a two-parameter grid (CSV)"),
        ("simulate", "run the lattice Boltzmann scheme on random smooth data"),
        ("converge", "error tables of the three-velocity advection study (CSV)"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--scheme", help="catalog name, 'link', or path to a .scheme file")
        sp.add_argument("--W", type=int, help="number of velocity pairs of the link scheme")
        sp.add_argument("--path", choices=PATHS, default="charpoly", help="annihilating polynomial")
        sp.add_argument("--no-trim", action="store_true", help="keep moments relaxed with rate 1")
        sp.add_argument("--bind", action="append", default=[], metavar="NAME=VALUE")
        sp.add_argument("--grid", action="append", default=[],
                        help="scan: name=lo:hi:n (twice); simulate: 64 or 32x32")
        sp.add_argument("--xi-points", type=int, default=spectral.XI_POINTS)
        sp.add_argument("--tol-mod", type=float, default=spectral.TOL_MOD)
        sp.add_argument("--tol-sep", type=float, default=spectral.TOL_SEP)
        sp.add_argument("--steps", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--compare", action="store_true", help="simulate: also run the FD scheme")
        sp.add_argument("--preset", choices=sorted(sim.PRESETS), help="converge: parameter preset")
        sp.add_argument("--data", default="abcd", help="converge: initial data among a, b, c, d")
        sp.add_argument("--levels", default="6:11", help="converge: dx = 2^-k for k in lo:hi")
        sp.add_argument("--out", help="output file (directory for converge)")
        sp.add_argument("--no-timestamp", action="store_true", help="omit the generated-at comment line")
    return p


def config_from_args(args) -> RunConfig:
    bindings = dict(parse_binding(b) for b in args.bind)
    try:
        lo, hi = (int(v) for v in args.levels.split(":"))
    except ValueError:
        raise UserError("--levels must look like 6:11") from None
    if any(d not in sim.INITIAL_DATA for d in args.data):
        raise UserError("--data letters must be among a, b, c, d")
    return RunConfig(
        command=args.command, scheme=args.scheme, W=args.W, bindings=bindings, grids=args.grid,
        out=args.out, path=args.path, trim=not args.no_trim, timestamp=not args.no_timestamp,
        xi_points=args.xi_points, tol_mod=args.tol_mod, tol_sep=args.tol_sep, steps=args.steps,
        seed=args.seed, compare=args.compare, preset=args.preset, data=tuple(args.data),
        levels=tuple(range(lo, hi + 1)),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except UserError as err:
        sys.stderr.write(f"lbmfd: error: {err}\n")
        return EXIT_USER
    except (SchemeError, schemefile.SchemeFileError, ex.ExprSyntaxError, ex.UnknownSymbol, UnboundParameter,
            VanishingDenominator) as err:
        sys.stderr.write(f"lbmfd: error: {err}\n")
        return EXIT_USER
    except (AnnihilationError, AssertionError) as err:
        sys.stderr.write(f"lbmfd: invariant failure: {err}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
