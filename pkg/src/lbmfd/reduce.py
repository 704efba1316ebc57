"""Multi-step finite-difference schemes on the conserved moments.

For ``m^{n+1} = C m^n + f^n`` and a monic polynomial ``P = sum_k g_k X^k``
of degree r whose value ``P(C)`` has a zero row ``l``,

    m_l^{n+1} = - sum_{k<r} g_k m_l^{n+1-r+k} + sum_{L<r} (P_L f^{n-L})_l,
    P_L = sum_{i=0}^{L} g_{r+i-L} C^i.

With one conserved moment ``C = A`` and ``f = B m^eq``.  With several,
``C = A_l`` and the remaining conserved moments enter through ``A_l^o``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import expr as ex
from .linalg import (
    OpMatrix,
    RingPoly,
    apply_ring_poly,
    charpoly_trimmed,
    minimal_polynomial,
    mpamfr,
)
from .opring import OperatorPoly, render_shift
from .scheme import BuiltScheme, decompose_conserved, detect_trim

PATHS = ("charpoly", "minimal", "mpafr")


class AnnihilationError(AssertionError):
    """The polynomial used for a reduction does not kill the conserved row."""


@dataclass
class FDScheme:
    """Stencils of ``m_l^{n+1} = sum_k h[k] m_l^{n-k} + sum_k src[k][i] m_i^eq,n-k + sum_k xsrc[k][j] m_j^{n-k}``."""

    dim: int
    conserved: int
    h: List[OperatorPoly]
    src: List[Dict[int, OperatorPoly]]
    xsrc: List[Dict[int, OperatorPoly]] = field(default_factory=list)
    provenance: str = "charpoly"
    names: Optional[Tuple[str, ...]] = None
    polynomial: Optional[RingPoly] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.xsrc:
            self.xsrc = [{} for _ in self.h]
        if not (len(self.h) == len(self.src) == len(self.xsrc)):
            raise ValueError("stencil families must have one entry per lag")

    @property
    def K(self) -> int:
        return len(self.h)

    def name(self, i: int) -> str:
        if self.names is not None and i < len(self.names):
            return self.names[i]
        return f"m{i + 1}"

    def fields(self) -> Tuple[set, set]:
        """Indices of equilibria and of other conserved moments used by the stencils."""
        eq = {i for lag in self.src for i in lag}
        cons = {j for lag in self.xsrc for j in lag}
        return eq, cons

    def __eq__(self, other) -> bool:
        if not isinstance(other, FDScheme):
            return NotImplemented
        if (self.dim, self.conserved, self.K) != (other.dim, other.conserved, other.K):
            return False

        def same(a: Dict[int, OperatorPoly], b: Dict[int, OperatorPoly]) -> bool:
            keys = set(a) | set(b)
            zero = OperatorPoly.zero(self.dim)
            return all(a.get(k, zero) == b.get(k, zero) for k in keys)

        return (all(a == b for a, b in zip(self.h, other.h))
                and all(same(a, b) for a, b in zip(self.src, other.src))
                and all(same(a, b) for a, b in zip(self.xsrc, other.xsrc)))


def _prune(fd: FDScheme) -> FDScheme:
    while fd.K and fd.h[-1].is_zero() and not any(not v.is_zero() for v in fd.src[-1].values()) \
            and not any(not v.is_zero() for v in fd.xsrc[-1].values()):
        fd.h.pop()
        fd.src.pop()
        fd.xsrc.pop()
    return fd


def scheme_from_polynomial(P: RingPoly, C: OpMatrix, B: OpMatrix, row: int, source_cols: Sequence[int],
                           cross: Optional[OpMatrix] = None, cross_cols: Sequence[int] = (),
                           provenance: str = "charpoly", names=None) -> FDScheme:
    """Generic reduction; checks that row ``row`` of ``P(C)`` vanishes before emitting anything."""
    if not P.is_monic():
        raise ValueError("reduction polynomial must be monic")
    if not all(e.is_zero() for e in apply_ring_poly(P, C).row(row)):
        raise AnnihilationError(f"polynomial does not annihilate row {row + 1}")
    d, r = C.dim, P.degree
    g = P.coeffs
    powers_row = [tuple(OperatorPoly.one(d) if j == row else OperatorPoly.zero(d) for j in range(C.cols))]
    for _ in range(1, r):
        prev = powers_row[-1]
        powers_row.append(tuple(
            sum((prev[k] * C.entries[k][j] for k in range(C.rows) if prev[k].terms and C.entries[k][j].terms),
                OperatorPoly.zero(d))
            for j in range(C.cols)))
    h, src, xsrc = [], [], []
    for L in range(r):
        h.append(-g[r - 1 - L])
        # row of P_L
        pl = [OperatorPoly.zero(d)] * C.cols
        for i in range(L + 1):
            coef = g[r + i - L]
            if coef.terms:
                pl = [a + coef * b for a, b in zip(pl, powers_row[i])]
        src.append({i: _row_times_col(pl, B, i) for i in source_cols})
        xsrc.append({j: _row_times_col(pl, cross, j) for j in cross_cols} if cross is not None else {})
    fd = FDScheme(d, row, h, src, xsrc, provenance=provenance, names=names, polynomial=P)
    return _prune(fd)


def _row_times_col(rowvec, M: OpMatrix, j: int) -> OperatorPoly:
    acc = OperatorPoly.zero(M.dim)
    for k, a in enumerate(rowvec):
        b = M.entries[k][j]
        if a.terms and b.terms:
            acc = acc + a * b
    return acc


def _reduction_polynomial(C: OpMatrix, kept: Sequence[int], row: int, path: str) -> Tuple[RingPoly, str]:
    if path not in PATHS:
        raise ValueError(f"unknown path {path!r}; choose among {', '.join(PATHS)}")
    kept = sorted(kept)
    sub = C.submatrix(kept, kept)
    local_row = kept.index(row)
    if path == "charpoly":
        P = charpoly_trimmed(C, kept)
        return P, "trimmed" if len(kept) < C.rows else "charpoly"
    if path == "minimal":
        return minimal_polynomial(sub), "minimal"
    if local_row != 0:
        perm = [local_row] + [i for i in range(len(kept)) if i != local_row]
        sub = sub.permute(perm)
    return mpamfr(sub, 0), "mpafr"


def reduce_single(b: BuiltScheme, path: str = "charpoly", trim: bool = True) -> FDScheme:
    """FD scheme for the single conserved moment."""
    if b.spec.conserved != 1:
        raise ValueError("reduce_single needs exactly one conserved moment, use reduce_multi")
    return reduce_multi(b, path=path, trim=trim)[0]


def reduce_multi(b: BuiltScheme, path: str = "charpoly", trim: bool = True) -> List[FDScheme]:
    """One FD scheme per conserved moment."""
    info = detect_trim(b)
    noncons = info.kept[b.spec.conserved:] if trim else b.nonconserved
    out = []
    for ell in b.conserved:
        A_l, A_o = decompose_conserved(b, ell)
        P, prov = _reduction_polynomial(A_l, (ell,) + tuple(noncons), ell, path)
        others = tuple(j for j in b.conserved if j != ell)
        out.append(scheme_from_polynomial(
            P, A_l, b.B, ell, b.nonconserved, cross=A_o if others else None, cross_cols=others,
            provenance=prov, names=b.spec.moment_names,
        ))
    return out


def reduce_mpafr(b: BuiltScheme) -> FDScheme:
    return reduce_single(b, path="mpafr")


def reduce_with(b: BuiltScheme, P: RingPoly, ell: int = 0, provenance: str = "custom") -> FDScheme:
    """Reduction with a caller-supplied annihilating polynomial."""
    A_l, A_o = decompose_conserved(b, ell)
    others = tuple(j for j in b.conserved if j != ell)
    return scheme_from_polynomial(P, A_l, b.B, ell, b.nonconserved, cross=A_o if others else None,
                                  cross_cols=others, provenance=provenance, names=b.spec.moment_names)


@dataclass(frozen=True)
class BootstrapPlan:
    """Run the lattice Boltzmann scheme ``warmup_steps`` times to fill the FD history."""

    warmup_steps: int
    initial_state: str = "equilibrium"

    def is_empty(self) -> bool:
        return self.warmup_steps == 0


def bootstrap_plan(b: BuiltScheme, fd: FDScheme) -> BootstrapPlan:
    return BootstrapPlan(max(fd.K - 1, 0))


# -- text forms -----------------------------------------------------------------

def _time(lag: int) -> str:
    return "n" if lag == 0 else f"n-{lag}"


def render(fd: FDScheme) -> str:
    """Deterministic listing, lags ascending: homogeneous, cross, then equilibrium terms."""
    lhs = f"{fd.name(fd.conserved)}[n+1] ="
    lines = []
    for lag in range(fd.K):
        if not fd.h[lag].is_zero():
            lines.append((fd.h[lag], f"{fd.name(fd.conserved)}[{_time(lag)}]"))
        for j in sorted(fd.xsrc[lag]):
            if not fd.xsrc[lag][j].is_zero():
                lines.append((fd.xsrc[lag][j], f"{fd.name(j)}[{_time(lag)}]"))
        for i in sorted(fd.src[lag]):
            if not fd.src[lag][i].is_zero():
                lines.append((fd.src[lag][i], f"{fd.name(i)}eq[{_time(lag)}]"))
    if not lines:
        return f"{lhs} 0"
    pad = " " * len(lhs)
    out = []
    for k, (op, target) in enumerate(lines):
        out.append(f"{lhs if k == 0 else pad} + [{op.render()}] {target}")
    return "\n".join(out)


def _stencil(op: OperatorPoly):
    return [{"shift": list(z), "coeff": op.terms[z].render()} for z in sorted(op.terms)]


def to_dict(fd: FDScheme) -> dict:
    terms = []
    for lag in range(fd.K):
        if not fd.h[lag].is_zero():
            terms.append({"lag": lag, "kind": "homogeneous", "field": fd.name(fd.conserved),
                          "stencil": _stencil(fd.h[lag])})
        for j in sorted(fd.xsrc[lag]):
            if not fd.xsrc[lag][j].is_zero():
                terms.append({"lag": lag, "kind": "cross", "field": fd.name(j), "index": j,
                              "stencil": _stencil(fd.xsrc[lag][j])})
        for i in sorted(fd.src[lag]):
            if not fd.src[lag][i].is_zero():
                terms.append({"lag": lag, "kind": "source", "field": fd.name(i) + "eq", "index": i,
                              "stencil": _stencil(fd.src[lag][i])})
    return {
        "conserved": fd.name(fd.conserved),
        "conserved_index": fd.conserved,
        "dim": fd.dim,
        "steps": fd.K,
        "path": fd.provenance,
        "names": list(fd.names) if fd.names else None,
        "terms": terms,
    }


def to_json(fd: FDScheme) -> str:
    return json.dumps(to_dict(fd), indent=2, sort_keys=True)


def from_dict(data: dict) -> FDScheme:
    dim, K = data["dim"], data["steps"]
    h = [OperatorPoly.zero(dim) for _ in range(K)]
    src = [{} for _ in range(K)]
    xsrc = [{} for _ in range(K)]
    for t in data["terms"]:
        op = OperatorPoly(dim, {tuple(s["shift"]): ex.to_coeff(ex.parse(s["coeff"])) for s in t["stencil"]})
        if t["kind"] == "homogeneous":
            h[t["lag"]] = op
        elif t["kind"] == "cross":
            xsrc[t["lag"]][t["index"]] = op
        else:
            src[t["lag"]][t["index"]] = op
    names = tuple(data["names"]) if data.get("names") else None
    return FDScheme(dim, data["conserved_index"], h, src, xsrc, provenance=data["path"], names=names)


def from_json(text: str) -> FDScheme:
    return from_dict(json.loads(text))
