"""Built-in schemes.

Each entry is defined programmatically here and also shipped as a text file
under ``schemes/``; the two are kept equal by the test suite.
"""
from __future__ import annotations

from typing import Callable, Dict, Optional, Sequence, Tuple

from .scheme import SchemeSpec


def d1q2() -> SchemeSpec:
    return SchemeSpec.create(
        "d1q2", 1,
        velocities=[(1,), (-1,)],
        moment_matrix=[["1", "1"], ["lambda", "-lambda"]],
        rates=["0", "s"],
        equilibria={1: "lambda*C*m1"},
        parameters=("lambda", "s", "C"),
    )


def d1q3() -> SchemeSpec:
    """Three velocities, one conserved moment, two free rates s and p."""
    return SchemeSpec.create(
        "d1q3", 1,
        velocities=[(0,), (1,), (-1,)],
        moment_matrix=[["1", "1", "1"], ["0", "lambda", "-lambda"], ["-2*lambda^2", "lambda^2", "lambda^2"]],
        rates=["0", "s", "p"],
        equilibria={1: "lambda*C*m1", 2: "2*lambda^2*D*m1"},
        parameters=("lambda", "s", "p", "C", "D"),
    )


def d1q3_two() -> SchemeSpec:
    """Three velocities with two conserved moments."""
    return SchemeSpec.create(
        "d1q3_two", 1,
        velocities=[(0,), (1,), (-1,)],
        moment_matrix=[["1", "1", "1"], ["0", "lambda", "-lambda"], ["0", "lambda^2", "lambda^2"]],
        rates=["0", "0", "p"],
        equilibria={2: "lambda^2*D*m1 + lambda*C*m2"},
        conserved=2,
        parameters=("lambda", "p", "C", "D"),
    )


def d1q3_srt() -> SchemeSpec:
    return SchemeSpec.create(
        "d1q3_srt", 1,
        velocities=[(0,), (1,), (-1,)],
        moment_matrix=[["1", "1", "1"], ["0", "lambda", "-lambda"], ["0", "lambda^2", "lambda^2"]],
        rates=["0", "omega", "omega"],
        equilibria={1: "lambda*C*m1", 2: "lambda^2*D*m1"},
        parameters=("lambda", "omega", "C", "D"),
    )


def d1q3_mrt() -> SchemeSpec:
    return SchemeSpec.create(
        "d1q3_mrt", 1,
        velocities=[(0,), (1,), (-1,)],
        moment_matrix=[["1", "1", "1"], ["0", "lambda", "-lambda"], ["0", "lambda^2", "lambda^2"]],
        rates=["0", "omega2", "omega3"],
        equilibria={1: "lambda*C*m1", 2: "lambda^2*D*m1"},
        parameters=("lambda", "omega2", "omega3", "C", "D"),
    )


def d2q4() -> SchemeSpec:
    return SchemeSpec.create(
        "d2q4", 2,
        velocities=[(1, 0), (0, 1), (-1, 0), (0, -1)],
        moment_matrix=[
            ["1", "1", "1", "1"],
            ["lambda", "0", "-lambda", "0"],
            ["0", "lambda", "0", "-lambda"],
            ["lambda^2", "-lambda^2", "lambda^2", "-lambda^2"],
        ],
        rates=["0", "s", "s", "1"],
        equilibria={1: "lambda*Cx*m1", 2: "lambda*Cy*m1", 3: "0"},
        parameters=("lambda", "s", "Cx", "Cy"),
    )


def link(W: int = 1, pairs: Optional[Sequence[Tuple[int, ...]]] = None, dim: int = 1) -> SchemeSpec:
    """Rest velocity plus W opposite pairs, two-relaxation-time rates s and 2-s.

    ``pairs`` lists the W nonzero velocities c_{2l}; their opposites are added.
    By default 1D pairs 1, 2, ..., W are used.
    """
    if W < 1:
        raise ValueError("W must be positive")
    if pairs is None:
        if dim != 1:
            raise ValueError("pairs must be given outside one dimension")
        pairs = [(k,) for k in range(1, W + 1)]
    pairs = [tuple(c) for c in pairs]
    if len(pairs) != W or any(len(c) != dim or not any(c) for c in pairs):
        raise ValueError(f"{W} nonzero velocities of dimension {dim} expected")
    velocities = [(0,) * dim]
    for c in pairs:
        velocities += [c, tuple(-v for v in c)]
    q = 1 + 2 * W
    rows = [["1"] * q]
    for l in range(W):
        diff, summ = ["0"] * q, ["0"] * q
        diff[1 + 2 * l], diff[2 + 2 * l] = "lambda", "-lambda"
        summ[1 + 2 * l] = summ[2 + 2 * l] = "lambda^2"
        rows += [diff, summ]
    rates = ["0"] + ["s", "2 - s"] * W
    eq = {}
    for l in range(W):
        eq[1 + 2 * l] = "lambda*C*m1"
        eq[2 + 2 * l] = "lambda^2*D*m1"
    return SchemeSpec.create(
        f"link{W}" if dim == 1 else f"link{W}_d{dim}", dim,
        velocities=velocities, moment_matrix=rows, rates=rates, equilibria=eq,
        parameters=("lambda", "s", "C", "D"),
    )


def burgers_d1q3() -> SchemeSpec:
    """D1Q3 with the nonlinear flux equilibrium m2 = m1^2/2."""
    return d1q3().with_equilibria({1: "m1^2/2", 2: "2*lambda^2*D*m1"})


CATALOG: Dict[str, Callable[[], SchemeSpec]] = {
    "d1q2": d1q2,
    "d1q3": d1q3,
    "d1q3_two": d1q3_two,
    "d1q3_srt": d1q3_srt,
    "d1q3_mrt": d1q3_mrt,
    "d2q4": d2q4,
    "link1": lambda: link(1),
    "link2": lambda: link(2),
    "link3": lambda: link(3),
}


# stable parameter values used by the numerical checks and as CLI defaults
DEFAULT_BINDINGS: Dict[str, Dict[str, float]] = {
    "d1q2": {"lambda": 1.0, "s": 1.5, "C": 0.3},
    "d1q3": {"lambda": 1.0, "s": 1.5, "p": 1.2, "C": 0.3, "D": 0.1},
    "d1q3_two": {"lambda": 1.0, "p": 1.4, "C": 0.3, "D": 0.4},
    "d1q3_srt": {"lambda": 1.0, "omega": 1.3, "C": 0.3, "D": 0.5},
    "d1q3_mrt": {"lambda": 1.0, "omega2": 1.4, "omega3": 1.1, "C": 0.3, "D": 0.5},
    "d2q4": {"lambda": 1.0, "s": 1.4, "Cx": 0.2, "Cy": 0.1},
    "link1": {"lambda": 1.0, "s": 1.3, "C": 0.2, "D": 0.3},
    "link2": {"lambda": 1.0, "s": 1.3, "C": 0.2, "D": 0.3},
    "link3": {"lambda": 1.0, "s": 1.3, "C": 0.2, "D": 0.3},
}


def get(name: str) -> SchemeSpec:
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown scheme {name!r}; known: {', '.join(sorted(CATALOG))}") from None
