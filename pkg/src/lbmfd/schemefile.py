"""Section-based text format for scheme specifications.

Example::

    [dimensions]
    name = d1q3
    d = 1
    q = 3
    conserved = 1

    [parameters]
    lambda s p C D

    [velocities]
    0
    1
    -1

    [moment_matrix]
    1, 1, 1
    0, lambda, -lambda
    -2*lambda^2, lambda^2, lambda^2

    [relaxation]
    0
    s
    p

    [equilibria]
    m2 = lambda*C*m1
    m3 = 2*lambda^2*D*m1

``#`` starts a comment.  The full grammar is in docs/scheme-format.md.
"""
from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import expr as ex
from .scheme import SchemeError, SchemeSpec

SECTIONS = ("dimensions", "parameters", "velocities", "moment_matrix", "relaxation", "equilibria")
REQUIRED = ("dimensions", "velocities", "moment_matrix", "relaxation", "equilibria")
ENV_VAR = "LBMFD_SCHEME_PATH"
_HEADER = re.compile(r"^\[([a-z_]+)\]$")
_EQ = re.compile(r"^m(\d+)$")


class SchemeFileError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 1):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


Item = Tuple[int, int, str]  # line, column of first character, text


def _sections(text: str) -> Dict[str, List[Item]]:
    out: Dict[str, List[Item]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        stripped = body.strip()
        if not stripped:
            continue
        col = len(body) - len(body.lstrip()) + 1
        m = _HEADER.match(stripped)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise SchemeFileError(f"unknown section [{name}]", lineno, col)
            if name in out:
                raise SchemeFileError(f"duplicate section [{name}]", lineno, col)
            out[name] = []
            current = name
            continue
        if stripped.startswith("["):
            raise SchemeFileError(f"malformed section header {stripped!r}", lineno, col)
        if current is None:
            raise SchemeFileError("content before the first section", lineno, col)
        out[current].append((lineno, col, stripped))
    for name in REQUIRED:
        if name not in out:
            raise SchemeFileError(f"missing section [{name}]")
    return out


def _split(item: Item, sep: str = ",") -> List[Item]:
    """Split on ``sep`` keeping the column of each piece."""
    line, col, text = item
    pieces, start = [], 0
    for k, ch in enumerate(text + sep):
        if ch == sep:
            piece = text[start:k]
            lead = len(piece) - len(piece.lstrip())
            pieces.append((line, col + start + lead, piece.strip()))
            start = k + 1
    return pieces


def _expr(item: Item) -> ex.Expr:
    line, col, text = item
    if not text:
        raise SchemeFileError("empty expression", line, col)
    try:
        return ex.parse(text, line, col)
    except ex.ExprSyntaxError as err:
        raise SchemeFileError(err.bare, err.line, err.column) from None


def _int(item: Item, what: str) -> int:
    line, col, text = item
    try:
        return int(text)
    except ValueError:
        raise SchemeFileError(f"{what} must be an integer, got {text!r}", line, col) from None


def parse_scheme_file(text: str, default_name: str = "scheme") -> SchemeSpec:
    """Parse and validate; errors carry line and column."""
    secs = _sections(text)
    dims: Dict[str, Item] = {}
    for line, col, body in secs["dimensions"]:
        if "=" not in body:
            raise SchemeFileError("expected 'key = value'", line, col)
        lhs, rhs = body.split("=", 1)
        key = lhs.strip()
        if key not in ("name", "d", "q", "conserved"):
            raise SchemeFileError(f"unknown key {key!r} in [dimensions]", line, col)
        dims[key] = (line, col + len(lhs) + 1 + len(rhs) - len(rhs.lstrip()), rhs.strip())
    for key in ("d", "q"):
        if key not in dims:
            raise SchemeFileError(f"[dimensions] needs '{key} = ...'")
    d, q = _int(dims["d"], "d"), _int(dims["q"], "q")
    conserved = _int(dims["conserved"], "conserved") if "conserved" in dims else 1
    name = dims["name"][2] if "name" in dims else default_name

    params: List[str] = []
    for line, col, body in secs.get("parameters", []):
        for piece in re.finditer(r"\S+", body):
            tok = piece.group(0)
            if not re.match(r"^[A-Za-z_][A-Za-z_0-9]*$", tok):
                raise SchemeFileError(f"invalid parameter name {tok!r}", line, col + piece.start())
            params.append(tok)

    vel_items = secs["velocities"]
    if len(vel_items) != q:
        where = vel_items[-1][:2] if vel_items else (0, 1)
        raise SchemeFileError(f"q = {q} but {len(vel_items)} velocities given", *where)
    velocities = []
    for item in vel_items:
        comps = [p for p in _split((item[0], item[1], item[2].replace(" ", ",")), ",") if p[2]]
        if len(comps) != d:
            raise SchemeFileError(f"velocity needs {d} integer components", item[0], item[1])
        velocities.append(tuple(_int(c, "velocity component") for c in comps))

    rows = secs["moment_matrix"]
    if len(rows) != q:
        where = rows[-1][:2] if rows else (0, 1)
        raise SchemeFileError(f"moment matrix needs {q} rows, got {len(rows)}", *where)
    matrix = []
    for item in rows:
        cells = _split(item)
        if len(cells) != q:
            raise SchemeFileError(f"moment matrix row needs {q} entries, got {len(cells)}", item[0], item[1])
        matrix.append(tuple(_expr(c) for c in cells))

    rates_items = secs["relaxation"]
    if len(rates_items) != q:
        where = rates_items[-1][:2] if rates_items else (0, 1)
        raise SchemeFileError(f"{q} relaxation rates needed, got {len(rates_items)}", *where)
    rates = [_expr(item) for item in rates_items]

    eqs, where = {}, {}
    for k, item in enumerate(rates_items):
        where[f"rate of m{k + 1}"] = where[f"rate of conserved moment m{k + 1}"] = item[:2]
    for line, col, body in secs["equilibria"]:
        if "=" not in body:
            raise SchemeFileError("expected 'mK = expression'", line, col)
        lhs, rhs = body.split("=", 1)
        m = _EQ.match(lhs.strip())
        if not m:
            raise SchemeFileError(f"left-hand side must be a moment name like m2, got {lhs.strip()!r}", line, col)
        idx = int(m.group(1)) - 1
        if idx in eqs:
            raise SchemeFileError(f"equilibrium of m{idx + 1} given twice", line, col)
        rcol = col + len(lhs) + 1 + (len(rhs) - len(rhs.lstrip()))
        eqs[idx] = _expr((line, rcol, rhs.strip()))
        where[f"equilibrium of m{idx + 1}"] = (line, rcol)

    try:
        return SchemeSpec.create(name, d, velocities, matrix, rates, eqs, conserved=conserved, parameters=params)
    except SchemeError as err:
        msg = str(err)
        pos = next((v for k, v in where.items() if re.search(re.escape(k) + r"\b", msg)), (0, 1))
        raise SchemeFileError(msg, *pos) from None


def format_scheme_file(spec: SchemeSpec) -> str:
    """Text form that parses back to an equal specification."""
    out = ["[dimensions]", f"name = {spec.name}", f"d = {spec.dim}", f"q = {spec.q}",
           f"conserved = {spec.conserved}", "", "[parameters]", " ".join(spec.parameters), "",
           "[velocities]"]
    out += [" ".join(str(v) for v in c) for c in spec.velocities]
    out += ["", "[moment_matrix]"]
    out += [", ".join(ex.render(e) for e in row) for row in spec.moment_matrix]
    out += ["", "[relaxation]"]
    out += [ex.render(r) for r in spec.rates]
    out += ["", "[equilibria]"]
    out += [f"m{i + 1} = {ex.render(e)}" for i, e in spec.equilibria]
    return "\n".join(out) + "\n"


def builtin_dir() -> Path:
    return Path(__file__).with_name("schemes")


def search_dirs() -> List[Path]:
    dirs = []
    env = os.environ.get(ENV_VAR)
    if env:
        dirs += [Path(p) for p in env.split(os.pathsep) if p]
    dirs.append(builtin_dir())
    return dirs


def load_scheme(source: str) -> SchemeSpec:
    """A file path, or a name looked up in the catalog directories."""
    path = Path(source)
    if not path.is_file():
        for d in search_dirs():
            cand = d / f"{source}.scheme"
            if cand.is_file():
                path = cand
                break
        else:
            raise FileNotFoundError(f"no scheme file or catalog entry named {source!r}")
    return parse_scheme_file(path.read_text(), default_name=path.stem)
