"""Small exact expression language for scheme files.

Grammar (``^`` and ``**`` both denote an integer power)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom (("^" | "**") exponent)?
    exponent := INT | "-" INT | "(" "-"? INT ")"
    atom   := INT | NAME | "(" expr ")"

There are no floating-point literals; ``1/3`` is a division of integers.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .opring import OperatorPoly, ParamPoly, RationalCoeff, VanishingDenominator


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.bare = message
        self.line = line
        self.column = column


class UnknownSymbol(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or isinstance(self.value, bool) or self.value < 0:
            raise ValueError("literals are nonnegative integers")


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exp: int


Expr = Union[Num, Sym, Neg, Add, Sub, Mul, Div, Pow]

_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<pow>\*\*|\^)|(?P<op>[-+*/()])|(?P<bad>.)"
)


def _tokenize(text: str, line: int, col0: int):
    toks = []
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = col0 + m.start()
        if kind == "ws":
            continue
        if kind == "bad":
            ch = m.group()
            if ch == ".":
                raise ExprSyntaxError("floating-point literals are not allowed, write a fraction", line, col)
            raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
        toks.append((kind, m.group(), col))
    toks.append(("end", "", col0 + len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, line: int, col0: int):
        self.toks = _tokenize(text, line, col0)
        self.pos = 0
        self.line = line

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(msg, self.line, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise self.error(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def parse(self) -> Expr:
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "pow":
            self.take()
            base = Pow(base, self.exponent())
            if self.peek()[0] == "pow":
                raise self.error("chained powers need parentheses")
        return base

    def exponent(self) -> int:
        paren = self.peek()[1] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        tok = self.take()
        if tok[0] != "int":
            raise self.error("exponent must be an integer literal", tok)
        if paren:
            self.expect(")")
        return sign * int(tok[1])

    def atom(self) -> Expr:
        tok = self.take()
        if tok[0] == "int":
            return Num(int(tok[1]))
        if tok[0] == "name":
            return Sym(tok[1])
        if tok[1] == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise self.error(f"unexpected {tok[1] or 'end of input'!r}", tok)


def parse(text: str, line: int = 1, column: int = 1) -> Expr:
    """Parse one expression; errors carry the line and column."""
    return _Parser(text, line, column).parse()


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 5, Sym: 5}


def render(node: Expr) -> str:
    """Text form that parses back to the same tree."""
    def wrap(n, min_prec):
        s = render(n)
        return f"({s})" if _PREC[type(n)] < min_prec else s

    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.arg, 3)
    if isinstance(node, Pow):
        e = str(node.exp) if node.exp >= 0 else f"(-{-node.exp})"
        return f"{wrap(node.base, 5)}^{e}"
    op = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(node)]
    p = _PREC[type(node)]
    return wrap(node.left, p) + op + wrap(node.right, p + 1)


def symbols(node: Expr) -> set:
    if isinstance(node, Sym):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg,)):
        return symbols(node.arg)
    if isinstance(node, Pow):
        return symbols(node.base)
    return symbols(node.left) | symbols(node.right)


def to_coeff(node: Expr, values: Optional[Mapping[str, RationalCoeff]] = None) -> RationalCoeff:
    """Exact value; symbols without an entry in ``values`` stay symbolic."""
    values = values or {}
    if isinstance(node, Num):
        return RationalCoeff.const(node.value)
    if isinstance(node, Sym):
        v = values.get(node.name)
        return v if v is not None else RationalCoeff.param(node.name)
    if isinstance(node, Neg):
        return -to_coeff(node.arg, values)
    if isinstance(node, Pow):
        base = to_coeff(node.base, values)
        if node.exp < 0 and base.is_zero():
            raise VanishingDenominator("negative power of zero")
        return base ** node.exp
    a, b = to_coeff(node.left, values), to_coeff(node.right, values)
    if isinstance(node, Add):
        return a + b
    if isinstance(node, Sub):
        return a - b
    if isinstance(node, Mul):
        return a * b
    if b.is_zero():
        raise VanishingDenominator(f"division by zero in {render(node)}")
    return a / b


def to_operator(node: Expr, dim: int, shifts: Sequence[str] = ("x", "y", "z")):
    """Operator in the shift ring; the first ``dim`` names of ``shifts`` are the generators.

    ``x^-1`` is the inverse shift.  Divisions must be by shift-free quantities.
    """
    gens = {name: tuple(int(k == i) for k in range(dim)) for i, name in enumerate(shifts[:dim])}

    def go(n):
        if isinstance(n, Num):
            return OperatorPoly.const(dim, n.value)
        if isinstance(n, Sym):
            if n.name in gens:
                return OperatorPoly.shift(gens[n.name])
            return OperatorPoly.const(dim, RationalCoeff.param(n.name))
        if isinstance(n, Neg):
            return -go(n.arg)
        if isinstance(n, Pow):
            return go(n.base) ** n.exp
        a, b = go(n.left), go(n.right)
        if isinstance(n, Add):
            return a + b
        if isinstance(n, Sub):
            return a - b
        if isinstance(n, Mul):
            return a * b
        if not b.is_scalar() or b.is_zero():
            raise ValueError(f"cannot divide by {render(n.right)}")
        return a * b.scalar_value().inverse()

    return go(node)


def evaluate(node: Expr, env: Mapping[str, object]):
    """Numeric value; ``env`` may hold floats, Fractions or numpy arrays."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Sym):
        try:
            return env[node.name]
        except KeyError:
            raise UnknownSymbol(f"unbound symbol {node.name!r}") from None
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Pow):
        base = evaluate(node.base, env)
        if node.exp >= 0:
            return base ** node.exp
        return (Fraction(1) if isinstance(base, (int, Fraction)) else 1.0) / base ** (-node.exp)
    a, b = evaluate(node.left, env), evaluate(node.right, env)
    if isinstance(node, Add):
        return a + b
    if isinstance(node, Sub):
        return a - b
    if isinstance(node, Mul):
        return a * b
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / b
    return a / b


def linear_form(node: Expr, variables) -> dict:
    """Coefficients of an expression that is linear and homogeneous in ``variables``.

    Returns a map variable -> RationalCoeff; raises ValueError otherwise.
    """
    c = to_coeff(node)
    variables = list(variables)
    if c.den.variables() & set(variables):
        raise ValueError(f"{render(node)} is not polynomial in {variables}")
    out = {v: ParamPoly() for v in variables}
    for mono, coef in c.num.terms.items():
        hits = [(n, e) for n, e in mono if n in out]
        if len(hits) != 1 or hits[0][1] != 1:
            raise ValueError(f"{render(node)} is not linear homogeneous in {variables}")
        rest = tuple((n, e) for n, e in mono if n not in out)
        out[hits[0][0]] = out[hits[0][0]] + ParamPoly({rest: coef})
    return {v: RationalCoeff(p, c.den) for v, p in out.items()}
