"""Component expressions: parsing, printing and second-order jet evaluation.

Expressions are small analytic formulas in chart coordinates, e.g.
``1+exp(-x1+x3)``.  They are parsed into immutable trees and evaluated on
batches of points, either for values only or as order-2 jets (value,
gradient, Hessian) propagated exactly through every operation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

FUNCTIONS = ("exp", "ln", "sin", "cos", "sinh", "cosh", "sqrt")


class ExprError(ValueError):
    """Base class for expression problems."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, source: str):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset} in {source!r}")


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain of an operation."""


# --------------------------------------------------------------------- trees


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Const, Coord, Neg, BinOp, Call]


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


def Pow(a, b):
    return BinOp("^", a, b)


def max_coord_index(tree: Expr) -> int:
    """Largest coordinate index referenced (-1 for constant trees)."""
    if isinstance(tree, Coord):
        return tree.index
    if isinstance(tree, Const):
        return -1
    if isinstance(tree, (Neg, Call)):
        return max_coord_index(tree.arg)
    return max(max_coord_index(tree.left), max_coord_index(tree.right))


def is_constant(tree: Expr) -> bool:
    return max_coord_index(tree) < 0


# -------------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            bad = len(src[:pos]) + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", _byte_offset(src, bad), src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


def _byte_offset(src: str, char_index: int) -> int:
    return len(src[:char_index].encode("utf-8"))


class _Parser:
    # Precedence, loosest first: + -, * /, unary -, ^ (right associative).
    def __init__(self, src: str, coord_names: Sequence[str], constants: Mapping[str, float]):
        self.src = src
        self.names = {name: i for i, name in enumerate(coord_names)}
        self.constants = dict(constants)
        self.tokens = _tokenize(src)
        self.pos = 0

    def error(self, message: str, tok=None):
        tok = tok or self.tokens[self.pos]
        raise ExprSyntaxError(message, _byte_offset(self.src, tok[2]), self.src)

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        tok = self.take()
        if tok[1] != value or tok[0] != "op":
            self.error(f"expected {value!r}", tok)

    def parse(self) -> Expr:
        tree = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return tree

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek() == ("op", "-", self.peek()[2]):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                self.error(f"unknown function {text!r}", tok)
            if text in self.names:
                return Coord(self.names[text], text)
            if text in self.constants:
                return Const(float(self.constants[text]))
            self.error(f"unknown identifier {text!r}", tok)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.error("unexpected end of expression", tok)
        self.error(f"unexpected {text!r}", tok)


def parse_expr(src: str, coord_names: Sequence[str], constants: Mapping[str, float] | None = None) -> Expr:
    """Parse ``src`` into an expression tree over ``coord_names``.

    ``constants`` maps extra identifiers (scenario parameters) to fixed values;
    they become ``Const`` nodes.
    """
    if not coord_names:
        raise ValueError("coordinate name list is empty")
    if len(set(coord_names)) != len(coord_names):
        raise ValueError(f"coordinate names are not distinct: {list(coord_names)}")
    for name in coord_names:
        if name in FUNCTIONS:
            raise ValueError(f"coordinate name {name!r} shadows a function")
    return _Parser(src, coord_names, constants or {}).parse()


# ------------------------------------------------------------------- printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(tree: Expr) -> int:
    if isinstance(tree, BinOp):
        return _PREC[tree.op]
    if isinstance(tree, Neg):
        return _PREC["neg"]
    if isinstance(tree, Const) and (tree.value < 0 or math.copysign(1.0, tree.value) < 0):
        return 0
    return _PREC["atom"]


def to_source(tree: Expr) -> str:
    """Render a tree so that parsing the result gives the same tree."""
    if isinstance(tree, Const):
        text = repr(float(tree.value))
        return f"({text})" if text.startswith("-") else text
    if isinstance(tree, Coord):
        return tree.name
    if isinstance(tree, Call):
        return f"{tree.func}({to_source(tree.arg)})"
    if isinstance(tree, Neg):
        inner = to_source(tree.arg)
        if _prec(tree.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[tree.op]
    left, right = to_source(tree.left), to_source(tree.right)
    if tree.op == "^":
        # base must be an atom; exponent may be anything at unary level or tighter
        if _prec(tree.left) <= p:
            left = f"({left})"
        if _prec(tree.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(tree.left) < p:
        left = f"({left})"
    if _prec(tree.right) <= p:
        right = f"({right})"
    return f"{left} {tree.op} {right}"


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar field, batched over points.

    Shapes are ``(...)``, ``(..., n)`` and ``(..., n, n)``.
    """

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray


def _as_points(points) -> tuple[np.ndarray, bool]:
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    if single:
        p = p[None, :]
    if not np.all(np.isfinite(p)):
        raise ValueError("evaluation point has non-finite coordinates")
    return p, single


def _check_dim(tree: Expr, n: int):
    if max_coord_index(tree) >= n:
        raise ValueError(f"expression {to_source(tree)!r} references coordinate beyond dimension {n}")


def _domain_error(what: str, tree: Expr, points: np.ndarray, bad: np.ndarray):
    idx = int(np.flatnonzero(bad)[0])
    pt = ", ".join(f"{v:.17g}" for v in points[idx])
    raise ExprDomainError(f"{what} in subexpression {to_source(tree)!r} at point ({pt})")


def _integer_exponent(tree: Expr) -> int | None:
    if not is_constant(tree):
        return None
    k = _value(tree, np.zeros((1, 0)))[0]
    if float(k).is_integer() and abs(k) <= 64:
        return int(k)
    return None


def _unary_value(func: str, a: np.ndarray, tree: Expr, points: np.ndarray) -> np.ndarray:
    if func == "ln":
        if np.any(a <= 0):
            _domain_error("logarithm of non-positive value", tree, points, a <= 0)
        return np.log(a)
    if func == "sqrt":
        if np.any(a <= 0):
            _domain_error("square root of non-positive value", tree, points, a <= 0)
        return np.sqrt(a)
    return getattr(np, func)(a)


def _int_power(a: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(a)
    for _ in range(abs(k)):
        out = out * a
    return out if k >= 0 else 1.0 / out


def _value(tree: Expr, points: np.ndarray) -> np.ndarray:
    if isinstance(tree, Const):
        return np.full(points.shape[0], tree.value)
    if isinstance(tree, Coord):
        return points[:, tree.index].copy()
    if isinstance(tree, Neg):
        return -_value(tree.arg, points)
    if isinstance(tree, Call):
        return _unary_value(tree.func, _value(tree.arg, points), tree, points)
    a = _value(tree.left, points)
    if tree.op == "^":
        k = _integer_exponent(tree.right)
        if k is not None:
            if k < 0 and np.any(a == 0):
                _domain_error("division by zero", tree, points, a == 0)
            return _int_power(a, k)
        if np.any(a <= 0):
            _domain_error("non-integer power of non-positive base", tree, points, a <= 0)
        return np.power(a, _value(tree.right, points))
    b = _value(tree.right, points)
    if tree.op == "+":
        return a + b
    if tree.op == "-":
        return a - b
    if tree.op == "*":
        return a * b
    if np.any(b == 0):
        _domain_error("division by zero", tree, points, b == 0)
    return a / b


def eval_value(tree: Expr, points) -> np.ndarray | float:
    """Value of ``tree`` at one point (returns float) or a batch of points."""
    p, single = _as_points(points)
    _check_dim(tree, p.shape[1])
    v = _value(tree, p)
    return float(v[0]) if single else v


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, :, None] * b[:, None, :]


def _sym_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a b^T + b a^T, exactly symmetric
    return _outer(a, b) + _outer(b, a)


def _chain(v: np.ndarray, d1: np.ndarray, d2: np.ndarray, inner: Jet2) -> Jet2:
    g = d1[:, None] * inner.gradient
    h = d1[:, None, None] * inner.hessian + d2[:, None, None] * _outer(inner.gradient, inner.gradient)
    return Jet2(v, g, h)


def _jet(tree: Expr, points: np.ndarray) -> Jet2:
    B, n = points.shape
    if isinstance(tree, Const):
        return Jet2(np.full(B, tree.value), np.zeros((B, n)), np.zeros((B, n, n)))
    if isinstance(tree, Coord):
        g = np.zeros((B, n))
        g[:, tree.index] = 1.0
        return Jet2(points[:, tree.index].copy(), g, np.zeros((B, n, n)))
    if isinstance(tree, Neg):
        a = _jet(tree.arg, points)
        return Jet2(-a.value, -a.gradient, -a.hessian)
    if isinstance(tree, Call):
        a = _jet(tree.arg, points)
        u = a.value
        v = _unary_value(tree.func, u, tree, points)
        if tree.func == "exp":
            d1, d2 = v, v
        elif tree.func == "ln":
            d1 = 1.0 / u
            d2 = -d1 * d1
        elif tree.func == "sin":
            d1, d2 = np.cos(u), -v
        elif tree.func == "cos":
            d1, d2 = -np.sin(u), -v
        elif tree.func == "sinh":
            d1, d2 = np.cosh(u), v
        elif tree.func == "cosh":
            d1, d2 = np.sinh(u), v
        else:  # sqrt
            d1 = 0.5 / v
            d2 = -0.5 * d1 / u
        return _chain(v, d1, d2, a)
    a = _jet(tree.left, points)
    if tree.op == "^":
        k = _integer_exponent(tree.right)
        if k is not None:
            u = a.value
            if k < 0 and np.any(u == 0):
                _domain_error("division by zero", tree, points, u == 0)
            v = _int_power(u, k)
            d1 = k * _int_power(u, k - 1) if k != 0 else np.zeros_like(u)
            d2 = k * (k - 1) * _int_power(u, k - 2) if k not in (0, 1) else np.zeros_like(u)
            return _chain(v, d1, d2, a)
        if np.any(a.value <= 0):
            _domain_error("non-integer power of non-positive base", tree, points, a.value <= 0)
        b = _jet(tree.right, points)
        # a^b = exp(b ln a)
        ln_a = _chain(np.log(a.value), 1.0 / a.value, -1.0 / a.value**2, a)
        prod = _mul(b, ln_a)
        v = np.power(a.value, b.value)
        return _chain(v, v, v, prod)
    b = _jet(tree.right, points)
    if tree.op == "+":
        return Jet2(a.value + b.value, a.gradient + b.gradient, a.hessian + b.hessian)
    if tree.op == "-":
        return Jet2(a.value - b.value, a.gradient - b.gradient, a.hessian - b.hessian)
    if tree.op == "*":
        return _mul(a, b)
    if np.any(b.value == 0):
        _domain_error("division by zero", tree, points, b.value == 0)
    r = 1.0 / b.value
    recip = _chain(r, -r * r, 2.0 * r * r * r, b)
    q = _mul(a, recip)
    return Jet2(a.value / b.value, q.gradient, q.hessian)


def _mul(a: Jet2, b: Jet2) -> Jet2:
    v = a.value * b.value
    g = a.gradient * b.value[:, None] + a.value[:, None] * b.gradient
    h = (
        a.hessian * b.value[:, None, None]
        + a.value[:, None, None] * b.hessian
        + _sym_outer(a.gradient, b.gradient)
    )
    return Jet2(v, g, h)


def _mirror_upper(h: np.ndarray) -> np.ndarray:
    upper = np.triu(h)
    return upper + np.swapaxes(np.triu(h, 1), -1, -2)


def eval_jet(tree: Expr, points) -> Jet2:
    """Order-2 jet of ``tree`` at one point or a batch of points.

    The Hessian is assembled from its upper triangle, so it is exactly
    symmetric.  The value agrees bit-for-bit with :func:`eval_value`.
    """
    p, single = _as_points(points)
    _check_dim(tree, p.shape[1])
    j = _jet(tree, p)
    value = _value(tree, p) if isinstance(tree, BinOp) and tree.op == "^" else j.value
    h = _mirror_upper(j.hessian)
    if single:
        return Jet2(float(value[0]), j.gradient[0], h[0])
    return Jet2(value, j.gradient, h)


# --------------------------------------------------------- array helpers


def parse_array(sources, coord_names: Sequence[str], constants: Mapping[str, float] | None = None):
    """Parse a nested list of expression strings into a nested tuple of trees."""
    if isinstance(sources, str):
        return parse_expr(sources, coord_names, constants)
    if isinstance(sources, (int, float)) and not isinstance(sources, bool):
        return Const(float(sources))
    return tuple(parse_array(s, coord_names, constants) for s in sources)


def _flatten(trees):
    if isinstance(trees, tuple):
        out = []
        for t in trees:
            out.extend(_flatten(t))
        return out
    return [trees]


def _shape(trees) -> tuple[int, ...]:
    if isinstance(trees, tuple):
        return (len(trees),) + (_shape(trees[0]) if trees else ())
    return ()


def array_value(trees, points) -> np.ndarray:
    """Evaluate a nested tuple of trees on a batch; shape ``(B, *array_shape)``."""
    p, _ = _as_points(points)
    flat = _flatten(trees)
    vals = np.stack([eval_value(t, p) for t in flat], axis=-1)
    return vals.reshape((p.shape[0],) + _shape(trees))


def array_jet(trees, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jets of a tree array on a batch.

    Returns ``(value, grad, hess)`` with shapes ``(B, *S)``, ``(B, *S, n)`` and
    ``(B, *S, n, n)`` where ``S`` is the array shape.
    """
    p, _ = _as_points(points)
    B, n = p.shape
    flat = _flatten(trees)
    jets = [eval_jet(t, p) for t in flat]
    shape = _shape(trees)
    v = np.stack([j.value for j in jets], axis=1).reshape((B,) + shape)
    g = np.stack([j.gradient for j in jets], axis=1).reshape((B,) + shape + (n,))
    h = np.stack([j.hessian for j in jets], axis=1).reshape((B,) + shape + (n, n))
    return v, g, h
