"""A tiny expression language for weights.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | number | 'x' index? | 'abs(x)' | 'abs2(x)'
            | 'exp(' expr ')' | 'pow(' expr ',' expr ')'
            | 'piecewise(' (cond ':' expr ';')+ 'else' ':' expr ')' | '(' expr ')'
    cond   := expr ('<'|'<='|'>'|'>=') expr
    index  := digits | '[' digits ']'

``x`` alone is the first coordinate, ``abs(x)`` the Euclidean norm and
``abs2(x)`` its square. A minus sign directly in front of a number literal is
folded into the literal, so printing and re-parsing is lossless.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Coord(Node):
    index: int


@dataclass(frozen=True)
class Norm(Node):
    pass


@dataclass(frozen=True)
class Norm2(Node):
    pass


@dataclass(frozen=True)
class Exp(Node):
    arg: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    expo: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Cond(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Piecewise(Node):
    branches: tuple  # of (Cond, Node)
    default: Node


# -- parsing -------------------------------------------------------------------

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_CMP = ("<=", ">=", "<", ">")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, tok: str) -> bool:
        self.skip()
        return self.text.startswith(tok, self.pos)

    def accept(self, tok: str) -> bool:
        if self.peek(tok):
            self.pos += len(tok)
            return True
        return False

    def expect(self, tok: str):
        if not self.accept(tok):
            self.fail(f"expected {tok!r}", [tok])

    def fail(self, message, expected=()):
        self.skip()
        raise ParseError(message, self.pos, expected)

    def parse(self) -> Node:
        node = self.expr()
        self.skip()
        if self.pos != len(self.text):
            self.fail("unexpected trailing input", ["+", "-", "*", "/", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            if self.accept("+"):
                node = BinOp("+", node, self.term())
            elif self.accept("-"):
                node = BinOp("-", node, self.term())
            else:
                return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            if self.accept("*"):
                node = BinOp("*", node, self.factor())
            elif self.accept("/"):
                node = BinOp("/", node, self.factor())
            else:
                return node

    def number(self) -> Num | None:
        self.skip()
        mt = _NUMBER.match(self.text, self.pos)
        if not mt:
            return None
        self.pos = mt.end()
        return Num(float(mt.group(0)))

    def factor(self) -> Node:
        self.skip()
        if self.accept("-"):
            lit = self.number()
            return Num(-lit.value) if lit is not None else Neg(self.factor())
        lit = self.number()
        if lit is not None:
            return lit
        if self.accept("abs2(x)"):
            return Norm2()
        if self.accept("abs(x)"):
            return Norm()
        if self.accept("exp("):
            arg = self.expr()
            self.expect(")")
            return Exp(arg)
        if self.accept("pow("):
            base = self.expr()
            self.expect(",")
            expo = self.expr()
            self.expect(")")
            return Pow(base, expo)
        if self.accept("piecewise("):
            return self.piecewise()
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if self.accept("x"):
            return Coord(self.index())
        self.fail("expected a factor", ["number", "x", "abs(x)", "abs2(x)", "exp(", "pow(",
                                        "piecewise(", "(", "-"])

    def index(self) -> int:
        if self.text.startswith("[", self.pos):
            self.pos += 1
            mt = re.compile(r"\s*(\d+)\s*").match(self.text, self.pos)
            if not mt:
                self.fail("expected a coordinate index", ["digits"])
            self.pos = mt.end()
            self.expect("]")
            return int(mt.group(1))
        mt = re.compile(r"\d+").match(self.text, self.pos)
        if mt:
            self.pos = mt.end()
            return int(mt.group(0))
        return 0

    def cond(self) -> Cond:
        left = self.expr()
        for op in _CMP:
            if self.accept(op):
                return Cond(op, left, self.expr())
        self.fail("expected a comparison", list(_CMP))

    def piecewise(self) -> Piecewise:
        branches = []
        while True:
            start = self.pos
            if self.accept("else"):
                if not branches:
                    self.pos = start
                    self.fail("piecewise needs at least one condition", ["condition"])
                self.expect(":")
                default = self.expr()
                self.expect(")")
                return Piecewise(tuple(branches), default)
            c = self.cond()
            self.expect(":")
            val = self.expr()
            self.expect(";")
            branches.append((c, val))


def parse(text: str) -> Node:
    """Parse a weight expression; raises ParseError with the failing offset."""
    return _Parser(text).parse()


# -- printing --------------------------------------------------------------------

def to_text(node: Node) -> str:
    """Fully parenthesized text that parses back to an equal tree."""
    if isinstance(node, Num):
        if not math.isfinite(node.value):
            raise ValueError("only finite literals can be printed")
        return repr(float(node.value))
    if isinstance(node, Coord):
        return f"x[{node.index}]"
    if isinstance(node, Norm):
        return "abs(x)"
    if isinstance(node, Norm2):
        return "abs2(x)"
    if isinstance(node, Exp):
        return f"exp({to_text(node.arg)})"
    if isinstance(node, Pow):
        return f"pow({to_text(node.base)}, {to_text(node.expo)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Neg):
        return f"-({to_text(node.arg)})"
    if isinstance(node, Cond):
        return f"{to_text(node.left)} {node.op} {to_text(node.right)}"
    if isinstance(node, Piecewise):
        parts = [f"{to_text(c)}: {to_text(v)}; " for c, v in node.branches]
        return "piecewise(" + "".join(parts) + f"else: {to_text(node.default)})"
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation ------------------------------------------------------------------

_BIN = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}
_CMPF = {"<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal}


def evaluate(node: Node, X) -> np.ndarray:
    """Evaluate at the rows of X, an (N, d) array (a 1-D array is N points in 1-D)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.asarray(_eval(node, X), dtype=float) * np.ones(X.shape[0])


def _eval(node, X):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Coord):
        if node.index >= X.shape[1]:
            raise ValueError(f"coordinate x[{node.index}] used on {X.shape[1]}-dimensional points")
        return X[:, node.index]
    if isinstance(node, Norm):
        return np.sqrt(np.sum(X * X, axis=1))
    if isinstance(node, Norm2):
        return np.sum(X * X, axis=1)
    if isinstance(node, Exp):
        return np.exp(_eval(node.arg, X))
    if isinstance(node, Pow):
        return np.power(np.asarray(_eval(node.base, X), dtype=float), _eval(node.expo, X))
    if isinstance(node, BinOp):
        return _BIN[node.op](_eval(node.left, X), _eval(node.right, X))
    if isinstance(node, Neg):
        return np.negative(_eval(node.arg, X))
    if isinstance(node, Cond):
        return _CMPF[node.op](_eval(node.left, X), _eval(node.right, X))
    if isinstance(node, Piecewise):
        n = X.shape[0]
        conds = [np.broadcast_to(_eval(c, X), (n,)) for c, _ in node.branches]
        vals = [np.broadcast_to(np.asarray(_eval(v, X), dtype=float), (n,)) for _, v in node.branches]
        return np.select(conds, vals, np.broadcast_to(np.asarray(_eval(node.default, X), dtype=float), (n,)))
    raise TypeError(f"not an expression node: {node!r}")


# -- structure ---------------------------------------------------------------------

def children(node: Node):
    if isinstance(node, (Exp, Neg)):
        return (node.arg,)
    if isinstance(node, (BinOp, Cond)):
        return (node.left, node.right)
    if isinstance(node, Pow):
        return (node.base, node.expo)
    if isinstance(node, Piecewise):
        out = []
        for c, v in node.branches:
            out += [c, v]
        return tuple(out) + (node.default,)
    return ()


def depends_on_x(node: Node) -> bool:
    if isinstance(node, (Coord, Norm, Norm2)):
        return True
    return any(depends_on_x(c) for c in children(node))


def constant_value(node: Node) -> float:
    return float(evaluate(node, np.zeros((1, 1)))[0])


def max_coord(node: Node) -> int:
    """Largest coordinate index used, -1 if none."""
    own = node.index if isinstance(node, Coord) else -1
    return max([own] + [max_coord(c) for c in children(node)])


def breakpoints(node: Node) -> list[float]:
    """1-D points where a piecewise condition can switch.

    Only comparisons of x, abs(x) or abs2(x) against constants are
    recognized; other conditions contribute nothing.
    """
    pts = set()
    _collect_breaks(node, pts)
    return sorted(pts)


def _collect_breaks(node, pts):
    if isinstance(node, Cond):
        for var, other in ((node.left, node.right), (node.right, node.left)):
            if depends_on_x(other):
                continue
            t = constant_value(other)
            if isinstance(var, Coord):
                pts.add(t)
            elif isinstance(var, Norm) and t >= 0:
                pts.update((t, -t))
            elif isinstance(var, Norm2) and t >= 0:
                pts.update((math.sqrt(t), -math.sqrt(t)))
    for c in children(node):
        _collect_breaks(c, pts)


def _lin_abs2(node):
    """Write node = c * abs2(x) + rest; returns (c, rest) or None."""
    if isinstance(node, Norm2):
        return 1.0, Num(0.0)
    if not depends_on_x(node):
        return 0.0, node
    if isinstance(node, Neg):
        r = _lin_abs2(node.arg)
        return None if r is None else (-r[0], Neg(r[1]))
    if isinstance(node, BinOp):
        if node.op in "+-":
            l, r = _lin_abs2(node.left), _lin_abs2(node.right)
            if l is None or r is None:
                return None
            sign = 1.0 if node.op == "+" else -1.0
            return l[0] + sign * r[0], BinOp(node.op, l[1], r[1])
        if node.op == "*":
            for a, b in ((node.left, node.right), (node.right, node.left)):
                if not depends_on_x(a):
                    r = _lin_abs2(b)
                    if r is not None:
                        k = constant_value(a)
                        return k * r[0], BinOp("*", a, r[1])
            return None
        if node.op == "/" and not depends_on_x(node.right):
            r = _lin_abs2(node.left)
            if r is not None:
                return r[0] / constant_value(node.right), BinOp("/", r[1], node.right)
    return None


def gaussian_split(node: Node):
    """Factor node = g * exp(c * abs2(x)); returns (g, c).

    The factorization is structural and exact; when no Gaussian factor can
    be pulled out, returns (node, 0.0). Integrating against exp(-kappa |y|^2)
    then only has to resolve the slowly varying cofactor g.
    """
    if isinstance(node, Exp):
        r = _lin_abs2(node.arg)
        if r is not None and r[0] != 0.0:
            rest = r[1]
            g = Num(1.0) if not depends_on_x(rest) and constant_value(rest) == 0.0 else Exp(rest)
            return g, r[0]
        return node, 0.0
    if isinstance(node, Neg):
        g, c = gaussian_split(node.arg)
        return Neg(g), c
    if isinstance(node, BinOp):
        gl, cl = gaussian_split(node.left)
        gr, cr = gaussian_split(node.right)
        if node.op == "*":
            return BinOp("*", gl, gr), cl + cr
        if node.op == "/":
            return BinOp("/", gl, gr), cl - cr
        if cl == cr:
            return BinOp(node.op, gl, gr), cl
        return node, 0.0
    if isinstance(node, Pow) and not depends_on_x(node.expo):
        g, c = gaussian_split(node.base)
        e = constant_value(node.expo)
        return Pow(g, node.expo), c * e
    if isinstance(node, Piecewise):
        parts = [gaussian_split(v) for _, v in node.branches] + [gaussian_split(node.default)]
        cs = {c for _, c in parts}
        if len(cs) == 1:
            c = cs.pop()
            branches = tuple((cond, g) for (cond, _), (g, _) in zip(node.branches, parts[:-1]))
            return Piecewise(branches, parts[-1][0]), c
        return node, 0.0
    return node, 0.0
