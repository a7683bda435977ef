"""Second-order jets and closed expression trees over real chart coordinates.

A :class:`Jet` carries a complex value together with its gradient and Hessian
with respect to a fixed set of real variables.  Arithmetic on jets propagates
derivatives exactly (forward mode, truncated at order two).

:class:`Expr` nodes build scalar fields out of constants, coordinates,
``+ - * /``, integer powers, ``exp``, ``log``, ``sqrt`` and ``conj``.  Complex
coordinates are expression-level combinations such as ``z = x + 1j*y``; the
underlying chart is always real, so ``conj`` commutes with differentiation.

Expressions can be evaluated on plain numbers, on jets (which gives the
derivatives), or differentiated symbolically with :meth:`Expr.diff`.  The two
derivative routes are independent and are cross-checked in the tests.
"""
from __future__ import annotations

import cmath
import numbers
from typing import Any, Sequence

import numpy as np

__all__ = [
    "Jet",
    "Expr",
    "const",
    "var",
    "coords",
    "exp",
    "log",
    "sqrt",
    "conj",
    "re",
    "im",
    "abs2",
    "evaluate",
    "evaluate_many",
    "substitute",
    "to_json",
    "from_json",
    "ExprError",
]


class ExprError(ValueError):
    pass


# --------------------------------------------------------------------------- jets


class Jet:
    """Value, gradient and (optionally) Hessian of a complex scalar."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess=None):
        self.value = complex(value)
        self.grad = grad
        self.hess = hess

    @property
    def order(self) -> int:
        return 2 if self.hess is not None else 1

    @property
    def nvars(self) -> int:
        return self.grad.shape[0]

    @classmethod
    def variable(cls, value, index: int, nvars: int, order: int = 2) -> "Jet":
        g = np.zeros(nvars, dtype=complex)
        g[index] = 1.0
        h = np.zeros((nvars, nvars), dtype=complex) if order >= 2 else None
        return cls(value, g, h)

    @classmethod
    def constant(cls, value, nvars: int, order: int = 2) -> "Jet":
        h = np.zeros((nvars, nvars), dtype=complex) if order >= 2 else None
        return cls(value, np.zeros(nvars, dtype=complex), h)

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.nvars, self.order)

    def __add__(self, other):
        o = self._lift(other)
        h = self.hess + o.hess if (self.hess is not None and o.hess is not None) else None
        return Jet(self.value + o.value, self.grad + o.grad, h)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = complex(other)
            return Jet(self.value * c, self.grad * c, None if self.hess is None else self.hess * c)
        a, b = self, other
        g = a.value * b.grad + b.value * a.grad
        h = None
        if a.hess is not None and b.hess is not None:
            outer = np.outer(a.grad, b.grad)
            h = a.value * b.hess + b.value * a.hess + outer + outer.T
        return Jet(a.value * b.value, g, h)

    __rmul__ = __mul__

    def _compose(self, f0, f1, f2) -> "Jet":
        # chain rule for a scalar function with derivatives f1, f2 at the value
        h = None
        if self.hess is not None:
            h = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        return Jet(f0, f1 * self.grad, h)

    def reciprocal(self) -> "Jet":
        v = self.value
        if v == 0:
            raise ZeroDivisionError("jet reciprocal at zero")
        return self._compose(1 / v, -1 / v**2, 2 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1 / complex(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, numbers.Integral):
            raise ExprError("jets support integer powers only")
        if n == 0:
            return Jet.constant(1.0, self.nvars, self.order)
        if n < 0:
            return (self ** (-n)).reciprocal()
        v = self.value
        return self._compose(v**n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2) if n >= 2 else 0.0)

    def exp(self) -> "Jet":
        e = cmath.exp(self.value)
        return self._compose(e, e, e)

    def log(self) -> "Jet":
        v = self.value
        return self._compose(cmath.log(v), 1 / v, -1 / v**2)

    def sqrt(self) -> "Jet":
        r = cmath.sqrt(self.value)
        return self._compose(r, 0.5 / r, -0.25 / (r * self.value))

    def conjugate(self) -> "Jet":
        return Jet(
            self.value.conjugate(),
            self.grad.conj(),
            None if self.hess is None else self.hess.conj(),
        )

    def truncate(self, order: int) -> "Jet":
        if order >= 2:
            return self
        return Jet(self.value, self.grad, None)

    def __repr__(self):
        return f"Jet(value={self.value!r}, order={self.order}, nvars={self.nvars})"


def _exp(x):
    if isinstance(x, Jet):
        return x.exp()
    return exp(x) if isinstance(x, Expr) else cmath.exp(x)


def _log(x):
    if isinstance(x, Jet):
        return x.log()
    return log(x) if isinstance(x, Expr) else cmath.log(x)


def _sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    return sqrt(x) if isinstance(x, Expr) else cmath.sqrt(x)


def _conj(x):
    if isinstance(x, Jet):
        return x.conjugate()
    return conj(x) if isinstance(x, Expr) else complex(x).conjugate()


# -------------------------------------------------------------------- expressions


def _wrap(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    if isinstance(x, numbers.Number):
        return Const(complex(x))
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


class Expr:
    """Immutable expression node.  Subclasses define ``_eval`` and ``_diff``."""

    __slots__ = ("_dcache", "__weakref__")

    def __init__(self):
        self._dcache = {}

    # operator sugar ---------------------------------------------------------
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    # evaluation ------------------------------------------------------------
    def diff(self, k: int) -> "Expr":
        """Symbolic partial derivative with respect to real coordinate ``k``."""
        d = self._dcache.get(k)
        if d is None:
            d = self._diff(k)
            self._dcache[k] = d
        return d

    def __call__(self, point) -> complex:
        return evaluate(self, list(point))

    def jet(self, point, order: int = 2) -> Jet:
        """Value, gradient and Hessian at ``point`` by jet propagation."""
        point = np.asarray(point, dtype=float)
        n = point.shape[0]
        env = [Jet.variable(point[i], i, n, order) for i in range(n)]
        return evaluate(self, env)

    def children(self) -> tuple:
        return ()

    def is_zero(self) -> bool:
        return False


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: complex):
        super().__init__()
        self.value = complex(value)

    def _eval(self, env, args):
        return self.value

    def _diff(self, k):
        return ZERO

    def is_zero(self):
        return self.value == 0

    def __repr__(self):
        return f"{self.value}"


class Var(Expr):
    __slots__ = ("index", "name")

    def __init__(self, index: int, name: str | None = None):
        super().__init__()
        self.index = int(index)
        self.name = name if name is not None else f"x{index}"

    def _eval(self, env, args):
        try:
            return env[self.index]
        except IndexError:
            raise ExprError(f"coordinate {self.name} (index {self.index}) not supplied") from None

    def _diff(self, k):
        return ONE if k == self.index else ZERO

    def __repr__(self):
        return self.name


class _Op(Expr):
    __slots__ = ("args",)
    tag = "?"

    def __init__(self, *args: Expr):
        super().__init__()
        self.args = args

    def children(self):
        return self.args

    def __repr__(self):
        return f"{self.tag}({', '.join(map(repr, self.args))})"


class Add(_Op):
    __slots__ = ()
    tag = "add"

    def _eval(self, env, args):
        return args[0] + args[1]

    def _diff(self, k):
        return add(self.args[0].diff(k), self.args[1].diff(k))


class Neg(_Op):
    __slots__ = ()
    tag = "neg"

    def _eval(self, env, args):
        return -args[0]

    def _diff(self, k):
        return neg(self.args[0].diff(k))


class Mul(_Op):
    __slots__ = ()
    tag = "mul"

    def _eval(self, env, args):
        return args[0] * args[1]

    def _diff(self, k):
        a, b = self.args
        return add(mul(a.diff(k), b), mul(a, b.diff(k)))


class Div(_Op):
    __slots__ = ()
    tag = "div"

    def _eval(self, env, args):
        return args[0] / args[1]

    def _diff(self, k):
        a, b = self.args
        da, db = a.diff(k), b.diff(k)
        return add(div(da, b), neg(div(mul(a, db), mul(b, b))))


class Pow(_Op):
    __slots__ = ("n",)
    tag = "pow"

    def __init__(self, a: Expr, n: int):
        super().__init__(a)
        self.n = int(n)

    def _eval(self, env, args):
        return args[0] ** self.n

    def _diff(self, k):
        a = self.args[0]
        return mul(mul(Const(self.n), power(a, self.n - 1)), a.diff(k))

    def __repr__(self):
        return f"pow({self.args[0]!r}, {self.n})"


class Exp(_Op):
    __slots__ = ()
    tag = "exp"

    def _eval(self, env, args):
        return _exp(args[0])

    def _diff(self, k):
        return mul(self, self.args[0].diff(k))


class Log(_Op):
    __slots__ = ()
    tag = "log"

    def _eval(self, env, args):
        return _log(args[0])

    def _diff(self, k):
        return div(self.args[0].diff(k), self.args[0])


class Sqrt(_Op):
    __slots__ = ()
    tag = "sqrt"

    def _eval(self, env, args):
        return _sqrt(args[0])

    def _diff(self, k):
        return div(self.args[0].diff(k), mul(Const(2), self))


class Conj(_Op):
    __slots__ = ()
    tag = "conj"

    def _eval(self, env, args):
        return _conj(args[0])

    def _diff(self, k):
        return conj(self.args[0].diff(k))


ZERO = Const(0)
ONE = Const(1)


# constructors with light constant folding; keeps symbolic derivatives small


def add(a: Expr, b: Expr) -> Expr:
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.args[0]
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if a.is_zero() or b.is_zero():
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Const) and a.value == 1:
        return b
    if isinstance(b, Const) and b.value == 1:
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 0:
            raise ExprError("division by constant zero")
        return mul(a, Const(1 / b.value))
    if a.is_zero():
        return ZERO
    return Div(a, b)


def power(a: Expr, n) -> Expr:
    if not isinstance(n, numbers.Integral):
        raise ExprError("only integer powers are supported; use sqrt/exp/log")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value**n)
    return Pow(a, n)


def const(value) -> Expr:
    return Const(complex(value))


def var(index: int, name: str | None = None) -> Expr:
    return Var(index, name)


def coords(names: Sequence[str]) -> list[Expr]:
    return [Var(i, n) for i, n in enumerate(names)]


def exp(a) -> Expr:
    a = _wrap(a)
    return Const(cmath.exp(a.value)) if isinstance(a, Const) else Exp(a)


def log(a) -> Expr:
    a = _wrap(a)
    return Const(cmath.log(a.value)) if isinstance(a, Const) else Log(a)


def sqrt(a) -> Expr:
    a = _wrap(a)
    return Const(cmath.sqrt(a.value)) if isinstance(a, Const) else Sqrt(a)


def conj(a) -> Expr:
    a = _wrap(a)
    if isinstance(a, Const):
        return Const(a.value.conjugate())
    if isinstance(a, Conj):
        return a.args[0]
    return Conj(a)


def re(a) -> Expr:
    a = _wrap(a)
    return (a + conj(a)) * 0.5


def im(a) -> Expr:
    a = _wrap(a)
    return (a - conj(a)) * (-0.5j)


def abs2(a) -> Expr:
    a = _wrap(a)
    return a * conj(a)


def evaluate(expr: Expr, env: Sequence[Any]):
    """Evaluate an expression DAG once per distinct node.

    ``env[i]`` is the value bound to coordinate ``i``: a number, or a
    :class:`Jet` when derivatives are wanted.  Shared subexpressions are
    evaluated once.
    """
    memo: dict[int, Any] = {}
    stack = [(expr, False)]
    while stack:
        node, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        kids = node.children()
        if ready or not kids:
            args = [memo[id(c)] for c in kids]
            memo[key] = node._eval(env, args)
        else:
            stack.append((node, True))
            for c in kids:
                if id(c) not in memo:
                    stack.append((c, False))
    return memo[id(expr)]


def substitute(expr: Expr, replacements: Sequence[Expr]) -> Expr:
    """Replace coordinate ``i`` by ``replacements[i]`` (composition of maps)."""
    return _wrap(evaluate(expr, [_wrap(r) for r in replacements]))


def evaluate_many(exprs: Sequence[Expr], env: Sequence[Any]) -> list:
    """Evaluate several expressions sharing one memo table."""
    root = _Tuple(*exprs)
    return evaluate(root, env)


class _Tuple(_Op):
    __slots__ = ()
    tag = "tuple"

    def _eval(self, env, args):
        return list(args)

    def _diff(self, k):  # pragma: no cover - internal container
        raise ExprError("tuple node cannot be differentiated")


# -------------------------------------------------------------- serialization

_UNARY = {"neg": neg, "exp": exp, "log": log, "sqrt": sqrt, "conj": conj, "re": re, "im": im, "abs2": abs2}
_BINARY = {"add": add, "sub": lambda a, b: add(a, neg(b)), "mul": mul, "div": div}


def to_json(expr: Expr) -> Any:
    """Serialize an expression tree to nested JSON lists.

    Grammar: a number (real) or ``["c", re, im]`` is a constant, a string is a
    coordinate name, and ``[op, arg, ...]`` applies ``op``.
    """
    if isinstance(expr, Const):
        v = expr.value
        return v.real if v.imag == 0 else ["c", v.real, v.imag]
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Pow):
        return ["pow", to_json(expr.args[0]), expr.n]
    if isinstance(expr, _Op) and not isinstance(expr, _Tuple):
        return [expr.tag, *(to_json(a) for a in expr.args)]
    raise ExprError(f"cannot serialize {expr!r}")


def from_json(data: Any, names: Sequence[str]) -> Expr:
    """Parse the JSON grammar of :func:`to_json` against coordinate ``names``."""
    index = {n: i for i, n in enumerate(names)}

    def parse(node):
        if isinstance(node, bool):
            raise ExprError("booleans are not expressions")
        if isinstance(node, numbers.Number):
            return Const(complex(node))
        if isinstance(node, str):
            if node in index:
                return Var(index[node], node)
            if node == "i":
                return Const(1j)
            raise ExprError(f"unknown coordinate {node!r}")
        if isinstance(node, list) and node:
            op, *rest = node
            if op == "c":
                if len(rest) != 2:
                    raise ExprError("constant needs [\"c\", re, im]")
                return Const(complex(rest[0], rest[1]))
            if op == "pow":
                if len(rest) != 2 or not isinstance(rest[1], int):
                    raise ExprError("pow needs an integer exponent")
                return power(parse(rest[0]), rest[1])
            args = [parse(a) for a in rest]
            if op in _UNARY:
                if len(args) != 1:
                    raise ExprError(f"{op} takes one argument")
                return _UNARY[op](args[0])
            if op in _BINARY:
                if len(args) < 2:
                    raise ExprError(f"{op} takes at least two arguments")
                out = args[0]
                for a in args[1:]:
                    out = _BINARY[op](out, a)
                return out
            raise ExprError(f"unknown operator {op!r}")
        raise ExprError(f"malformed expression node {node!r}")

    return parse(data)
