"""Differential calculus on real coordinate charts with jet-exact derivatives.

Form fields carry :class:`~gcverify.expr.Expr` coefficients, so they can be
differentiated either symbolically (``FormField.d``) or numerically through
jets (:func:`exterior_d`).  Both routes are exact up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as E
from .errors import DomainError, InconclusiveError
from .expr import Expr, Jet
from .spinor import MixedForm, _wedge_sign, clifford_image_matrix

EPS_DOM = 1e-2
MAX_TRIES = 10_000

__all__ = [
    "Chart",
    "FormField",
    "SectionField",
    "JetMap",
    "exterior_d",
    "exterior_dd",
    "twisted_d",
    "in_clifford_image",
    "pullback",
    "pullback_matrix",
    "jacobian_det",
    "wirtinger_jacobian_det",
    "courant_bracket",
    "courant_bracket_field",
    "pairing_field",
    "MatrixField",
    "complex_structure_matrix",
    "holomorphic_structure",
    "poisson_of_form",
    "real_form_matrix",
    "box_chart",
]


# ------------------------------------------------------------------ charts


@dataclass(frozen=True, eq=False)
class Chart:
    """A coordinate domain with a seeded rejection sampler.

    ``proposal(rng)`` draws a candidate point; ``predicate(p)`` decides
    membership (singular loci are excluded there, with margin).  When no
    proposal is given, candidates are uniform in the box ``[lower, upper]``.
    """

    names: tuple
    predicate: Callable[[np.ndarray], bool] | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    proposal: Callable[[np.random.Generator], np.ndarray] | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if self.proposal is None and (self.lower is None or self.upper is None):
            raise ValueError("a chart needs either a proposal or a bounding box")

    @property
    def m(self) -> int:
        return len(self.names)

    def coords(self) -> list[Expr]:
        return E.coords(self.names)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.m,) or not np.all(np.isfinite(p)):
            return False
        if self.lower is not None and (np.any(p < self.lower) or np.any(p > self.upper)):
            return False
        return True if self.predicate is None else bool(self.predicate(p))

    def require(self, p):
        if not self.contains(p):
            raise DomainError(f"point {np.asarray(p).tolist()} outside chart {self.label or self.names}")

    def _propose(self, rng):
        if self.proposal is not None:
            return np.asarray(self.proposal(rng), dtype=float)
        return rng.uniform(self.lower, self.upper)

    def sample(self, rng: np.random.Generator, n: int, extra: Callable | None = None,
               minimum: int | None = None, max_tries: int = MAX_TRIES) -> np.ndarray:
        """Draw ``n`` points satisfying the predicate (and ``extra`` if given).

        Fewer than ``minimum`` (default ``n``) accepted points after
        ``max_tries`` proposals raises :class:`InconclusiveError`.
        """
        need = n if minimum is None else minimum
        out = []
        tries = 0
        while len(out) < n and tries < max_tries:
            tries += 1
            p = self._propose(rng)
            if self.contains(p) and (extra is None or extra(p)):
                out.append(p)
        if len(out) < need:
            raise InconclusiveError(
                f"chart {self.label or self.names}: {len(out)} admissible points after {tries} tries"
            )
        return np.array(out).reshape(len(out), self.m)


def box_chart(names, lower, upper, predicate=None, label="") -> Chart:
    return Chart(tuple(names), predicate, np.asarray(lower, float), np.asarray(upper, float), None, label)


# ------------------------------------------------------------------ forms


def _mask_indices(mask: int) -> tuple:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class FormField:
    """Mixed-degree form on ``R^m`` with expression coefficients.

    ``terms`` maps a bitmask multi-index to its coefficient expression.
    """

    __slots__ = ("m", "terms")

    def __init__(self, m: int, terms: dict | None = None):
        self.m = m
        self.terms = {}
        for k, v in (terms or {}).items():
            v = E._wrap(v)
            if not v.is_zero():
                self.terms[int(k)] = v

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, m: int) -> "FormField":
        return cls(m)

    @classmethod
    def scalar(cls, m: int, f) -> "FormField":
        return cls(m, {0: f})

    @classmethod
    def basis(cls, m: int, indices, coeff=1.0) -> "FormField":
        from .spinor import _sort_sign, mask_of

        mask = mask_of(indices)
        if mask < 0:
            return cls(m)
        return cls(m, {mask: E._wrap(coeff) * _sort_sign(indices)})

    @classmethod
    def one_form(cls, coeffs: Sequence) -> "FormField":
        return cls(len(coeffs), {1 << k: c for k, c in enumerate(coeffs)})

    @classmethod
    def from_matrix(cls, M) -> "FormField":
        """2-form ``sum_{i<j} M_ij dx^i ^ dx^j`` from a (skew) matrix of expressions."""
        m = len(M)
        return cls(m, {(1 << i) | (1 << j): M[i][j] for i in range(m) for j in range(i + 1, m)})

    @classmethod
    def differential(cls, f, m: int) -> "FormField":
        f = E._wrap(f)
        return cls(m, {1 << k: f.diff(k) for k in range(m)})

    # algebra ----------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, FormField) or other.m != self.m:
            raise ValueError("form fields on different charts")

    def __add__(self, other):
        if not isinstance(other, FormField):
            other = FormField.scalar(self.m, other)
        self._check(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = E.add(t[k], v) if k in t else v
        return FormField(self.m, t)

    __radd__ = __add__

    def __neg__(self):
        return FormField(self.m, {k: E.neg(v) for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, FormField) else -E._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FormField):
            return self.wedge(other)
        f = E._wrap(other)
        return FormField(self.m, {k: E.mul(f, v) for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return self.wedge(other)

    def wedge(self, other: "FormField") -> "FormField":
        self._check(other)
        t: dict = {}
        for a, fa in self.terms.items():
            for b, fb in other.terms.items():
                if a & b:
                    continue
                term = E.mul(fa, fb)
                if _wedge_sign(a, b) < 0:
                    term = E.neg(term)
                t[a | b] = E.add(t[a | b], term) if (a | b) in t else term
        return FormField(self.m, t)

    def conj(self) -> "FormField":
        return FormField(self.m, {k: E.conj(v) for k, v in self.terms.items()})

    def re(self) -> "FormField":
        return FormField(self.m, {k: E.re(v) for k, v in self.terms.items()})

    def im(self) -> "FormField":
        return FormField(self.m, {k: E.im(v) for k, v in self.terms.items()})

    def component(self, k: int) -> "FormField":
        return FormField(self.m, {a: v for a, v in self.terms.items() if bin(a).count("1") == k})

    def degrees(self) -> set:
        return {bin(a).count("1") for a in self.terms}

    def d(self) -> "FormField":
        """Symbolic exterior derivative."""
        t: dict = {}
        for a, f in self.terms.items():
            for j in range(self.m):
                if a >> j & 1:
                    continue
                term = f.diff(j)
                if term.is_zero():
                    continue
                if _wedge_sign(1 << j, a) < 0:
                    term = E.neg(term)
                k = a | (1 << j)
                t[k] = E.add(t[k], term) if k in t else term
        return FormField(self.m, t)

    def substitute(self, outputs: Sequence[Expr], source_m: int) -> "FormField":
        """Symbolic pullback along the map ``y = outputs(x)`` from ``R^source_m``."""
        if len(outputs) != self.m:
            raise ValueError("map has the wrong number of outputs")
        outputs = [E._wrap(o) for o in outputs]
        dys = [FormField.differential(o, source_m) for o in outputs]
        out = FormField(source_m)
        for a, f in self.terms.items():
            term = FormField.scalar(source_m, E.substitute(f, outputs))
            for i in _mask_indices(a):
                term = term.wedge(dys[i])
            out = out + term
        return out

    # evaluation -------------------------------------------------------------
    def coefficient_values(self, p) -> dict:
        keys = list(self.terms)
        vals = E.evaluate_many([self.terms[k] for k in keys], [float(x) for x in p])
        return dict(zip(keys, vals))

    def at(self, p) -> MixedForm:
        out = MixedForm(self.m)
        for k, v in self.coefficient_values(p).items():
            out.coeffs[k] = v
        return out

    def matrix_at(self, p) -> np.ndarray:
        """Component matrix of the degree-2 part at ``p``."""
        M = np.zeros((self.m, self.m), dtype=complex)
        keys = [k for k in self.terms if bin(k).count("1") == 2]
        vals = E.evaluate_many([self.terms[k] for k in keys], [float(x) for x in p])
        for k, v in zip(keys, vals):
            i, j = _mask_indices(k)
            M[i, j], M[j, i] = v, -v
        return M

    def jets_at(self, p, order: int = 1) -> dict:
        p = np.asarray(p, dtype=float)
        n = p.shape[0]
        env = [Jet.variable(p[i], i, n, order) for i in range(n)]
        keys = list(self.terms)
        vals = E.evaluate_many([self.terms[k] for k in keys], env)
        vals = [v if isinstance(v, Jet) else Jet.constant(v, n, order) for v in vals]
        return dict(zip(keys, vals))

    def __call__(self, p) -> MixedForm:
        return self.at(p)

    def __repr__(self):
        return f"FormField(m={self.m}, terms={len(self.terms)})"


def _require(chart, p):
    if chart is not None:
        chart.require(p)


def exterior_d(F: FormField, p, chart: Chart | None = None) -> MixedForm:
    """``dF`` at ``p`` from first-order jets of the coefficients."""
    _require(chart, p)
    out = MixedForm(F.m)
    for a, jet in F.jets_at(p, order=1).items():
        for j in range(F.m):
            if a >> j & 1:
                continue
            out.coeffs[a | (1 << j)] += _wedge_sign(1 << j, a) * jet.grad[j]
    return out


def exterior_dd(F: FormField, p, chart: Chart | None = None) -> MixedForm:
    """``d(dF)`` at ``p`` from second-order jets; vanishes up to rounding."""
    _require(chart, p)
    out = MixedForm(F.m)
    for a, jet in F.jets_at(p, order=2).items():
        for j in range(F.m):
            if a >> j & 1:
                continue
            s1 = _wedge_sign(1 << j, a)
            aj = a | (1 << j)
            for k in range(F.m):
                if aj >> k & 1:
                    continue
                out.coeffs[aj | (1 << k)] += s1 * _wedge_sign(1 << k, aj) * jet.hess[k, j]
    return out


def twisted_d(F: FormField, H: FormField, p, chart: Chart | None = None) -> MixedForm:
    if H.degrees() - {3}:
        raise ValueError("twisting form must have degree 3")
    return exterior_d(F, p, chart) + (H.at(p) ^ F.at(p))


def in_clifford_image(rho_deriv: MixedForm, rho: MixedForm) -> float:
    """Least-squares residual of ``rho_deriv = v . rho + lambda rho``."""
    if rho.norm() == 0:
        raise ValueError("rho must be nonzero")
    A = np.hstack([clifford_image_matrix(rho), rho.coeffs[:, None]])
    b = rho_deriv.coeffs
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(np.abs(A @ x - b).max())


# ------------------------------------------------------------------ maps


@dataclass(frozen=True, eq=False)
class JetMap:
    """A map ``R^source_m -> R^len(outputs)`` given by expressions."""

    source_m: int
    outputs: tuple
    source: Chart | None = None
    target: Chart | None = None

    def __post_init__(self):
        object.__setattr__(self, "outputs", tuple(E._wrap(o) for o in self.outputs))

    @property
    def target_m(self) -> int:
        return len(self.outputs)

    def __call__(self, p) -> np.ndarray:
        vals = E.evaluate_many(list(self.outputs), [float(x) for x in p])
        return np.array(vals)

    def real(self, p) -> np.ndarray:
        v = self(p)
        if np.abs(v.imag).max(initial=0.0) > 1e-9 * max(1.0, np.abs(v).max(initial=0.0)):
            raise DomainError("map output is not real at this point")
        return v.real

    def jacobian(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        n = p.shape[0]
        env = [Jet.variable(p[i], i, n, 1) for i in range(n)]
        jets = E.evaluate_many(list(self.outputs), env)
        rows = []
        for j in jets:
            rows.append(j.grad if isinstance(j, Jet) else np.zeros(n, dtype=complex))
        return np.array(rows).reshape(len(jets), n)

    def compose(self, inner: "JetMap") -> "JetMap":
        """``self o inner``."""
        return JetMap(inner.source_m, tuple(E.substitute(o, list(inner.outputs)) for o in self.outputs),
                      inner.source, self.target)

    def pull(self, F: FormField) -> FormField:
        return F.substitute(list(self.outputs), self.source_m)


def _check_map_domains(phi: JetMap, p, q):
    if phi.source is not None:
        phi.source.require(p)
    if phi.target is not None:
        phi.target.require(np.real(q))


def pullback(phi: JetMap, F: FormField, p) -> MixedForm:
    """``(phi^* F)(p)`` via the Jacobian at ``p`` (numeric route)."""
    q = phi(p)
    _check_map_domains(phi, p, q)
    Jm = phi.jacobian(p)
    vals = F.coefficient_values(np.real(q))
    images = [MixedForm.one_form(Jm[i]) for i in range(F.m)]
    out = MixedForm(phi.source_m)
    for a, v in vals.items():
        term = MixedForm.scalar(phi.source_m, v)
        for i in _mask_indices(a):
            term = term ^ images[i]
        out = out + term
    return out


def pullback_matrix(phi: JetMap, F: FormField, p) -> np.ndarray:
    """Component matrix of the pulled-back 2-form part, ``J^T M J``."""
    q = phi(p)
    _check_map_domains(phi, p, q)
    Jm = phi.jacobian(p)
    return Jm.T @ F.matrix_at(np.real(q)) @ Jm


def jacobian_det(phi: JetMap, p) -> complex:
    Jm = phi.jacobian(p)
    if Jm.shape[0] != Jm.shape[1]:
        raise ValueError("Jacobian is not square")
    return complex(np.linalg.det(Jm))


def wirtinger_jacobian_det(outputs: Sequence[Expr], p, pairs: Sequence[tuple]) -> complex:
    """Determinant of ``d(w, conj w) / d(x, conj x)`` for complex outputs ``w``.

    ``pairs[k] = (a, b)`` says ``x_k = p[a] + i p[b]``.
    """
    phi = JetMap(len(p), tuple(outputs))
    Jr = phi.jacobian(p)
    rows = []
    for grad in Jr:
        for g in (grad, grad.conj()):
            row = []
            for a, b in pairs:
                row.append(0.5 * (g[a] - 1j * g[b]))
                row.append(0.5 * (g[a] + 1j * g[b]))
            rows.append(row)
    return complex(np.linalg.det(np.array(rows)))


# --------------------------------------------------------------- sections


@dataclass(frozen=True, eq=False)
class SectionField:
    """Section ``X + xi`` of ``TM + T*M`` with expression components."""

    X: tuple
    xi: tuple

    def __post_init__(self):
        X = tuple(E._wrap(a) for a in self.X)
        xi = tuple(E._wrap(a) for a in self.xi)
        if len(X) != len(xi):
            raise ValueError("vector and covector parts differ in length")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "xi", xi)

    @property
    def m(self) -> int:
        return len(self.X)

    def at(self, p) -> np.ndarray:
        return np.array(E.evaluate_many(list(self.X + self.xi), [float(x) for x in p]))

    def scale(self, f) -> "SectionField":
        f = E._wrap(f)
        return SectionField(tuple(E.mul(f, a) for a in self.X), tuple(E.mul(f, a) for a in self.xi))

    def __add__(self, other: "SectionField") -> "SectionField":
        return SectionField(tuple(E.add(a, b) for a, b in zip(self.X, other.X)),
                            tuple(E.add(a, b) for a, b in zip(self.xi, other.xi)))

    def __sub__(self, other: "SectionField") -> "SectionField":
        return self + other.scale(-1.0)


def pairing_field(u: SectionField, v: SectionField) -> Expr:
    out = E.ZERO
    for i in range(u.m):
        out = out + u.xi[i] * v.X[i] + v.xi[i] * u.X[i]
    return out * 0.5


def _h_components(H: FormField) -> dict:
    return {a: f for a, f in H.terms.items() if bin(a).count("1") == 3}


def _h_tensor(vals: dict, m: int) -> np.ndarray:
    T = np.zeros((m, m, m), dtype=complex)
    for a, v in vals.items():
        i, j, k = _mask_indices(a)
        for (x, y, z), s in (((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
                             ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1)):
            T[x, y, z] = s * v
    return T


def courant_bracket(u: SectionField, v: SectionField, H: FormField | None, p) -> np.ndarray:
    """``[X,Y] + L_X eta - i_Y d xi + i_Y i_X H`` at ``p`` (numeric jets).

    Returned as a length ``2m`` array, vector part first.
    """
    m = u.m
    p = np.asarray(p, dtype=float)
    env = [Jet.variable(p[i], i, m, 1) for i in range(m)]
    jets = E.evaluate_many(list(u.X + u.xi + v.X + v.xi), env)

    def split(js):
        val = np.array([j.value if isinstance(j, Jet) else j for j in js])
        grad = np.array([j.grad if isinstance(j, Jet) else np.zeros(m) for j in js]).reshape(len(js), m)
        return val, grad

    X, dX = split(jets[:m])
    xi, dxi = split(jets[m : 2 * m])
    Y, dY = split(jets[2 * m : 3 * m])
    eta, deta = split(jets[3 * m :])
    vec = dY @ X - dX @ Y
    cov = deta @ X + dX.T @ eta - (dxi @ Y - dxi.T @ Y)
    if H is not None:
        T = _h_tensor(H.coefficient_values(p) if _h_components(H) else {}, m)
        cov = cov + np.einsum("ijk,i,j->k", T, X, Y)
    return np.concatenate([vec, cov])


def courant_bracket_field(u: SectionField, v: SectionField, H: FormField | None = None) -> SectionField:
    """Symbolic version of :func:`courant_bracket`."""
    m = u.m
    X, xi, Y, eta = u.X, u.xi, v.X, v.xi
    vec = []
    for j in range(m):
        s = E.ZERO
        for i in range(m):
            s = s + X[i] * Y[j].diff(i) - Y[i] * X[j].diff(i)
        vec.append(s)
    cov = []
    hc = _h_components(H) if H is not None else {}
    from .spinor import _sort_sign, mask_of

    for k in range(m):
        s = E.ZERO
        for i in range(m):
            s = s + X[i] * eta[k].diff(i) + eta[i] * X[i].diff(k)
            s = s - Y[i] * (xi[k].diff(i) - xi[i].diff(k))
        for i in range(m):
            for j in range(m):
                mask = mask_of((i, j, k))
                if mask < 0 or mask not in hc:
                    continue
                s = s + hc[mask] * _sort_sign((i, j, k)) * X[i] * Y[j]
        cov.append(s)
    return SectionField(tuple(vec), tuple(cov))


# ------------------------------------------------------------ matrix fields


@dataclass(frozen=True, eq=False)
class MatrixField:
    """A pointwise matrix-valued field evaluated numerically on demand."""

    func: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def at(self, p) -> np.ndarray:
        return np.asarray(self.func(np.asarray(p, dtype=float)))

    def __call__(self, p) -> np.ndarray:
        return self.at(p)

    @classmethod
    def constant(cls, M, label: str = "") -> "MatrixField":
        M = np.array(M)
        return cls(lambda p: M, label)


def complex_structure_matrix(Jc: np.ndarray) -> np.ndarray:
    """Real ``I`` with ``df o I = i df`` for the rows ``df`` of the complex Jacobian ``Jc``."""
    k = Jc.shape[0]
    A = np.vstack([Jc, Jc.conj()])
    D = np.diag([1j] * k + [-1j] * k)
    I = np.linalg.solve(A, D @ A)
    return I.real


def holomorphic_structure(functions: Sequence[Expr], label: str = "") -> MatrixField:
    """Complex structure making the given complex-valued functions holomorphic."""
    phi = JetMap(0, tuple(functions))

    def f(p):
        return complex_structure_matrix(phi.jacobian(p))

    return MatrixField(f, label)


def poisson_of_form(F: FormField, part: str = "im", label: str = "") -> MatrixField:
    """``(Im F)^{-1}`` (or of the real part) as a matrix field."""
    pick = np.imag if part == "im" else np.real

    def f(p):
        return np.linalg.inv(pick(F.matrix_at(p)))

    return MatrixField(f, label)


def real_form_matrix(F: FormField, label: str = "") -> MatrixField:
    return MatrixField(lambda p: F.matrix_at(p).real, label)
