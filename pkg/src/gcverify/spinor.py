"""Exterior algebra, Clifford action and pure spinors at a single point.

A :class:`MixedForm` stores all ``2**m`` coefficients densely.  Multi-index
``I = (i1 < ... < ik)`` is encoded as the bitmask with bits ``i1..ik`` set and
stands for ``e^{i1} ^ ... ^ e^{ik}``.

The Clifford action is ``(X + xi) . rho = i_X rho + xi ^ rho``.  With the
pairing ``<X+xi, X+xi> = xi(X)`` this gives ``v.v.rho = <v,v> rho``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .split_linear import SplitSpace, Subspace, null_space, standard_pairing

MAX_DIM = 8

__all__ = [
    "SpinorError",
    "MixedForm",
    "CliffordVector",
    "wedge",
    "interior",
    "clifford",
    "clifford_matrix",
    "annihilator",
    "is_pure",
    "real_rank_zero",
    "mukai_pairing",
    "two_form",
    "two_form_matrix",
    "form_exp",
    "symplectic_generator",
    "hol_poisson_generator",
    "b_transform_spinor",
    "beta_transform_spinor",
    "hol_poisson_spinor",
    "clifford_image_matrix",
    "gl_transform_spinor",
    "bivector_interior",
    "collinearity_defect",
    "projectively_equal",
]


class SpinorError(ValueError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def degree_of(mask: int) -> int:
    return _popcount(mask)


def mask_of(indices) -> int:
    out = 0
    for i in indices:
        if out >> i & 1:
            return -1
        out |= 1 << i
    return out


def _sort_sign(indices) -> int:
    # sign of the permutation sorting ``indices``
    idx = list(indices)
    s = 1
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] > idx[b]:
                s = -s
    return s


@lru_cache(maxsize=None)
def _degrees(m: int) -> np.ndarray:
    return np.array([_popcount(k) for k in range(1 << m)])


def _wedge_sign(a: int, b: int) -> int:
    # e^A ^ e^B = sign * e^{A|B} for disjoint masks
    n = 0
    bb = b
    while bb:
        low = bb & -bb
        n += _popcount(a & ~((low << 1) - 1))
        bb ^= low
    return -1 if n & 1 else 1


@lru_cache(maxsize=None)
def _eps_iota(m: int):
    """Dense matrices of ``e^k ^`` and ``i_{d_k}`` on the 2**m coefficients."""
    N = 1 << m
    eps = np.zeros((m, N, N))
    iota = np.zeros((m, N, N))
    for k in range(m):
        bit = 1 << k
        for I in range(N):
            below = _popcount(I & (bit - 1))
            s = -1.0 if below & 1 else 1.0
            if I & bit:
                iota[k, I ^ bit, I] = s
            else:
                eps[k, I | bit, I] = s
    eps.setflags(write=False)
    iota.setflags(write=False)
    return eps, iota


class MixedForm:
    """Element of the complex exterior algebra of ``(R^m)*``."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs=None):
        if not 0 <= m <= MAX_DIM:
            raise SpinorError(f"dimension {m} outside 0..{MAX_DIM}")
        self.m = m
        if coeffs is None:
            self.coeffs = np.zeros(1 << m, dtype=complex)
        else:
            c = np.asarray(coeffs, dtype=complex)
            if c.shape != (1 << m,):
                raise SpinorError(f"expected {1 << m} coefficients, got {c.shape}")
            self.coeffs = c

    # construction -----------------------------------------------------------
    @classmethod
    def scalar(cls, m: int, value=1.0) -> "MixedForm":
        f = cls(m)
        f.coeffs[0] = value
        return f

    @classmethod
    def basis(cls, m: int, indices, value=1.0) -> "MixedForm":
        """``value * e^{i1} ^ ... ^ e^{ik}`` (indices in any order, 0-based)."""
        f = cls(m)
        mask = mask_of(indices)
        if mask >= 0:
            f.coeffs[mask] = value * _sort_sign(indices)
        return f

    @classmethod
    def from_terms(cls, m: int, terms: dict) -> "MixedForm":
        f = cls(m)
        for idx, v in terms.items():
            f = f + cls.basis(m, idx, v)
        return f

    @classmethod
    def one_form(cls, xi) -> "MixedForm":
        xi = np.asarray(xi, dtype=complex)
        m = xi.shape[0]
        f = cls(m)
        for k in range(m):
            f.coeffs[1 << k] = xi[k]
        return f

    @classmethod
    def top(cls, m: int, value=1.0) -> "MixedForm":
        return cls.basis(m, range(m), value)

    # access -----------------------------------------------------------------
    def __getitem__(self, indices) -> complex:
        if isinstance(indices, int):
            indices = (indices,)
        mask = mask_of(indices)
        return 0j if mask < 0 else self.coeffs[mask] * _sort_sign(indices)

    def component(self, k: int) -> "MixedForm":
        c = np.where(_degrees(self.m) == k, self.coeffs, 0)
        return MixedForm(self.m, c)

    def terms(self, tol: float = 0.0) -> dict:
        out = {}
        for mask in np.nonzero(np.abs(self.coeffs) > tol)[0]:
            out[tuple(i for i in range(self.m) if mask >> i & 1)] = complex(self.coeffs[mask])
        return out

    @property
    def top_coefficient(self) -> complex:
        return complex(self.coeffs[-1])

    def norm(self) -> float:
        return float(np.abs(self.coeffs).max()) if self.coeffs.size else 0.0

    def degrees(self) -> set:
        return {int(d) for d in _degrees(self.m)[np.nonzero(self.coeffs)[0]]}

    # algebra ----------------------------------------------------------------
    def _same(self, other: "MixedForm"):
        if not isinstance(other, MixedForm):
            raise TypeError("expected a MixedForm")
        if other.m != self.m:
            raise SpinorError(f"dimension mismatch {self.m} vs {other.m}")

    def __add__(self, other):
        if not isinstance(other, MixedForm):
            return self + MixedForm.scalar(self.m, other)
        self._same(other)
        return MixedForm(self.m, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, MixedForm):
            return self - MixedForm.scalar(self.m, other)
        self._same(other)
        return MixedForm(self.m, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return MixedForm(self.m, -self.coeffs)

    def __mul__(self, c):
        if isinstance(c, MixedForm):
            return wedge(self, c)
        return MixedForm(self.m, self.coeffs * complex(c))

    def __rmul__(self, c):
        return MixedForm(self.m, self.coeffs * complex(c))

    def __xor__(self, other):
        return wedge(self, other)

    def conj(self) -> "MixedForm":
        return MixedForm(self.m, self.coeffs.conj())

    def real(self) -> "MixedForm":
        return MixedForm(self.m, self.coeffs.real.astype(complex))

    def imag(self) -> "MixedForm":
        return MixedForm(self.m, self.coeffs.imag.astype(complex))

    def __repr__(self):
        t = self.terms(1e-14)
        return f"MixedForm(m={self.m}, {t})"


@dataclass(frozen=True, eq=False)
class CliffordVector:
    X: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=complex)
        xi = np.asarray(self.xi, dtype=complex)
        if X.shape != xi.shape or X.ndim != 1:
            raise SpinorError("vector and covector parts must be m-vectors")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "xi", xi)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @classmethod
    def from_array(cls, v) -> "CliffordVector":
        v = np.asarray(v)
        m = v.shape[0] // 2
        return cls(v[:m], v[m:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.X, self.xi])

    def pair(self, other: "CliffordVector") -> complex:
        return 0.5 * (self.xi @ other.X + other.xi @ self.X)


def wedge(a: MixedForm, b: MixedForm) -> MixedForm:
    a._same(b)
    out = np.zeros_like(a.coeffs)
    ia = np.nonzero(a.coeffs)[0]
    ib = np.nonzero(b.coeffs)[0]
    for A in ia:
        ca = a.coeffs[A]
        A = int(A)
        for B in ib:
            B = int(B)
            if A & B:
                continue
            out[A | B] += _wedge_sign(A, B) * ca * b.coeffs[B]
    return MixedForm(a.m, out)


def interior(X, a: MixedForm) -> MixedForm:
    X = np.asarray(X, dtype=complex)
    if X.shape != (a.m,):
        raise SpinorError("vector has wrong dimension")
    _, iota = _eps_iota(a.m)
    return MixedForm(a.m, np.tensordot(X, iota, axes=1) @ a.coeffs)


def clifford_matrix(v, m: int) -> np.ndarray:
    v = v.as_array() if isinstance(v, CliffordVector) else np.asarray(v, dtype=complex)
    eps, iota = _eps_iota(m)
    return np.tensordot(v[:m], iota, axes=1) + np.tensordot(v[m:], eps, axes=1)


def clifford(v, a: MixedForm) -> MixedForm:
    if isinstance(v, CliffordVector) and v.m != a.m:
        raise SpinorError("Clifford vector has wrong dimension")
    return MixedForm(a.m, clifford_matrix(v, a.m) @ a.coeffs)


def clifford_image_matrix(rho: MixedForm) -> np.ndarray:
    """Columns ``e_k . rho`` for the standard basis of ``V + V*``."""
    eps, iota = _eps_iota(rho.m)
    cols = [iota[k] @ rho.coeffs for k in range(rho.m)] + [eps[k] @ rho.coeffs for k in range(rho.m)]
    return np.stack(cols, axis=1)


def annihilator(rho: MixedForm, rtol: float = 1e-8) -> Subspace:
    if rho.norm() == 0:
        raise SpinorError("annihilator of the zero form")
    M = clifford_image_matrix(rho)
    N = null_space(M, rtol=rtol, scale=rho.norm())
    return Subspace(SplitSpace(standard_pairing(rho.m, complex)), N)


def is_pure(rho: MixedForm) -> bool:
    return annihilator(rho).dim == rho.m


def real_rank_zero(rho: MixedForm) -> bool:
    L = annihilator(rho)
    return L.intersection(L.conjugate()).dim == 0


def mukai_sign(m: int) -> np.ndarray:
    k = _degrees(m)
    return np.where((k * (k - 1) // 2) % 2 == 0, 1.0, -1.0)


def mukai_pairing(a: MixedForm, b: MixedForm) -> complex:
    a._same(b)
    sa = MixedForm(a.m, mukai_sign(a.m) * a.coeffs)
    return wedge(sa, b).top_coefficient


def two_form(M) -> MixedForm:
    """``sum_{i<j} M_ij e^i ^ e^j`` from a skew component matrix."""
    M = np.asarray(M)
    m = M.shape[0]
    f = MixedForm(m)
    for i in range(m):
        for j in range(i + 1, m):
            f.coeffs[(1 << i) | (1 << j)] = M[i, j]
    return f


def two_form_matrix(f: MixedForm) -> np.ndarray:
    m = f.m
    M = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            c = f.coeffs[(1 << i) | (1 << j)]
            M[i, j], M[j, i] = c, -c
    return M


def form_exp(f: MixedForm) -> MixedForm:
    """Exponential of an even form (finite series)."""
    out = MixedForm.scalar(f.m, 1.0)
    term = MixedForm.scalar(f.m, 1.0)
    for k in range(1, f.m // 2 + 2):
        term = wedge(term, f) * (1.0 / k)
        if term.norm() == 0:
            break
        out = out + term
    return out


def _as_form(B, m: int | None = None) -> MixedForm:
    if isinstance(B, MixedForm):
        return B
    return two_form(B)


def symplectic_generator(omega) -> MixedForm:
    """``exp(i omega)``."""
    return form_exp(_as_form(omega) * 1j)


def b_transform_spinor(B, rho: MixedForm) -> MixedForm:
    return wedge(form_exp(_as_form(B)), rho)


def bivector_interior(pi, a: MixedForm) -> MixedForm:
    """``i_pi a = sum_{i<j} pi^{ij} i_{d_j} i_{d_i} a``."""
    pi = np.asarray(pi)
    _, iota = _eps_iota(a.m)
    out = np.zeros_like(a.coeffs)
    for i in range(a.m):
        for j in range(i + 1, a.m):
            if pi[i, j] != 0:
                out += pi[i, j] * (iota[j] @ (iota[i] @ a.coeffs))
    return MixedForm(a.m, out)


def hol_poisson_generator(pi, zeta: MixedForm) -> MixedForm:
    """``exp(pi) . zeta = zeta + i_pi zeta + i_pi i_pi zeta / 2 + ...``"""
    out = zeta
    term = zeta
    for k in range(1, zeta.m // 2 + 2):
        term = bivector_interior(pi, term) * (1.0 / k)
        if term.norm() == 0:
            break
        out = out + term
    return out


def beta_transform_spinor(beta, rho: MixedForm) -> MixedForm:
    """Spinor counterpart of the matrix ``[[1, beta], [0, 1]]``."""
    return hol_poisson_generator(-np.asarray(beta), rho)


def hol_poisson_spinor(I, P, zeta: MixedForm) -> MixedForm:
    """Generator whose annihilator is the ``+i`` eigenbundle of ``[[-I, P], [0, I^T]]``.

    ``zeta`` must generate the canonical line of ``I``.  With the pairing
    normalization used here the exponent is ``(IP + iP) / 4``.
    """
    I = np.asarray(I)
    P = np.asarray(P)
    return hol_poisson_generator((I @ P + 1j * P) / 4, zeta)


def gl_transform_spinor(A, rho: MixedForm) -> MixedForm:
    """Pullback of ``rho`` by ``A^{-1}``; covariant with ``X -> AX, xi -> A^{-T} xi``."""
    A = np.asarray(A)
    Ainv = np.linalg.inv(A)
    m = rho.m
    # image of e^k under (A^{-1})^* is sum_j Ainv[k, j] e^j
    images = [MixedForm.one_form(Ainv[k]) for k in range(m)]
    out = MixedForm(m)
    for mask in np.nonzero(rho.coeffs)[0]:
        term = MixedForm.scalar(m, rho.coeffs[mask])
        for k in range(m):
            if mask >> k & 1:
                term = wedge(term, images[k])
        out = out + term
    return out


def collinearity_defect(a: MixedForm, b: MixedForm) -> float:
    """Largest 2x2 minor of the pair after normalizing both to unit max-norm."""
    a._same(b)
    na, nb = a.norm(), b.norm()
    if na == 0 or nb == 0:
        return 0.0 if na == nb else float("inf")
    x, y = a.coeffs / na, b.coeffs / nb
    minors = np.outer(x, y) - np.outer(y, x)
    return float(np.abs(minors).max())


def projectively_equal(a: MixedForm, b: MixedForm, tol: float = 1e-9) -> bool:
    return collinearity_defect(a, b) < tol
