"""Seeded generators of random test objects shared by suites and tests."""
from __future__ import annotations

import numpy as np
from scipy.stats import ortho_group

from . import expr as E
from .calculus import FormField, SectionField
from .gc_linear import (
    GCStructure,
    b_matrix,
    beta_matrix,
    direct_sum,
    gc_from_complex,
    gc_from_symplectic,
    gl_matrix,
    standard_complex,
    standard_symplectic,
)
from .spinor import (
    MixedForm,
    b_transform_spinor,
    beta_transform_spinor,
    gl_transform_spinor,
    symplectic_generator,
    wedge,
)
from .split_linear import DiracRelation, SplitSpace, Subspace, orthogonal_complement, reduce, standard_pairing

__all__ = [
    "random_skew",
    "random_invertible",
    "random_split_space",
    "random_lagrangian",
    "random_isotropic",
    "random_dirac",
    "standard_gc",
    "random_gc",
    "random_polynomial",
    "random_section",
    "random_closed_three_form",
]


def random_skew(m: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    A = rng.normal(size=(m, m)) * scale
    return A - A.T


def random_invertible(m: int, rng: np.random.Generator, cond_max: float = 50.0) -> np.ndarray:
    """Gaussian matrix redrawn until its condition number is moderate."""
    while True:
        A = np.eye(m) + 0.5 * rng.normal(size=(m, m))
        if np.linalg.cond(A) < cond_max:
            return A


def _orthogonal(k: int, rng) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0))
    if k == 1:
        return np.array([[rng.choice([-1.0, 1.0])]])
    return ortho_group.rvs(k, random_state=rng)


def random_split_space(m: int, rng: np.random.Generator, standard: bool = False) -> SplitSpace:
    G = standard_pairing(m)
    if standard:
        return SplitSpace(G)
    A = random_invertible(2 * m, rng)
    return SplitSpace(A.T @ G @ A)


def _signature_frame(G: np.ndarray) -> np.ndarray:
    """``S`` with ``S^T G S = diag(+1 ... +1, -1 ... -1)``."""
    ev, Q = np.linalg.eigh(G)
    order = np.argsort(-ev)
    ev, Q = ev[order], Q[:, order]
    return Q / np.sqrt(np.abs(ev))


def random_lagrangian(V: SplitSpace, rng: np.random.Generator) -> Subspace:
    """Haar-random maximal isotropic subspace: the graph of an orthogonal map."""
    k = V.dim // 2
    S = _signature_frame(np.real(V.pairing))
    O = _orthogonal(k, rng)
    return Subspace(V, S @ np.vstack([np.eye(k), O]))


def random_isotropic(V: SplitSpace, k: int, rng: np.random.Generator) -> Subspace:
    L = random_lagrangian(V, rng)
    C = rng.normal(size=(L.dim, k))
    return Subspace(V, L.basis @ C)


def _frame_isometry(Gs: np.ndarray, Gt: np.ndarray, rng) -> np.ndarray:
    """Random isometry between two split forms of equal dimension."""
    Ss, St = _signature_frame(Gs), _signature_frame(Gt)
    k = Gs.shape[0] // 2
    O = np.zeros((2 * k, 2 * k))
    O[:k, :k] = _orthogonal(k, rng)
    O[k:, k:] = _orthogonal(k, rng)
    if k:
        # hyperbolic rotation mixing one positive and one negative direction
        t = rng.normal()
        R = np.eye(2 * k)
        R[0, 0] = R[k, k] = np.cosh(t)
        R[0, k] = R[k, 0] = np.sinh(t)
        O = O @ R
    return St @ O @ np.linalg.inv(Ss)


def random_dirac(V: SplitSpace, W: SplitSpace, rng: np.random.Generator, left: int | None = None) -> DiracRelation:
    """Random Dirac relation ``V -> W`` with a left kernel of dimension ``left``.

    Every relation has this shape: isotropic kernels ``K_V``, ``K_W`` and an
    isometry between the reductions.
    """
    mv, mw = V.dim // 2, W.dim // 2
    lo = max(0, mv - mw)
    if left is None:
        left = int(rng.integers(lo, mv + 1))
    right = mw - mv + left
    if not (0 <= left <= mv and 0 <= right <= mw):
        raise ValueError("kernel dimension incompatible with the spaces")
    KV = random_isotropic(V, left, rng)
    KW = random_isotropic(W, right, rng)
    rv, rw = reduce(V, KV), reduce(W, KW)
    cols = []
    r = rv.lift.shape[1]
    if r:
        M = _frame_isometry(rv.space.pairing.real, rw.space.pairing.real, rng)
        cols.append(np.vstack([rw.lift @ M, rv.lift]))
    if left:
        cols.append(np.vstack([np.zeros((W.dim, left)), KV.basis]))
    if right:
        cols.append(np.vstack([KW.basis, np.zeros((V.dim, right))]))
    return DiracRelation.from_vectors(V, W, np.hstack(cols))


# ---------------------------------------------------------------- structures


def standard_gc(m: int, k: int) -> tuple[GCStructure, MixedForm]:
    """Complex on the first ``2k`` coordinates, symplectic on the rest, with its spinor."""
    parts = []
    rho = MixedForm.scalar(m)
    if k:
        parts.append(gc_from_complex(standard_complex(2 * k)))
        for j in range(k):
            dz = np.zeros(m, dtype=complex)
            dz[2 * j], dz[2 * j + 1] = 1.0, 1j
            rho = wedge(rho, MixedForm.one_form(dz))
    if 2 * k < m:
        parts.append(gc_from_symplectic(standard_symplectic(m - 2 * k)))
        w = np.zeros((m, m))
        w[2 * k :, 2 * k :] = standard_symplectic(m - 2 * k)
        rho = wedge(rho, symplectic_generator(w))
    J = parts[0] if len(parts) == 1 else direct_sum(parts[0], parts[1])
    return J, rho


def random_gc(m: int, rng: np.random.Generator, k: int | None = None, scale: float = 0.5):
    """A standard structure moved by random ``GL``, ``B`` and ``beta`` transforms.

    Returns ``(J, rho)`` with ``rho`` the matching pure spinor.
    """
    if k is None:
        k = int(rng.integers(0, m // 2 + 1))
    J, rho = standard_gc(m, k)
    A = random_invertible(m, rng)
    B = random_skew(m, rng, scale)
    beta = random_skew(m, rng, scale)
    g = b_matrix(B) @ beta_matrix(beta) @ gl_matrix(A)
    rho = b_transform_spinor(B, beta_transform_spinor(beta, gl_transform_spinor(A, rho)))
    Jm = g @ J.matrix @ np.linalg.inv(g)
    return GCStructure(Jm), rho


# ---------------------------------------------------------------- fields


def random_polynomial(m: int, rng: np.random.Generator, degree: int = 2, scale: float = 1.0) -> E.Expr:
    """Dense random real polynomial of total degree ``<= degree``."""
    xs = [E.var(i) for i in range(m)]
    out = E.const(rng.normal() * scale)
    monos = [E.const(1.0)]
    for _ in range(degree):
        monos = [a * x for a in monos for x in xs]
        for mono in monos:
            out = out + mono * float(rng.normal() * scale)
    return out


def random_section(m: int, rng: np.random.Generator, degree: int = 2) -> SectionField:
    X = tuple(random_polynomial(m, rng, degree, 0.5) for _ in range(m))
    xi = tuple(random_polynomial(m, rng, degree, 0.5) for _ in range(m))
    return SectionField(X, xi)


def random_closed_three_form(m: int, rng: np.random.Generator, degree: int = 2) -> FormField:
    """``d`` of a random polynomial 2-form."""
    beta = FormField.zero(m)
    for i in range(m):
        for j in range(i + 1, m):
            beta = beta + FormField.basis(m, (i, j), random_polynomial(m, rng, degree, 0.5))
    return beta.d()
