"""Generalized complex structures on a single fibre ``V + V*`` as matrices.

Block convention: vectors first, covectors second.  A 2-form ``B`` is stored
as its component matrix ``B_ij = B(e_i, e_j)`` and acts on vectors by
``X -> B(., X)``, so the B-transform is ``[[1, 0], [B, 1]]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .split_linear import RANK_RTOL, SplitSpace, Subspace, null_space, numerical_rank, standard_pairing

TOL = 1e-9

__all__ = [
    "GCError",
    "GCStructure",
    "GaugeField",
    "HolPoissonPoint",
    "GaugeResidual",
    "Classification",
    "b_matrix",
    "beta_matrix",
    "gl_matrix",
    "gc_from_complex",
    "gc_from_symplectic",
    "gc_from_hol_poisson",
    "gc_from_eigenbundle",
    "underlying_poisson",
    "apply_b_transform",
    "check_gauge_condition",
    "classify",
    "parity_product",
    "eigenbundle",
    "standard_complex",
    "standard_symplectic",
]


class GCError(ValueError):
    pass


def _scale(M: np.ndarray) -> float:
    return max(1.0, float(np.abs(M).max()))


def _maxabs(M) -> float:
    M = np.asarray(M)
    return float(np.abs(M).max()) if M.size else 0.0


@dataclass(frozen=True, eq=False)
class GCStructure:
    """``matrix`` squares to ``-1`` and preserves the standard pairing.

    The tolerance is relative to ``max(1, max|J|)**2`` so that large but
    valid structures (for example after a big B-transform) are accepted.
    """

    matrix: np.ndarray
    tol: float = TOL

    def __post_init__(self):
        J = np.asarray(self.matrix, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] % 2:
            raise GCError(f"expected a 2m x 2m matrix, got shape {J.shape}")
        n = J.shape[0]
        s = _scale(J) ** 2
        sq = _maxabs(J @ J + np.eye(n))
        if sq > self.tol * s:
            raise GCError(f"J^2 = -1 fails (residual {sq:.3e})")
        G = standard_pairing(n // 2)
        orth = _maxabs(J.T @ G @ J - G)
        if orth > self.tol * s:
            raise GCError(f"orthogonality fails (residual {orth:.3e})")
        object.__setattr__(self, "matrix", J)

    @property
    def m(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def blocks(self):
        m = self.m
        J = self.matrix
        return J[:m, :m], J[:m, m:], J[m:, :m], J[m:, m:]


@dataclass(frozen=True, eq=False)
class GaugeField:
    B: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise GCError("gauge field must be square")
        if _maxabs(B + B.T) > 1e-12 * _scale(B):
            raise GCError("gauge field is not skew")
        object.__setattr__(self, "B", B)

    @property
    def m(self) -> int:
        return self.B.shape[0]


@dataclass(frozen=True, eq=False)
class HolPoissonPoint:
    """Complex structure ``I`` and real Poisson tensor ``P`` with ``IP = PI^T``.

    ``IP = PI^T`` is exactly the condition that ``pi = IP + iP`` is skew and of
    type (2,0) for ``I``.
    """

    I: np.ndarray
    P: np.ndarray
    tol: float = TOL

    def __post_init__(self):
        I = np.asarray(self.I, dtype=float)
        P = np.asarray(self.P, dtype=float)
        m = I.shape[0]
        if I.shape != (m, m) or P.shape != (m, m):
            raise GCError("I and P must be square of the same size")
        s = _scale(I) ** 2
        r = _maxabs(I @ I + np.eye(m))
        if r > self.tol * s:
            raise GCError(f"I^2 = -1 fails (residual {r:.3e})")
        r = _maxabs(P + P.T)
        if r > self.tol * _scale(P):
            raise GCError(f"P is not skew (residual {r:.3e})")
        r = _maxabs(I @ P - P @ I.T)
        if r > self.tol * _scale(I) * _scale(P):
            raise GCError(f"IP = P I^T fails (residual {r:.3e})")
        object.__setattr__(self, "I", I)
        object.__setattr__(self, "P", P)

    @property
    def pi(self) -> np.ndarray:
        return self.I @ self.P + 1j * self.P


def b_matrix(B: np.ndarray) -> np.ndarray:
    m = B.shape[0]
    E = np.eye(2 * m, dtype=np.result_type(B, float))
    E[m:, :m] = B
    return E


def beta_matrix(beta: np.ndarray) -> np.ndarray:
    m = beta.shape[0]
    E = np.eye(2 * m, dtype=np.result_type(beta, float))
    E[:m, m:] = beta
    return E


def gl_matrix(A: np.ndarray) -> np.ndarray:
    """Action of ``A in GL(V)`` on ``V + V*``: ``X -> AX``, ``xi -> A^{-T} xi``."""
    m = A.shape[0]
    E = np.zeros((2 * m, 2 * m), dtype=np.result_type(A, float))
    E[:m, :m] = A
    E[m:, m:] = np.linalg.inv(A).T
    return E


def _check_complex(I: np.ndarray) -> np.ndarray:
    I = np.asarray(I, dtype=float)
    m = I.shape[0]
    r = _maxabs(I @ I + np.eye(m))
    if r > TOL * _scale(I) ** 2:
        raise GCError(f"I^2 = -1 fails (residual {r:.3e})")
    return I


def gc_from_complex(I) -> GCStructure:
    I = _check_complex(I)
    m = I.shape[0]
    Z = np.zeros((m, m))
    return GCStructure(np.block([[-I, Z], [Z, I.T]]))


def gc_from_symplectic(omega) -> GCStructure:
    w = np.asarray(omega, dtype=float)
    m = w.shape[0]
    if _maxabs(w + w.T) > 1e-12 * _scale(w):
        raise GCError("omega is not skew")
    if numerical_rank(w) < m:
        raise GCError("omega is degenerate")
    Z = np.zeros((m, m))
    return GCStructure(np.block([[Z, np.linalg.inv(w)], [-w, Z]]))


def gc_from_hol_poisson(I, P=None) -> GCStructure:
    if isinstance(I, HolPoissonPoint):
        pt = I
    else:
        pt = HolPoissonPoint(I, P)
    m = pt.I.shape[0]
    return GCStructure(np.block([[-pt.I, pt.P], [np.zeros((m, m)), pt.I.T]]))


def underlying_poisson(J: GCStructure) -> np.ndarray:
    return J.blocks[1].copy()


def apply_b_transform(J: GCStructure, B) -> GCStructure:
    B = B.B if isinstance(B, GaugeField) else np.asarray(B, dtype=float)
    return GCStructure(b_matrix(B) @ J.matrix @ b_matrix(-B), tol=J.tol)


@dataclass(frozen=True)
class GaugeResidual:
    modification: float
    pb2: float

    @property
    def max(self) -> float:
        return max(self.modification, self.pb2)


def check_gauge_condition(I, P, B) -> GaugeResidual:
    """Residuals of ``BI + I^T B + BPB = 0`` and ``J^T B + B I = 0`` with ``J = I + PB``.

    Both are max-abs entrywise norms.
    """
    I, P, B = (np.asarray(a) for a in (I, P, B))
    if not (I.shape == P.shape == B.shape):
        raise GCError("I, P, B must have matching shapes")
    J = I + P @ B
    return GaugeResidual(_maxabs(B @ I + I.T @ B + B @ P @ B), _maxabs(J.T @ B + B @ I))


@dataclass(frozen=True)
class Classification:
    poisson_rank: int
    type: int
    parity_ok: bool

    def as_dict(self) -> dict:
        return {"poisson_rank": self.poisson_rank, "type": self.type, "parity_ok": self.parity_ok}


def classify(J: GCStructure) -> Classification:
    # rank threshold relative to the whole structure, so a round-off P counts as zero
    sv = np.linalg.svd(underlying_poisson(J), compute_uv=False)
    r = int(np.sum(sv > RANK_RTOL * max(1.0, np.linalg.norm(J.matrix, 2))))
    return Classification(r, (J.m - r) // 2, r % 4 == 0)


def _embed(J: np.ndarray, m: int, K: np.ndarray, k: int) -> np.ndarray:
    # block sum on (V + V') + (V* + V'*)
    n = m + k
    out = np.zeros((2 * n, 2 * n))
    vi = list(range(m)) + list(range(n, n + m))
    wi = list(range(m, n)) + list(range(n + m, 2 * n))
    out[np.ix_(vi, vi)] = J
    out[np.ix_(wi, wi)] = K
    return out


def parity_product(J: GCStructure) -> GCStructure:
    """Product with the standard symplectic plane."""
    K = gc_from_symplectic(standard_symplectic(2)).matrix
    return GCStructure(_embed(J.matrix, J.m, K, 2))


def direct_sum(J: GCStructure, K: GCStructure) -> GCStructure:
    return GCStructure(_embed(J.matrix, J.m, K.matrix, K.m))


def eigenbundle(J: GCStructure) -> Subspace:
    """The ``+i`` eigenspace of ``J`` on the complexified fibre."""
    n = 2 * J.m
    N = null_space(J.matrix - 1j * np.eye(n), scale=1.0 + np.linalg.norm(J.matrix, 2))
    if N.shape[1] != J.m:
        raise GCError(f"+i eigenspace has dimension {N.shape[1]}, expected {J.m}")
    return Subspace(SplitSpace(standard_pairing(J.m, complex)), N)


def gc_from_eigenbundle(L: Subspace) -> GCStructure:
    """Real structure acting as ``+i`` on ``L`` and ``-i`` on its conjugate."""
    A = np.hstack([L.basis, L.basis.conj()])
    n = A.shape[0]
    if A.shape[1] != n or numerical_rank(A) < n:
        raise GCError("L + conj(L) does not span the fibre")
    D = np.diag([1j] * L.dim + [-1j] * L.dim)
    J = A @ D @ np.linalg.inv(A)
    if _maxabs(J.imag) > 1e-8 * _scale(J):
        raise GCError("reconstructed structure is not real")
    return GCStructure(J.real)


def standard_symplectic(m: int) -> np.ndarray:
    w = np.zeros((m, m))
    for k in range(0, m - 1, 2):
        w[k, k + 1], w[k + 1, k] = 1.0, -1.0
    return w


def standard_complex(m: int) -> np.ndarray:
    """Complex structure with ``z_k = x_{2k} + i x_{2k+1}`` holomorphic, ``dz o I = i dz``."""
    I = np.zeros((m, m))
    for k in range(0, m - 1, 2):
        I[k + 1, k], I[k, k + 1] = 1.0, -1.0
    return I
