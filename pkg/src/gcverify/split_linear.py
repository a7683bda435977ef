"""Pointwise linear algebra of split-signature pairing spaces.

Subspaces are stored as orthonormal column bases with respect to the
auxiliary Hermitian product of the ambient coordinates; the split pairing
itself is only used to test isotropy and to build complements.  Pairings are
bilinear (never conjugated), so the same code serves the complexified fibres
that carry generalized complex eigenbundles.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RANK_RTOL = 1e-8
ANGLE_TOL = 1e-9

__all__ = [
    "LinearAlgebraError",
    "SplitSpace",
    "Subspace",
    "DiracRelation",
    "Reduction",
    "standard_pairing",
    "orth",
    "null_space",
    "numerical_rank",
    "principal_angle",
    "subspaces_equal",
    "orthogonal_complement",
    "reduce",
    "compose",
    "relation_kernels",
    "induced_isometry",
    "identity_relation",
    "graph_relation",
    "is_brane_invariant",
]


class LinearAlgebraError(ValueError):
    pass


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def orth(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of ``M``."""
    M = np.atleast_2d(np.asarray(M))
    n = M.shape[0]
    if M.shape[1] == 0:
        return np.zeros((n, 0), dtype=M.dtype)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((n, 0), dtype=u.dtype)
    r = int(np.sum(s > rtol * s[0]))
    return u[:, :r]


def null_space(M: np.ndarray, rtol: float = RANK_RTOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of ``{x : M x = 0}``.

    Singular values below ``rtol * scale`` count as zero; ``scale`` defaults
    to the largest singular value of ``M``.
    """
    M = np.atleast_2d(np.asarray(M))
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=M.dtype if np.iscomplexobj(M) else float)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    ref = scale if scale is not None else (s[0] if s.size else 0.0)
    if ref == 0:
        return np.eye(n, dtype=vh.dtype)
    r = int(np.sum(s > rtol * ref))
    return vh[r:].conj().T


def standard_pairing(m: int, dtype=float) -> np.ndarray:
    """Pairing on V + V* with <X+xi, Y+eta> = (xi(Y) + eta(X)) / 2."""
    eye = np.eye(m, dtype=dtype)
    zero = np.zeros((m, m), dtype=dtype)
    return 0.5 * np.block([[zero, eye], [eye, zero]])


@dataclass(frozen=True, eq=False)
class SplitSpace:
    """A finite-dimensional space with a symmetric nondegenerate pairing."""

    pairing: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.pairing)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise LinearAlgebraError("pairing must be a square matrix")
        n = G.shape[0]
        if n % 2:
            raise LinearAlgebraError(f"dimension must be even, got {n}")
        if n == 0:
            # the point: reductions by Lagrangians and the target of V -> 0
            object.__setattr__(self, "pairing", G.reshape(0, 0))
            return
        scale = max(1.0, np.abs(G).max())
        if np.abs(G - G.T).max() > 1e-12 * scale:
            raise LinearAlgebraError("pairing is not symmetric")
        s = np.linalg.svd(G, compute_uv=False)
        if s[-1] <= RANK_RTOL * s[0]:
            raise LinearAlgebraError("pairing is degenerate")
        if not np.iscomplexobj(G) or np.abs(G.imag).max() == 0:
            ev = np.linalg.eigvalsh(np.real(G))
            pos = int(np.sum(ev > 0))
            if pos != n // 2:
                raise LinearAlgebraError(f"real pairing is not split: {pos} positive of {n}")
        object.__setattr__(self, "pairing", G)

    @property
    def dim(self) -> int:
        return self.pairing.shape[0]

    @classmethod
    def standard(cls, m: int) -> "SplitSpace":
        return cls(standard_pairing(m))

    def pair(self, u: np.ndarray, v: np.ndarray):
        return u.T @ self.pairing @ v

    def opposite(self) -> "SplitSpace":
        return SplitSpace(-self.pairing)

    def product(self, other: "SplitSpace") -> "SplitSpace":
        a, b = self.dim, other.dim
        dtype = np.result_type(self.pairing, other.pairing)
        G = np.zeros((a + b, a + b), dtype=dtype)
        G[:a, :a] = self.pairing
        G[a:, a:] = other.pairing
        return SplitSpace(G)

    def whole(self) -> "Subspace":
        return Subspace(self, np.eye(self.dim))

    def zero(self) -> "Subspace":
        return Subspace(self, np.zeros((self.dim, 0)))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span of ``basis`` inside ``ambient``; stored orthonormalized."""

    ambient: SplitSpace
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis)
        if B.ndim == 1:
            B = B[:, None]
        if B.shape[0] != self.ambient.dim:
            raise LinearAlgebraError(
                f"basis vectors have length {B.shape[0]}, ambient dimension is {self.ambient.dim}"
            )
        object.__setattr__(self, "basis", orth(B))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def gram(self, other: "Subspace | None" = None) -> np.ndarray:
        other = self if other is None else other
        return self.basis.T @ self.ambient.pairing @ other.basis

    def isotropy_defect(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.abs(self.gram()).max())

    def is_isotropic(self, tol: float = ANGLE_TOL) -> bool:
        return self.isotropy_defect() < tol

    def is_maximal_isotropic(self, tol: float = ANGLE_TOL) -> bool:
        return self.dim * 2 == self.ambient.dim and self.is_isotropic(tol)

    def conjugate(self) -> "Subspace":
        return Subspace(self.ambient, self.basis.conj())

    def contains(self, v: np.ndarray, tol: float = ANGLE_TOL) -> bool:
        v = np.asarray(v)
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        r = v - self.basis @ (self.basis.conj().T @ v)
        return np.linalg.norm(r) / nv < tol

    def intersection(self, other: "Subspace") -> "Subspace":
        A, B = self.basis, other.basis
        if A.shape[1] == 0 or B.shape[1] == 0:
            return self.ambient.zero() if A.shape[1] == 0 else other.ambient.zero()
        N = null_space(np.hstack([A, -B]), scale=1.0)
        return Subspace(self.ambient, A @ N[: A.shape[1]])

    def sum(self, other: "Subspace") -> "Subspace":
        return Subspace(self.ambient, np.hstack([self.basis, other.basis]))

    def apply(self, M: np.ndarray) -> "Subspace":
        return Subspace(self.ambient, M @ self.basis)


def principal_angle(S: Subspace, T: Subspace) -> float:
    """Sine of the largest principal angle; ``inf`` when dimensions differ."""
    if S.dim != T.dim:
        return float("inf")
    if S.dim == 0:
        return 0.0
    R = T.basis - S.basis @ (S.basis.conj().T @ T.basis)
    return float(np.linalg.norm(R, 2))


def subspaces_equal(S: Subspace, T: Subspace, tol: float = ANGLE_TOL) -> bool:
    return principal_angle(S, T) < tol


def orthogonal_complement(S: Subspace) -> Subspace:
    """``{v : <v, s> = 0 for all s in S}`` with respect to the split pairing."""
    V = S.ambient
    if S.dim == 0:
        return V.whole()
    M = S.basis.T @ V.pairing
    N = null_space(M, scale=1.0)
    out = Subspace(V, N)
    if out.dim != V.dim - S.dim:
        raise LinearAlgebraError("complement has wrong dimension; pairing degenerate on this subspace")
    return out


@dataclass(frozen=True, eq=False)
class Reduction:
    """The quotient ``K^perp / K`` with a chosen lift of its basis into ``K^perp``."""

    space: SplitSpace
    kernel: Subspace
    coisotropic: Subspace
    lift: np.ndarray = field(repr=False)
    _solve: np.ndarray = field(repr=False)

    def project(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of the class of ``v`` (which must lie in ``K^perp``)."""
        v = np.asarray(v)
        if not self.coisotropic.contains(v.reshape(len(v), -1)[:, 0] if v.ndim > 1 else v, tol=1e-7):
            raise LinearAlgebraError("vector does not lie in the coisotropic subspace")
        return (self._solve @ v)[: self.lift.shape[1]]

    def project_many(self, V: np.ndarray) -> np.ndarray:
        return (self._solve @ V)[: self.lift.shape[1]]


def reduce(V: SplitSpace, K: Subspace, tol: float = ANGLE_TOL) -> Reduction:
    """Reduce ``V`` by an isotropic subspace ``K`` to ``K^perp / K``."""
    if K.ambient is not V and K.ambient.dim != V.dim:
        raise LinearAlgebraError("subspace lives in a different space")
    if not K.is_isotropic(tol):
        raise LinearAlgebraError(f"K is not isotropic (defect {K.isotropy_defect():.3e})")
    Kp = orthogonal_complement(K)
    if K.dim == 0:
        Q = Kp.basis
    else:
        # Hermitian complement of K inside K^perp
        coeffs = null_space(K.basis.conj().T @ Kp.basis, scale=1.0)
        Q = orth(Kp.basis @ coeffs)
    frame = np.hstack([Q, K.basis])
    solve = np.linalg.pinv(frame)
    induced = Q.T @ V.pairing @ Q
    induced = 0.5 * (induced + induced.T)
    return Reduction(SplitSpace(induced), K, Kp, Q, solve)


@dataclass(frozen=True, eq=False)
class DiracRelation:
    """Maximal isotropic ``graph`` inside ``target x opposite(source)``.

    Graph vectors are stacked as ``[w; v]`` with ``w`` in the target and ``v``
    in the source.
    """

    source: SplitSpace
    target: SplitSpace
    graph: Subspace

    def __post_init__(self):
        amb = self.graph.ambient
        if amb.dim != self.source.dim + self.target.dim:
            raise LinearAlgebraError("graph lives in a space of the wrong dimension")
        expect = self.target.product(self.source.opposite()).pairing
        if amb.pairing.shape != expect.shape or np.abs(amb.pairing - expect).max() > 1e-12:
            raise LinearAlgebraError("graph ambient pairing must be target x opposite(source)")
        if not self.graph.is_maximal_isotropic(1e-8):
            raise LinearAlgebraError(
                f"graph is not maximal isotropic (dim {self.graph.dim}, defect {self.graph.isotropy_defect():.3e})"
            )

    @classmethod
    def from_vectors(cls, source: SplitSpace, target: SplitSpace, vectors: np.ndarray) -> "DiracRelation":
        amb = target.product(source.opposite())
        return cls(source, target, Subspace(amb, vectors))

    @property
    def target_part(self) -> np.ndarray:
        return self.graph.basis[: self.target.dim]

    @property
    def source_part(self) -> np.ndarray:
        return self.graph.basis[self.target.dim :]


def identity_relation(V: SplitSpace) -> DiracRelation:
    n = V.dim
    return DiracRelation.from_vectors(V, V, np.vstack([np.eye(n), np.eye(n)]))


def graph_relation(M: np.ndarray, V: SplitSpace, W: SplitSpace | None = None) -> DiracRelation:
    """Graph ``{(Mv, v)}`` of a linear isometry ``M : V -> W``."""
    W = V if W is None else W
    return DiracRelation.from_vectors(V, W, np.vstack([M, np.eye(V.dim)]))


def compose(D2: DiracRelation, D1: DiracRelation) -> DiracRelation:
    """``D2 o D1`` as relations: ``{(w, u) : (v, u) in D1, (w, v) in D2}``."""
    V = D1.target
    if D2.source.dim != V.dim or np.abs(D2.source.pairing - V.pairing).max() > 1e-12:
        raise LinearAlgebraError("relations are not composable: middle spaces differ")
    v1, u1 = D1.target_part, D1.source_part
    w2, v2 = D2.target_part, D2.source_part
    N = null_space(np.hstack([v1, -v2]), scale=1.0)
    a, b = N[: v1.shape[1]], N[v1.shape[1] :]
    vectors = np.vstack([w2 @ b, u1 @ a])
    amb = D2.target.product(D1.source.opposite())
    # the composite always has half the ambient dimension; near non-transverse
    # configurations the spanning set is ill-conditioned, so keep the dominant
    # directions and remove the amplified round-off from the isotropy
    k = amb.dim // 2
    Q = np.linalg.svd(vectors, full_matrices=False)[0][:, :k]
    Q = _isotropize(Q, amb.pairing)
    return DiracRelation(D1.source, D2.target, Subspace(amb, Q))


def _isotropize(Q: np.ndarray, G: np.ndarray, steps: int = 2) -> np.ndarray:
    """Newton steps towards the nearest isotropic span: solve ``Q^T G dQ = -A/2``."""
    for _ in range(steps):
        A = Q.T @ G @ Q
        if np.abs(A).max() < 1e-15:
            break
        Q = Q - 0.5 * np.linalg.pinv(Q.T @ G) @ A
        Q = orth(Q)
    return Q


def relation_kernels(D: DiracRelation) -> tuple[Subspace, Subspace]:
    """Left kernel ``{v : v ~ 0}`` in the source and right kernel ``{w : 0 ~ w}``."""
    w, v = D.target_part, D.source_part
    if D.graph.dim == 0:
        return D.source.zero(), D.target.zero()
    # a zero-dimensional side has an empty row block, whose null space is everything
    left = Subspace(D.source, v @ null_space(w, scale=1.0))
    right = Subspace(D.target, w @ null_space(v, scale=1.0))
    return left, right


def induced_isometry(D: DiracRelation) -> tuple[np.ndarray, Reduction, Reduction]:
    """Matrix of the map ``source // left -> target // right`` induced by ``D``."""
    left, right = relation_kernels(D)
    red_s = reduce(D.source, left)
    red_t = reduce(D.target, right)
    cv = red_s.project_many(D.source_part)
    cw = red_t.project_many(D.target_part)
    M = cw @ np.linalg.pinv(cv)
    return M, red_s, red_t


def is_brane_invariant(L: Subspace, J, tol: float = ANGLE_TOL) -> bool:
    """True iff the maximal isotropic ``L`` is preserved by the structure ``J``."""
    M = getattr(J, "matrix", J)
    if M.shape != (L.ambient.dim, L.ambient.dim):
        raise LinearAlgebraError("structure and subspace live in different spaces")
    if not L.is_maximal_isotropic(1e-8):
        raise LinearAlgebraError("L is not maximal isotropic")
    return subspaces_equal(L.apply(M), L, tol)
