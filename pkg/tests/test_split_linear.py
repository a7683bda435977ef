import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from gcverify.examples import standard_hol_symplectic
from gcverify.gc_linear import b_matrix, gc_from_complex, gc_from_symplectic, standard_complex
from gcverify.randomgen import random_dirac, random_isotropic, random_lagrangian, random_skew, random_split_space
from gcverify.split_linear import (
    DiracRelation,
    LinearAlgebraError,
    SplitSpace,
    Subspace,
    compose,
    graph_relation,
    identity_relation,
    induced_isometry,
    is_brane_invariant,
    orthogonal_complement,
    principal_angle,
    reduce,
    relation_kernels,
    standard_pairing,
    subspaces_equal,
)

seeds = st.integers(0, 2**32 - 1)


def test_standard_pairing_is_half_of_evaluation():
    G = standard_pairing(2)
    X, xi = np.array([1.0, 2.0]), np.array([3.0, -1.0])
    Y, eta = np.array([0.5, 1.0]), np.array([2.0, 4.0])
    u, v = np.concatenate([X, xi]), np.concatenate([Y, eta])
    assert u @ G @ v == pytest.approx(0.5 * (xi @ Y + eta @ X))


def test_split_space_rejects_degenerate_and_odd():
    with pytest.raises(LinearAlgebraError):
        SplitSpace(np.diag([1.0, 0.0]))
    with pytest.raises(LinearAlgebraError):
        SplitSpace(np.eye(3))


def test_split_space_rejects_definite_signature():
    with pytest.raises(LinearAlgebraError):
        SplitSpace(np.eye(2))


def test_complement_of_zero_is_whole_space():
    V = SplitSpace.standard(1)
    S = orthogonal_complement(V.zero())
    assert S.dim == 2


def test_complement_of_null_line_is_itself():
    # <e1, e2> = 1, <ei, ei> = 0
    V = SplitSpace(np.array([[0.0, 1.0], [1.0, 0.0]]))
    S = Subspace(V, np.array([[1.0], [0.0]]))
    assert subspaces_equal(orthogonal_complement(S), S)


@given(seeds)
def test_complement_of_random_three_dimensional_subspace(seed):
    rng = np.random.default_rng(seed)
    V = random_split_space(4, rng)
    S = Subspace(V, rng.normal(size=(8, 3)))
    Sp = orthogonal_complement(S)
    assert Sp.dim == 5
    assert np.abs(S.basis.T @ V.pairing @ Sp.basis).max() < 1e-9
    # oracle: scipy null space of the linear conditions
    N = sla.null_space((V.pairing @ S.basis).T)
    assert subspaces_equal(Sp, Subspace(V, N), 1e-8)


@given(seeds, st.integers(0, 6))
def test_double_complement(seed, k):
    rng = np.random.default_rng(seed)
    V = random_split_space(3, rng)
    S = Subspace(V, rng.normal(size=(6, k)))
    assert principal_angle(orthogonal_complement(orthogonal_complement(S)), S) < 1e-9


def test_reduce_by_zero_is_identity():
    V = SplitSpace.standard(2)
    red = reduce(V, V.zero())
    assert red.space.dim == 4
    v = np.arange(4.0)
    w = red.lift @ red.project(v)
    assert np.allclose(w, v)


def test_reduce_standard_plane_by_line():
    V = SplitSpace.standard(2)
    K = Subspace(V, np.array([[1.0], [0.0], [0.0], [0.0]]))
    red = reduce(V, K)
    assert red.space.dim == 2
    ev = np.linalg.eigvalsh(red.space.pairing)
    assert ev[0] < 0 < ev[1]
    # explicit basis: K^perp = span{e1, e2, f2}, quotient spanned by e2, f2
    assert np.allclose(red.lift[0], 0.0)
    assert np.allclose(red.lift[2], 0.0)


def test_reduce_rejects_non_isotropic():
    V = SplitSpace.standard(1)
    K = Subspace(V, np.array([[1.0], [1.0]]))
    with pytest.raises(LinearAlgebraError):
        reduce(V, K)


@given(seeds, st.integers(1, 3))
def test_induced_pairing_independent_of_lift(seed, k):
    rng = np.random.default_rng(seed)
    V = random_split_space(4, rng)
    K = random_isotropic(V, k, rng)
    red = reduce(V, K)
    assert red.space.dim == 8 - 2 * k
    assert np.linalg.svd(red.space.pairing, compute_uv=False)[-1] > 1e-8
    # shifting the lift by elements of K changes nothing
    shift = K.basis @ rng.normal(size=(k, red.lift.shape[1]))
    G2 = (red.lift + shift).T @ V.pairing @ (red.lift + shift)
    assert np.abs(G2 - red.space.pairing).max() < 1e-9


def test_identity_composition():
    rng = np.random.default_rng(1)
    V = random_split_space(2, rng)
    D = random_dirac(V, V, rng)
    out = compose(identity_relation(V), D)
    assert principal_angle(out.graph, D.graph) < 1e-9


@given(seeds)
def test_b_transform_graphs_compose_additively(seed):
    rng = np.random.default_rng(seed)
    V = SplitSpace.standard(3)
    B1, B2 = random_skew(3, rng), random_skew(3, rng)
    D = compose(graph_relation(b_matrix(B1), V), graph_relation(b_matrix(B2), V))
    assert principal_angle(D.graph, graph_relation(b_matrix(B1 + B2), V).graph) < 1e-9


@given(seeds)
def test_random_composition_is_maximal_isotropic(seed):
    rng = np.random.default_rng(seed)
    U, V, W = (random_split_space(2, rng) for _ in range(3))
    D = compose(random_dirac(V, W, rng), random_dirac(U, V, rng))
    assert D.graph.dim == 4
    assert D.graph.isotropy_defect() < 1e-9


def test_composition_dimension_mismatch():
    rng = np.random.default_rng(2)
    U, V, W = SplitSpace.standard(1), SplitSpace.standard(2), SplitSpace.standard(2)
    with pytest.raises(LinearAlgebraError):
        compose(random_dirac(V, W, rng), random_dirac(U, U, rng))


@given(seeds)
def test_associativity(seed):
    rng = np.random.default_rng(seed)
    S = [random_split_space(int(rng.integers(1, 3)), rng) for _ in range(4)]
    D1, D2, D3 = (random_dirac(S[i], S[i + 1], rng) for i in range(3))
    a = compose(D3, compose(D2, D1))
    b = compose(compose(D3, D2), D1)
    assert principal_angle(a.graph, b.graph) < 1e-8


def test_brute_force_composition_oracle():
    # elementwise definition on a small example: graph of M2 o graph of M1
    rng = np.random.default_rng(3)
    V = SplitSpace.standard(2)
    B1, B2 = random_skew(2, rng), random_skew(2, rng)
    D = compose(graph_relation(b_matrix(B2), V), graph_relation(b_matrix(B1), V))
    for _ in range(5):
        u = rng.normal(size=4)
        w = b_matrix(B2) @ b_matrix(B1) @ u
        assert D.graph.contains(np.concatenate([w, u]), tol=1e-9)


def test_kernels_of_isometry_graph_vanish():
    V = SplitSpace.standard(2)
    left, right = relation_kernels(graph_relation(b_matrix(random_skew(2, np.random.default_rng(0))), V))
    assert left.dim == right.dim == 0


def test_kernel_of_relation_to_zero_space():
    rng = np.random.default_rng(4)
    V = random_split_space(2, rng)
    L = random_lagrangian(V, rng)
    zero = SplitSpace(np.zeros((0, 0)))
    D = DiracRelation(V, zero, Subspace(zero.product(V.opposite()), L.basis))
    left, right = relation_kernels(D)
    assert subspaces_equal(left, L)
    assert right.dim == 0


@given(seeds)
def test_induced_map_is_isometry(seed):
    rng = np.random.default_rng(seed)
    V, W = random_split_space(3, rng), random_split_space(2, rng)
    D = random_dirac(V, W, rng)
    M, rs, rt = induced_isometry(D)
    defect = M.T @ rt.space.pairing @ M - rs.space.pairing
    assert defect.size == 0 or np.abs(defect).max() < 1e-9


@given(seeds)
def test_kernel_dimensions_equal_for_equal_spaces(seed):
    rng = np.random.default_rng(seed)
    V = random_split_space(3, rng)
    left, right = relation_kernels(random_dirac(V, V, rng))
    assert left.dim == right.dim
    assert left.is_isotropic() and right.is_isotropic()


def test_dirac_relation_rejects_non_maximal():
    V = SplitSpace.standard(1)
    amb = V.product(V.opposite())
    with pytest.raises(LinearAlgebraError):
        DiracRelation(V, V, Subspace(amb, np.eye(4)[:, :1]))


def _sym_form(m):
    w = np.zeros((m, m))
    for k in range(0, m, 2):
        w[k, k + 1], w[k + 1, k] = 1.0, -1.0
    return w


def test_graph_of_symplectic_form_is_not_invariant():
    # I_omega maps graph(omega) to graph(-omega)
    w = _sym_form(2)
    V = SplitSpace.standard(2)
    L = Subspace(V, np.vstack([np.eye(2), w]))
    assert not is_brane_invariant(L, gc_from_symplectic(w))


def test_graph_of_compatible_form_is_invariant():
    # F with (omega^-1 F)^2 = -1
    Om = standard_hol_symplectic(4)
    w, F = Om.imag, Om.real
    assert np.allclose(np.linalg.matrix_power(np.linalg.solve(w, F), 2), -np.eye(4))
    L = Subspace(SplitSpace.standard(4), np.vstack([np.eye(4), F]))
    assert is_brane_invariant(L, gc_from_symplectic(w))


def test_tangent_bundle_not_invariant_for_symplectic():
    V = SplitSpace.standard(2)
    L = Subspace(V, np.vstack([np.eye(2), np.zeros((2, 2))]))
    assert not is_brane_invariant(L, gc_from_symplectic(_sym_form(2)))


def test_lagrangian_plus_annihilator_is_symplectic_brane():
    w = _sym_form(4)
    # Lambda = span{e1, e3} is Lagrangian for w
    T = np.zeros((8, 4))
    T[0, 0] = T[2, 1] = 1.0
    T[4 + 1, 2] = T[4 + 3, 3] = 1.0
    assert is_brane_invariant(Subspace(SplitSpace.standard(4), T), gc_from_symplectic(w))


def test_antiholomorphic_tangents_invariant_for_complex():
    I = standard_complex(2)
    J = gc_from_complex(I)
    # T^{0,1} + (T^*)^{1,0}: eigenvectors of I with eigenvalue -i plus covectors with I^T xi = i xi
    ev, vec = np.linalg.eig(I)
    v01 = vec[:, np.argmin(ev.imag)]
    evT, vecT = np.linalg.eig(I.T)
    x10 = vecT[:, np.argmax(evT.imag)]
    L = Subspace(SplitSpace.standard(2), np.column_stack([np.concatenate([v01, 0 * v01]), np.concatenate([0 * x10, x10])]))
    assert L.is_maximal_isotropic()
    assert is_brane_invariant(L, J)


def test_brane_requires_maximal_isotropic():
    V = SplitSpace.standard(2)
    with pytest.raises(LinearAlgebraError):
        is_brane_invariant(Subspace(V, np.eye(4)[:, :1]), gc_from_symplectic(_sym_form(2)))


def test_brane_rejects_mismatched_structure():
    V = SplitSpace.standard(1)
    with pytest.raises(LinearAlgebraError):
        is_brane_invariant(Subspace(V, np.eye(2)[:, :1]), gc_from_symplectic(_sym_form(2)))
