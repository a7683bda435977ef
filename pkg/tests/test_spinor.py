
import numpy as np
import pytest
from hypothesis import given, strategies as st

from gcverify.gc_linear import (
    b_matrix,
    eigenbundle,
    gc_from_complex,
    gc_from_hol_poisson,
    gc_from_symplectic,
    standard_complex,
    standard_symplectic,
)
from gcverify.randomgen import random_gc, random_skew, standard_gc
from gcverify.spinor import (
    CliffordVector,
    MixedForm,
    SpinorError,
    annihilator,
    b_transform_spinor,
    clifford,
    collinearity_defect,
    form_exp,
    hol_poisson_generator,
    hol_poisson_spinor,
    interior,
    is_pure,
    mukai_pairing,
    real_rank_zero,
    symplectic_generator,
    two_form,
    wedge,
)
from gcverify.split_linear import Subspace, principal_angle

seeds = st.integers(0, 2**32 - 1)


# ---- brute-force exterior algebra on sorted index tuples (independent oracle)


def _to_dict(a: MixedForm) -> dict:
    out = {}
    for mask, c in enumerate(a.coeffs):
        if c != 0:
            out[tuple(i for i in range(a.m) if mask >> i & 1)] = c
    return out


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _bf_wedge(a: dict, b: dict) -> dict:
    out = {}
    for I, x in a.items():
        for J, y in b.items():
            if set(I) & set(J):
                continue
            K = tuple(sorted(I + J))
            out[K] = out.get(K, 0) + _perm_sign(I + J) * x * y
    return out


def _bf_interior(X, a: dict) -> dict:
    out = {}
    for I, c in a.items():
        for pos, i in enumerate(I):
            K = I[:pos] + I[pos + 1 :]
            out[K] = out.get(K, 0) + (-1) ** pos * X[i] * c
    return out


def _bf_to_form(m, d: dict) -> MixedForm:
    f = MixedForm(m)
    for I, c in d.items():
        f = f + MixedForm.basis(m, I, c)
    return f


def _random_form(m, rng):
    f = MixedForm(m)
    f.coeffs[:] = rng.normal(size=2**m) + 1j * rng.normal(size=2**m)
    return f


def test_clifford_example():
    rho = MixedForm.basis(2, (0, 1))
    v = CliffordVector(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    out = clifford(v, rho)
    assert np.allclose(out.coeffs, MixedForm.basis(2, (1,)).coeffs)


def test_wedge_of_one_form_with_itself():
    e1 = MixedForm.basis(3, (0,))
    assert wedge(e1, e1).norm() == 0


def test_basis_sign_convention():
    assert MixedForm.basis(2, (1, 0)).coeffs[3] == -1


@given(seeds, st.integers(1, 4))
def test_wedge_and_interior_match_brute_force(seed, m):
    rng = np.random.default_rng(seed)
    a, b = _random_form(m, rng), _random_form(m, rng)
    ref = _bf_to_form(m, _bf_wedge(_to_dict(a), _to_dict(b)))
    assert np.abs(wedge(a, b).coeffs - ref.coeffs).max() < 1e-12
    X = rng.normal(size=m)
    ref = _bf_to_form(m, _bf_interior(X, _to_dict(a)))
    assert np.abs(interior(X, a).coeffs - ref.coeffs).max() < 1e-12


@given(seeds, st.integers(1, 4))
def test_clifford_relation(seed, m):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 * m) + 1j * rng.normal(size=2 * m)
    a = _random_form(m, rng)
    lhs = clifford(v, clifford(v, a))
    # <v, v> with the half-normalized pairing is xi(X)
    vv = v[m:] @ v[:m]
    assert np.abs(lhs.coeffs - vv * a.coeffs).max() < 1e-12 * max(1, abs(vv)) * np.abs(a.coeffs).max()


def test_dimension_mismatch():
    with pytest.raises(SpinorError):
        wedge(MixedForm(2), MixedForm(3))
    with pytest.raises(SpinorError):
        interior(np.ones(3), MixedForm(2))


def test_annihilator_of_one():
    L = annihilator(MixedForm.scalar(3))
    assert L.dim == 3
    # the vectors: all of V
    assert np.abs(L.basis[3:]).max() < 1e-12


def test_annihilator_of_symplectic_generator():
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    L = annihilator(symplectic_generator(w))
    expect = Subspace(L.ambient, np.array([[1, 0], [0, 1], [0, 1j], [-1j, 0]]))
    assert principal_angle(L, expect) < 1e-9


def test_annihilator_brute_force_oracle():
    # nullspace of the 4 x 4 Clifford-image matrix of e^{i omega} by scipy
    import scipy.linalg as sla

    from gcverify.spinor import clifford_image_matrix

    rho = symplectic_generator(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    N = sla.null_space(clifford_image_matrix(rho))
    assert principal_angle(annihilator(rho), Subspace(annihilator(rho).ambient, N)) < 1e-9


def test_not_pure_example():
    rho = MixedForm.scalar(2) + MixedForm.basis(2, (0,))
    assert annihilator(rho).dim < 2
    assert not is_pure(rho)


def test_zero_form_rejected():
    with pytest.raises(SpinorError):
        annihilator(MixedForm(2))


def test_purity_examples():
    w = standard_symplectic(2)
    rho = symplectic_generator(w)
    assert is_pure(rho) and real_rank_zero(rho)
    dz1 = MixedForm.one_form([1, 1j, 0, 0])
    dz2 = MixedForm.one_form([0, 0, 1, 1j])
    rho = wedge(dz1, dz2)
    assert is_pure(rho) and real_rank_zero(rho)
    rho = form_exp(two_form(w))
    assert is_pure(rho) and not real_rank_zero(rho)


def test_mukai_examples():
    top = MixedForm.top(3)
    assert mukai_pairing(MixedForm.scalar(3), top) == 1
    rho = symplectic_generator(standard_symplectic(2))
    assert mukai_pairing(rho, rho.conj()) == pytest.approx(-2j)


@given(seeds)
def test_mukai_bilinear(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (_random_form(3, rng) for _ in range(3))
    s, t = rng.normal(size=2)
    assert mukai_pairing(a * s + c * t, b) == pytest.approx(s * mukai_pairing(a, b) + t * mukai_pairing(c, b))
    assert mukai_pairing(a, b * s + c * t) == pytest.approx(s * mukai_pairing(a, b) + t * mukai_pairing(a, c))


@given(seeds, st.sampled_from([2, 4]))
def test_mukai_b_invariance(seed, m):
    rng = np.random.default_rng(seed)
    a, b = _random_form(m, rng), _random_form(m, rng)
    B = random_skew(m, rng)
    lhs = mukai_pairing(b_transform_spinor(B, a), b_transform_spinor(B, b))
    assert abs(lhs - mukai_pairing(a, b)) < 1e-10 * max(1, abs(lhs))


def test_generator_trivial_cases():
    assert np.allclose(symplectic_generator(np.zeros((2, 2))).coeffs, MixedForm.scalar(2).coeffs)
    zeta = MixedForm.one_form([1, 1j])
    assert np.allclose(hol_poisson_generator(np.zeros((2, 2)), zeta).coeffs, zeta.coeffs)


@given(seeds, st.sampled_from([2, 4, 6]))
def test_symplectic_generator_matches_eigenbundle(seed, m):
    rng = np.random.default_rng(seed)
    w = standard_symplectic(m) * 2 + random_skew(m, rng, 0.3)
    L1 = annihilator(symplectic_generator(w))
    L2 = eigenbundle(gc_from_symplectic(w))
    assert principal_angle(L1, L2) < 1e-8


def test_hol_poisson_spinor_matches_eigenbundle():
    I = standard_complex(4)
    P = np.zeros((4, 4))
    P[0, 2], P[2, 0] = 1.0, -1.0
    P[1, 3], P[3, 1] = -1.0, 1.0
    _, zeta = standard_gc(4, 2)
    rho = hol_poisson_spinor(I, P, zeta)
    assert principal_angle(annihilator(rho), eigenbundle(gc_from_hol_poisson(I, P))) < 1e-8


def test_complex_canonical_form_matches_eigenbundle():
    J, rho = standard_gc(4, 2)
    assert principal_angle(annihilator(rho), eigenbundle(gc_from_complex(standard_complex(4)))) < 1e-9


@given(seeds, st.sampled_from([2, 4]))
def test_b_transform_moves_annihilator(seed, m):
    rng = np.random.default_rng(seed)
    J, rho = random_gc(m, rng)
    B = random_skew(m, rng)
    L = annihilator(b_transform_spinor(B, rho))
    assert principal_angle(L, annihilator(rho).apply(b_matrix(B))) < 1e-8


@given(seeds, st.integers(1, 4))
def test_annihilator_isotropic(seed, m):
    rng = np.random.default_rng(seed)
    rho = _random_form(m, rng)
    L = annihilator(rho)
    assert L.isotropy_defect() < 1e-12


@given(seeds, st.sampled_from([2, 4, 6]))
def test_real_rank_zero_iff_mukai_nonzero(seed, m):
    rng = np.random.default_rng(seed)
    _, rho = random_gc(m, rng)
    assert real_rank_zero(rho)
    assert abs(mukai_pairing(rho, rho.conj())) > 1e-10
    # real pure spinors have real rank m and vanishing pairing
    real = form_exp(two_form(random_skew(m, rng)))
    assert not real_rank_zero(real)
    assert abs(mukai_pairing(real, real.conj())) < 1e-10


def test_collinearity():
    a = symplectic_generator(standard_symplectic(2))
    assert collinearity_defect(a, a * (2 - 1j)) < 1e-14
    assert collinearity_defect(a, a.conj()) > 0.1
