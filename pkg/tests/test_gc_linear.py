import numpy as np
import pytest
import scipy.linalg as sla
import sympy as sp
from hypothesis import given, strategies as st

from gcverify.examples import random_b_solution, standard_hol_symplectic
from gcverify.groupoid import differentiate_base
from gcverify.gc_linear import (
    GaugeField,
    GCError,
    GCStructure,
    HolPoissonPoint,
    apply_b_transform,
    b_matrix,
    check_gauge_condition,
    classify,
    direct_sum,
    eigenbundle,
    gc_from_complex,
    gc_from_eigenbundle,
    gc_from_hol_poisson,
    gc_from_symplectic,
    parity_product,
    standard_complex,
    standard_symplectic,
    underlying_poisson,
)
from gcverify.randomgen import random_gc, random_skew
from gcverify.split_linear import SplitSpace, Subspace, principal_angle, standard_pairing

seeds = st.integers(0, 2**32 - 1)
W2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _hol_poisson_example():
    """Standard I on R^4 with P the real part of a (2,0) bivector."""
    I = standard_complex(4)
    P = np.zeros((4, 4))
    # pi = d/dz1 ^ d/dz2 has real part built from e1, e3 and e2, e4
    P[0, 2], P[2, 0] = 1.0, -1.0
    P[1, 3], P[3, 1] = -1.0, 1.0
    return I, P


def test_symplectic_example():
    J = gc_from_symplectic(W2)
    Z = np.zeros((2, 2))
    assert np.allclose(J.matrix, np.block([[Z, np.linalg.inv(W2)], [-W2, Z]]))
    assert np.allclose(J.matrix @ J.matrix, -np.eye(4))


def test_complex_with_zero_poisson_is_diagonal():
    I = standard_complex(2)
    J = gc_from_hol_poisson(I, np.zeros((2, 2)))
    assert np.allclose(J.matrix, sla.block_diag(-I, I.T))
    assert np.allclose(J.matrix, gc_from_complex(I).matrix)


def test_hol_poisson_block_structure_m4():
    I, P = _hol_poisson_example()
    pt = HolPoissonPoint(I, P)
    assert np.allclose(pt.pi, -pt.pi.T)
    J = gc_from_hol_poisson(pt)
    G = standard_pairing(4)
    assert np.abs(J.matrix @ J.matrix + np.eye(8)).max() < 1e-12
    assert np.abs(J.matrix.T @ G @ J.matrix - G).max() < 1e-12


def test_hol_poisson_condition_is_type_20_sympy():
    # IP = P I^T  <=>  pi = IP + iP is annihilated by the (0,1) projection
    a, b, c = sp.symbols("a b c", real=True)
    I = sp.Matrix(standard_complex(4).astype(int))
    P = sp.Matrix([[0, a, b, c], [-a, 0, c, -b], [-b, -c, 0, a], [-c, b, -a, 0]])
    cond = sp.simplify(I * P - P * I.T)
    pi = I * P + sp.I * P
    proj = (sp.eye(4) + sp.I * I) / 2  # projection onto the -i eigenspace of I
    # pi of type (2,0): both legs in the +i eigenspace
    leak = sp.simplify(proj * pi)
    sols = sp.solve(list(cond), [a, b, c], dict=True)
    for sol in sols:
        assert sp.simplify(leak.subs(sol)) == sp.zeros(4, 4)


def test_invalid_inputs_name_the_identity():
    with pytest.raises(GCError, match="I\\^2"):
        gc_from_complex(np.eye(2))
    with pytest.raises(GCError, match="skew"):
        gc_from_symplectic(np.eye(2))
    with pytest.raises(GCError, match="degenerate"):
        gc_from_symplectic(np.zeros((2, 2)))
    with pytest.raises(GCError, match="IP"):
        HolPoissonPoint(standard_complex(2), W2)
    with pytest.raises(GCError):
        GCStructure(np.eye(4))
    with pytest.raises(GCError):
        GaugeField(np.eye(2))


def test_underlying_poisson_examples():
    assert np.allclose(underlying_poisson(gc_from_symplectic(W2)), np.linalg.inv(W2))
    assert np.allclose(underlying_poisson(gc_from_complex(standard_complex(4))), 0.0)


@given(seeds)
def test_b_transform_keeps_poisson(seed):
    rng = np.random.default_rng(seed)
    w = random_skew(4, rng) + 3 * standard_symplectic(4)
    J = gc_from_symplectic(w)
    B = random_skew(4, rng)
    assert np.allclose(underlying_poisson(apply_b_transform(J, B)), np.linalg.inv(w), atol=1e-9)


def test_b_matrix_is_exponential():
    B = random_skew(3, np.random.default_rng(0))
    N = np.zeros((6, 6))
    N[3:, :3] = B
    assert np.allclose(b_matrix(B), sla.expm(N))


def test_zero_b_transform():
    J, _ = random_gc(4, np.random.default_rng(1))
    assert np.allclose(apply_b_transform(J, np.zeros((4, 4))).matrix, J.matrix)


@given(seeds, st.sampled_from([2, 4, 6]))
def test_b_transform_invariants(seed, m):
    rng = np.random.default_rng(seed)
    J, _ = random_gc(m, rng)
    B, B2 = random_skew(m, rng), random_skew(m, rng)
    K = apply_b_transform(J, B)
    G = standard_pairing(m)
    assert np.abs(K.matrix @ K.matrix + np.eye(2 * m)).max() < 1e-9 * max(1, np.abs(K.matrix).max()) ** 2
    assert np.abs(K.matrix.T @ G @ K.matrix - G).max() < 1e-9 * max(1, np.abs(K.matrix).max()) ** 2
    assert np.allclose(underlying_poisson(K), underlying_poisson(J), atol=1e-9)
    assert classify(K) == classify(J)
    # composition law
    a = apply_b_transform(apply_b_transform(J, B), B2).matrix
    b = apply_b_transform(J, B + B2).matrix
    assert np.abs(a - b).max() < 1e-9 * max(1, np.abs(b).max())


def test_gauge_condition_trivial():
    I, P = _hol_poisson_example()
    r = check_gauge_condition(I, P, np.zeros((4, 4)))
    assert r.modification == 0 and r.pb2 == 0


def test_gauge_condition_type_11_with_zero_poisson():
    rng = np.random.default_rng(2)
    I = standard_complex(4)
    A = random_skew(4, rng)
    B = 0.5 * (A + I.T @ A @ I)  # (1,1) part: I^T B I = B
    assert np.allclose(I.T @ B @ I, B)
    r = check_gauge_condition(I, np.zeros((4, 4)), B)
    assert r.modification < 1e-12
    # a (2,0)+(0,2) form is not a solution
    C = 0.5 * (A - I.T @ A @ I)
    assert check_gauge_condition(I, np.zeros((4, 4)), C).modification > 1e-3


def test_modification_gives_block_form(pair4):
    rng = np.random.default_rng(3)
    dv = differentiate_base(pair4)
    I0, P0 = dv.I(np.zeros(4)), dv.P(np.zeros(4))
    for _ in range(10):
        B = random_b_solution(standard_hol_symplectic(4), rng)
        r = check_gauge_condition(I0, P0, B)
        assert r.max < 1e-9
        K = apply_b_transform(gc_from_hol_poisson(I0, P0), B)
        Jn = I0 + P0 @ B
        expect = np.block([[-Jn, P0], [np.zeros((4, 4)), Jn.T]])
        assert np.abs(K.matrix - expect).max() < 1e-9


def test_classify_examples():
    c = classify(gc_from_symplectic(standard_symplectic(4)))
    assert (c.poisson_rank, c.type, c.parity_ok) == (4, 0, True)
    c = classify(gc_from_complex(standard_complex(2)))
    assert (c.poisson_rank, c.type, c.parity_ok) == (0, 1, True)
    c = classify(gc_from_symplectic(W2))
    assert (c.poisson_rank, c.parity_ok) == (2, False)
    assert c.as_dict() == {"poisson_rank": 2, "type": 0, "parity_ok": False}


def test_parity_product_examples():
    J = parity_product(gc_from_symplectic(W2))
    c = classify(J)
    assert J.m == 4 and c.poisson_rank == 4 and c.parity_ok
    c = classify(parity_product(gc_from_complex(standard_complex(2))))
    assert (c.poisson_rank, c.parity_ok) == (2, False)
    c2 = classify(parity_product(parity_product(gc_from_complex(standard_complex(2)))))
    assert c2.poisson_rank == 4


@given(seeds, st.sampled_from([2, 4]))
def test_parity_product_rank_shift(seed, m):
    rng = np.random.default_rng(seed)
    J, _ = random_gc(m, rng)
    assert classify(parity_product(J)).poisson_rank == classify(J).poisson_rank + 2


def test_eigenbundle_symplectic_plane():
    L = eigenbundle(gc_from_symplectic(W2))
    expect = Subspace(SplitSpace(standard_pairing(2, complex)), np.array([[1, 0], [0, 1], [0, 1j], [-1j, 0]]))
    assert principal_angle(L, expect) < 1e-9


def test_eigenbundle_complex_type():
    I = standard_complex(2)
    L = eigenbundle(gc_from_complex(I))
    # T^{0,1} (vectors with I v = -i v) plus (T^*)^{1,0} (covectors with I^T xi = i xi)
    for v in L.basis.T:
        X, xi = v[:2], v[2:]
        assert np.allclose(I @ X, -1j * X)
        assert np.allclose(I.T @ xi, 1j * xi)


@given(seeds, st.sampled_from([2, 4, 6]))
def test_eigenbundle_isotropic_and_transverse(seed, m):
    J, _ = random_gc(m, np.random.default_rng(seed))
    L = eigenbundle(J)
    assert L.dim == m
    assert L.isotropy_defect() < 1e-9
    assert L.intersection(L.conjugate()).dim == 0
    assert np.allclose(gc_from_eigenbundle(L).matrix, J.matrix, atol=1e-8 * max(1, np.abs(J.matrix).max()))


def test_direct_sum_dimensions():
    J = direct_sum(gc_from_complex(standard_complex(2)), gc_from_symplectic(W2))
    assert J.m == 4
    assert classify(J).type == 1
