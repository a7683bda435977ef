import numpy as np
import pytest

from gcverify import expr as E
from gcverify.calculus import Chart, FormField
from gcverify.errors import InconclusiveError, PreconditionError
from gcverify.examples import (
    constant_form,
    pair_groupoid,
    random_b_solution,
    standard_hol_symplectic,
)
from gcverify.groupoid import (
    check_axioms,
    check_fibre_orthogonality,
    check_multiplicative,
    differentiate_base,
    extend_multiplicative,
    modify,
    sample_composable,
    verify_modification,
)

TOL = 1e-9


def _axioms_ok(res, tol=TOL):
    return all(v < tol for k, v in res.items() if k != "samples")


@pytest.mark.parametrize("m", [2, 4])
def test_pair_groupoid_axioms(m, rng):
    assert _axioms_ok(check_axioms(pair_groupoid(m=m), rng, 24))


def test_phi22_axioms(phi22, rng):
    assert _axioms_ok(check_axioms(phi22.groupoid, rng, 24), 1e-8)


def test_pair_form_multiplicative(pair4, rng):
    assert check_multiplicative(pair4.groupoid, pair4.Omega, rng, 24) < TOL


def test_phi22_form_multiplicative(phi22, rng):
    assert check_multiplicative(phi22.groupoid, phi22.Omega, rng, 24) < 1e-8


def test_non_multiplicative_form_detected(pair4, rng):
    """t^* Omega0 alone is not multiplicative."""
    G = pair4.groupoid
    theta = G.t.pull(constant_form(standard_hol_symplectic(4)))
    assert check_multiplicative(G, theta, rng, 24) > 1e-3


def test_multiplicativity_matches_brute_force(pair4, rng):
    """Oracle: compare m^* theta with pr1^* + pr2^* on explicit tangent vectors."""
    G = pair4.groupoid
    Om = standard_hol_symplectic(4)
    h, g, _ = sample_composable(G, rng, 16)[0]
    # tangent vectors to composable pairs: (dh, dg) with ds(h) = dt(g)
    for _ in range(5):
        dg = rng.normal(size=8)
        dh = np.concatenate([rng.normal(size=4), dg[:4]])
        dg2 = rng.normal(size=8)
        dh2 = np.concatenate([rng.normal(size=4), dg2[:4]])

        def theta(u, v):
            return u[:4] @ Om @ v[:4] - u[4:] @ Om @ v[4:]

        prod = lambda a, b: np.concatenate([a[:4], b[4:]])  # noqa: E731
        lhs = theta(prod(dh, dg), prod(dh2, dg2))
        rhs = theta(dh, dh2) + theta(dg, dg2)
        assert abs(lhs - rhs) < 1e-12


def test_fibre_orthogonality(pair4, phi22, rng):
    assert check_fibre_orthogonality(pair4.groupoid, pair4.Omega, rng, 16, part="im") < TOL
    assert check_fibre_orthogonality(phi22.groupoid, phi22.Omega, rng, 16, part="im") < 1e-8


def test_fibre_orthogonality_negative(rng):
    """A constant symplectic form coupling source and target fails."""
    G = pair_groupoid(m=2)
    w = np.zeros((4, 4))
    w[0, 2], w[2, 0], w[1, 3], w[3, 1] = 1, -1, 1, -1
    assert check_fibre_orthogonality(G, constant_form(w), rng, 8) > 0.5


def test_fibre_orthogonality_degenerate_form(rng):
    G = pair_groupoid(m=2)
    with pytest.raises(PreconditionError):
        check_fibre_orthogonality(G, FormField.zero(4), rng, 4)


def test_validate_pair(pair4, rng):
    res = pair4.validate(rng, 16)
    assert res["min_singular_omega"] > 0.5
    assert res["I_squared"] < TOL and res["closed"] < TOL


def test_base_derivative_of_pair_is_inverse_form(pair4):
    """The pair groupoid of (V, Omega0) integrates the Poisson tensor (Im Omega0)^-1."""
    der = differentiate_base(pair4)
    x = np.array([0.1, -0.2, 0.3, 0.4])
    assert np.abs(der.P(x) - np.linalg.inv(standard_hol_symplectic(4).imag)).max() < TOL
    I = der.I(x)
    assert np.abs(I @ I + np.eye(4)).max() < TOL
    assert der.holomorphy_residual(x) < TOL


def test_phi22_base_poisson_linear_in_w2(phi22):
    der = differentiate_base(phi22.data)
    x0 = np.array([0.3, -0.1, 0.0, 0.0])
    xa = np.array([0.3, -0.1, 0.4, 0.0])
    xb = np.array([0.3, -0.1, 0.0, 0.3])
    xab = np.array([0.3, -0.1, 0.4, 0.3])
    assert np.abs(der.P(x0)).max() < TOL
    assert np.abs(der.P(xab) - der.P(xa) - der.P(xb)).max() < 1e-8
    assert np.linalg.matrix_rank(der.P(xa), 1e-8) == 4
    I, P = der.I(xa), der.P(xa)
    assert np.abs(I @ P - P @ I.T).max() < 1e-8


def test_phi22_deck_equivariance(phi22, rng):
    G = phi22.groupoid
    for g in G.arrows.sample(rng, 8):
        dg = phi22.deck_arrows.real(g)
        assert np.allclose(G.source(dg), phi22.deck_base.real(G.source(g)))
        assert np.allclose(G.target(dg), phi22.deck_base.real(G.target(g)))
        assert np.abs(phi22.Omega.matrix_at(dg) - phi22.Omega.matrix_at(g)).max() < 1e-12


def test_modify_pair_groupoid(pair4, rng):
    B = random_b_solution(standard_hol_symplectic(4), rng)
    Bf = constant_form(B)
    new = modify(pair4, Bf, rng=rng)
    res = verify_modification(pair4, new, Bf, rng, 16)
    assert max(res.values()) < 1e-8


def test_modify_rejects_bad_B(pair4, rng):
    with pytest.raises(PreconditionError):
        modify(pair4, FormField.basis(4, (1, 2), E.var(0)), rng=rng)
    # closed, but Re Omega0 does not solve the modification equation
    with pytest.raises(PreconditionError):
        modify(pair4, constant_form(standard_hol_symplectic(4).real), rng=rng)


def test_extend_multiplicative_consistency(phi22, rng):
    G = phi22.groupoid
    pairs = sample_composable(G, rng, 4, minimum=1)
    h, g, _ = pairs[0]
    res = extend_multiplicative(G, phi22.Omega, [g, h])
    assert max(res.consistency.values()) < 1e-8
    one = extend_multiplicative(G, phi22.Omega, [g])
    assert np.allclose(one.value, phi22.Omega.matrix_at(g))


def test_extend_rejects_non_composable(pair4):
    G = pair4.groupoid
    a = np.array([0.1] * 8)
    b = np.array([0.5] * 8)
    with pytest.raises(ValueError):
        extend_multiplicative(G, pair4.Omega, [a, b])
    with pytest.raises(ValueError):
        extend_multiplicative(G, pair4.Omega, [])


def test_sampling_inconclusive(rng):
    base = Chart(("x",), lambda p: False, np.array([-1.0]), np.array([1.0]))
    G = pair_groupoid(base=base)
    with pytest.raises(InconclusiveError):
        sample_composable(G, rng, 16, max_tries=200)
