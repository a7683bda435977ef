import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from gcverify import expr as E

NAMES = ("x", "y", "u")
SYMS = sp.symbols("x y u", real=True)


def _leaf(i):
    return (E.var(i, NAMES[i]), SYMS[i])


@st.composite
def trees(draw, depth=3):
    """Pairs (Expr, sympy expression) built in lockstep, on safe domains."""
    if depth == 0 or draw(st.booleans()):
        if draw(st.booleans()):
            return _leaf(draw(st.integers(0, 2)))
        c = draw(st.floats(-2, 2, allow_nan=False).filter(lambda v: abs(v) > 1e-3))
        ci = draw(st.sampled_from([0.0, 0.5]))
        return (E.const(complex(c, ci)), sp.Float(c) + sp.I * sp.Float(ci))
    op = draw(st.sampled_from(["add", "sub", "mul", "div", "exp", "log", "sqrt", "conj", "pow", "abs2"]))
    a, sa = draw(trees(depth=depth - 1))
    if op in ("add", "sub", "mul", "div"):
        b, sb = draw(trees(depth=depth - 1))
        if op == "add":
            return (a + b, sa + sb)
        if op == "sub":
            return (a - b, sa - sb)
        if op == "mul":
            return (a * b, sa * sb)
        # keep the denominator away from zero
        den, sden = 2.0 + E.abs2(b), 2 + sp.conjugate(sb) * sb
        return (a / den, sa / sden)
    if op == "exp":
        # bounded argument
        return (E.exp(a * 0.1), sp.exp(sa / 10))
    if op == "log":
        return (E.log(1.0 + E.abs2(a)), sp.log(1 + sp.conjugate(sa) * sa))
    if op == "sqrt":
        return (E.sqrt(1.0 + E.abs2(a)), sp.sqrt(1 + sp.conjugate(sa) * sa))
    if op == "conj":
        return (E.conj(a), sp.conjugate(sa))
    if op == "abs2":
        return (E.abs2(a), sp.conjugate(sa) * sa)
    n = draw(st.integers(-2, 3))
    if n < 0:
        return (E.power(1.0 + E.abs2(a), n), (1 + sp.conjugate(sa) * sa) ** n)
    return (E.power(a, n), sa**n)


def _jet_at(e, p, order=2):
    env = [E.Jet.variable(p[i], i, 3, order) for i in range(3)]
    j = E.evaluate(e, env)
    if not isinstance(j, E.Jet):
        return E.Jet.constant(j, 3, order)
    return j


def _close(a, b, tol=1e-8):
    return abs(complex(a) - complex(b)) <= tol * max(1.0, abs(complex(b)))


@given(trees(), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_jets_match_sympy(pair, p):
    e, s = pair
    subs = dict(zip(SYMS, p))
    j = _jet_at(e, p)
    assert _close(j.value, complex(s.subs(subs).evalf()))
    for i, xi in enumerate(SYMS):
        assert _close(j.grad[i], complex(sp.diff(s, xi).subs(subs).evalf()))
        for k, xk in enumerate(SYMS):
            assert _close(j.hess[i, k], complex(sp.diff(s, xi, xk).subs(subs).evalf()), 1e-7)


@given(trees(), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_jets_match_finite_differences(pair, p):
    e, _ = pair
    p = np.array(p)
    j = _jet_at(e, p, order=1)
    h = 1e-5
    for i in range(3):
        dp = np.zeros(3)
        dp[i] = h
        fd = (complex(E.evaluate(e, list(p + dp))) - complex(E.evaluate(e, list(p - dp)))) / (2 * h)
        assert abs(j.grad[i] - fd) <= 1e-7 * max(1.0, abs(fd)) + 1e-6 * h


@given(trees(), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_hessian_symmetric(pair, p):
    j = _jet_at(pair[0], p)
    assert np.abs(j.hess - j.hess.T).max() < 1e-10 * max(1.0, np.abs(j.hess).max())


@given(trees(), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_symbolic_diff_matches_jets(pair, p):
    e, _ = pair
    j = _jet_at(e, p, order=1)
    for i in range(3):
        assert _close(E.evaluate(e.diff(i), list(p)), j.grad[i])


@given(trees(), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_json_roundtrip(pair, p):
    e, _ = pair
    doc = json.loads(json.dumps(E.to_json(e)))
    back = E.from_json(doc, NAMES)
    assert _close(E.evaluate(back, list(p)), E.evaluate(e, list(p)), 1e-12)


def test_json_grammar():
    e = E.from_json(["add", ["mul", "x", ["c", 0, 1]], ["pow", "y", 2], ["conj", "u"], "i"], NAMES)
    assert complex(E.evaluate(e, [1.0, 2.0, 3.0])) == pytest.approx(1j + 4 + 3 + 1j)


@pytest.mark.parametrize(
    "bad",
    [["nope", "x"], "q", True, [], ["pow", "x", 1.5], ["exp", "x", "y"], ["add", "x"], ["c", 1], {"a": 1}],
)
def test_json_errors(bad):
    with pytest.raises(E.ExprError):
        E.from_json(bad, NAMES)


def test_conj_commutes_with_derivative():
    x, y = E.var(0), E.var(1)
    z = x + 1j * y
    # d/dx conj(z) = 1, d/dy conj(z) = -i
    j = _jet_at(E.conj(z), [0.3, 0.2, 0.0])
    assert np.allclose(j.grad[:2], [1, -1j])


def test_shared_subexpression_evaluated_once():
    x = E.var(0)
    s = E.exp(x)
    total = s
    for _ in range(200):
        total = total + s * s
    # a DAG this deep would be exponential as a tree; evaluation must stay fast
    val = E.evaluate(total, [0.1])
    assert complex(val) == pytest.approx(np.exp(0.1) + 200 * np.exp(0.2))
