"""Built-in fixtures: the Hopf surface, the log-symplectic groupoid model and
pair groupoids of holomorphic symplectic vector spaces.

All Hopf quantities live upstairs on ``C^2 \\ {0}`` in real coordinates
``(a, b, c, d)`` with ``x1 = a + ib`` and ``x2 = c + id``; the quotient by
``x -> 2x`` is handled through explicit equivariance checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import expr as E
from .calculus import (
    EPS_DOM,
    Chart,
    FormField,
    JetMap,
    MatrixField,
    holomorphic_structure,
    poisson_of_form,
)
from .errors import PreconditionError
from .expr import Expr
from .cover_glue import Bisection, HolomorphicCover, LocalizationData
from .groupoid import HolSympGroupoidData, LocalGroupoid, modify
from .split_linear import numerical_rank

__all__ = [
    "HopfConfig",
    "HopfData",
    "hopf_fixture",
    "DECK_SHIFT",
    "pair_groupoid",
    "pair_groupoid_fixture",
    "standard_hol_symplectic",
    "random_b_solution",
    "constant_form",
    "Phi22Data",
    "phi22_fixture",
    "hopf_cover",
    "hopf_localization_fixture",
    "modification_fixture",
]

#: shift of ``w1`` under the generator ``x -> 2x`` of the deck group
DECK_SHIFT = math.log(4.0)


@dataclass(frozen=True)
class HopfConfig:
    margin: float = EPS_DOM
    tube: float = 0.5
    r_min: float = 1.0
    r_max: float = 2.0
    prime_ratio: float = 0.5


def _dlog(f: Expr, m: int) -> FormField:
    return FormField.differential(f, m) * (1 / f)


def _sphere_proposal(r_min, r_max, margin, weights=None):
    def propose(rng):
        v = rng.normal(size=4)
        if weights is not None:
            v = v * weights
        v /= np.linalg.norm(v)
        return v * rng.uniform(r_min + margin, r_max - margin)

    return propose


@dataclass(frozen=True, eq=False)
class HopfData:
    """Every field of the worked Hopf example, as expressions in ``(a, b, c, d)``."""

    config: HopfConfig
    coords: tuple
    x1: Expr
    x2: Expr
    R2: Expr
    C: FormField
    H: FormField
    rho: FormField
    rho_prime: FormField
    im_c_identity: FormField
    w1: Expr
    w2: Expr
    W: FormField
    B2: FormField
    B2_closed: FormField
    p1: Expr
    q1: Expr
    p2: Expr
    q2: Expr
    z1: Expr
    z2: Expr
    z1_literal: Expr
    Z: FormField
    Z_literal: FormField
    B1: FormField
    B12: FormField
    charts: dict = field(repr=False)
    deck: JetMap = field(repr=False)
    I1: MatrixField = field(repr=False)
    I2: MatrixField = field(repr=False)
    P: MatrixField = field(repr=False)

    @property
    def m(self) -> int:
        return 4

    def dz(self) -> tuple[FormField, FormField]:
        return FormField.differential(self.z1, 4), FormField.differential(self.z2, 4)

    def dw(self) -> tuple[FormField, FormField]:
        return FormField.differential(self.w1, 4), FormField.differential(self.w2, 4)

    def w_map(self) -> JetMap:
        return JetMap(4, (self.w1, self.w2), self.charts["X2"])

    def w_real_map(self) -> JetMap:
        """``(Re w1, Im w1, Re w2, Im w2)`` as a real map of ``R^4``."""
        return JetMap(4, (E.re(self.w1), E.im(self.w1), E.re(self.w2), E.im(self.w2)), self.charts["X2"])


def hopf_fixture(config: HopfConfig | None = None) -> HopfData:
    cfg = config or HopfConfig()
    eps = cfg.margin
    m = 4
    a, b, c, d = E.coords(("a", "b", "c", "d"))
    x1 = a + 1j * b
    x2 = c + 1j * d
    x1b, x2b = E.conj(x1), E.conj(x2)
    R2 = x1 * x1b + x2 * x2b

    def dfun(f):
        return FormField.differential(f, m)

    dx1, dx1b, dx2, dx2b = dfun(x1), dfun(x1b), dfun(x2), dfun(x2b)
    vol = dx1 ^ dx1b ^ dx2 ^ dx2b
    inner = dx1b.wedge(dx2b) * (2 * x1 / x2b) + (dx1 ^ dx1b) + (dx2 ^ dx2b)
    C = inner * (1 / R2)
    minus_H = (((dx2b * x2 - dx2 * x2b) ^ dx1 ^ dx1b) + ((dx1b * x1 - dx1 * x1b) ^ dx2 ^ dx2b)) * (1 / R2**2)
    H = -minus_H
    rho = C + 1.0 + vol * (1 / R2**2)
    ratio = x2b / x1
    rho_prime = (
        FormField.scalar(m, ratio)
        + ((dx1b ^ dx2b) * 2.0 + ((dx1 ^ dx1b) + (dx2 ^ dx2b)) * ratio) * (1 / R2)
        + vol * (ratio / R2**2)
    )
    im_c_identity = (_dlog(x1b / x1, m) ^ _dlog(x2b * x2 / R2, m)) + (_dlog(R2, m) ^ _dlog(x2b / x2, m))

    w1 = E.log(x1b * R2 / x1)
    w2 = x2b / E.sqrt(R2)
    W = dfun(w1) ^ _dlog(w2, m)
    B2 = W - C
    B2_closed = (_dlog(x1b / x1, m) ^ _dlog(x2b / x2, m)) * (x2 * x2b / (2 * R2))

    p1 = (x1 / x2b + x1b / x2) * 0.5
    q1 = (x1 / x2b - x1b / x2) * 0.5
    p2 = x2 * x2b
    q2 = x2b / x2
    s = E.sqrt(p1 * p1 + 1.0)
    z1 = E.sqrt(p2) * (s + q1) / (s - q1)
    z1_literal = p2 * (s + q1) / (s - q1)
    z2 = q2 * (p1 + s)
    Z = _dlog(z1, m) ^ _dlog(z2, m)
    Z_literal = _dlog(z1_literal, m) ^ _dlog(z2, m)
    B1 = Z - C
    B12 = (B2 - B1).re()

    def radius_ok(p):
        r = float(np.linalg.norm(p))
        return cfg.r_min + eps <= r <= cfg.r_max - eps

    def abs_x1(p):
        return math.hypot(p[0], p[1])

    def abs_x2(p):
        return math.hypot(p[2], p[3])

    def dom_C(p):
        return radius_ok(p) and abs_x2(p) > eps

    def dom_X2(p):
        return dom_C(p) and abs_x1(p) > eps

    def dom_X1(p):
        return dom_C(p) and abs_x1(p) < (cfg.tube - eps) * abs_x2(p)

    def dom_prime(p):
        return radius_ok(p) and abs_x1(p) > eps and abs_x2(p) < cfg.prime_ratio * abs_x1(p)

    prop = _sphere_proposal(cfg.r_min, cfg.r_max, eps)
    prop_x1 = _sphere_proposal(cfg.r_min, cfg.r_max, eps, np.array([0.3, 0.3, 1.0, 1.0]))
    prop_x2 = _sphere_proposal(cfg.r_min, cfg.r_max, eps, np.array([1.0, 1.0, 0.3, 0.3]))

    def prop_prime(rng):
        # a share of proposals sit exactly on the divisor x2 = 0
        p = prop_x2(rng)
        if rng.uniform() < 0.25:
            p[2:] = 0.0
            p *= rng.uniform(cfg.r_min + eps, cfg.r_max - eps) / np.linalg.norm(p)
        return p

    names = ("a", "b", "c", "d")
    charts = {
        "C": Chart(names, dom_C, proposal=prop, label="hopf:C"),
        "X2": Chart(names, dom_X2, proposal=prop, label="hopf:X2"),
        "X1": Chart(names, dom_X1, proposal=prop_x1, label="hopf:X1"),
        "prime": Chart(names, dom_prime, proposal=prop_prime, label="hopf:prime"),
    }
    deck = JetMap(4, (a * 2.0, b * 2.0, c * 2.0, d * 2.0))
    return HopfData(
        config=cfg,
        coords=(a, b, c, d),
        x1=x1,
        x2=x2,
        R2=R2,
        C=C,
        H=H,
        rho=rho,
        rho_prime=rho_prime,
        im_c_identity=im_c_identity,
        w1=w1,
        w2=w2,
        W=W,
        B2=B2,
        B2_closed=B2_closed,
        p1=p1,
        q1=q1,
        p2=p2,
        q2=q2,
        z1=z1,
        z2=z2,
        z1_literal=z1_literal,
        Z=Z,
        Z_literal=Z_literal,
        B1=B1,
        B12=B12,
        charts=charts,
        deck=deck,
        I1=holomorphic_structure((z1, z2), "I1"),
        I2=holomorphic_structure((w1, w2), "I2"),
        P=poisson_of_form(C, "im", "P"),
    )


# ------------------------------------------------------------ pair groupoids

def _box(m, lo, hi):
    return np.full(m, float(lo)), np.full(m, float(hi))


def pair_groupoid(base: Chart | None = None, m: int | None = None, label: str = "pair") -> LocalGroupoid:
    """Pair groupoid ``U x U`` with arrows ``(x_target, x_source)``."""
    if base is None:
        if m is None:
            raise ValueError("give a base chart or a dimension")
        lo, hi = _box(m, -1, 1)
        base = Chart(tuple(f"x{i}" for i in range(m)), None, lo, hi, label=f"{label}:base")
    n = base.m
    names = tuple(f"t_{v}" for v in base.names) + tuple(f"s_{v}" for v in base.names)

    def in_arrows(p):
        return base.contains(p[:n]) and base.contains(p[n:])

    def propose(rng):
        return np.concatenate([base._propose(rng), base._propose(rng)])

    arrows = Chart(names, in_arrows, proposal=propose, label=f"{label}:arrows")
    xt, xs = _vars2(0, n), _vars2(n, n)
    h_t, h_s, g_t, g_s = _vars2(0, n), _vars2(n, n), _vars2(2 * n, n), _vars2(3 * n, n)
    x = _vars2(0, n)
    q = _vars2(0, n)
    return LocalGroupoid(
        base=base,
        arrows=arrows,
        s=JetMap(2 * n, tuple(xs)),
        t=JetMap(2 * n, tuple(xt)),
        m=JetMap(4 * n, tuple(h_t + g_s)),
        inv=JetMap(2 * n, tuple(xs + xt)),
        ident=JetMap(n, tuple(x + x)),
        fibre=JetMap(2 * n, tuple(_vars2(0, n) + _vars2(n, n))),
        fibre_coords=JetMap(2 * n, tuple(xt)),
        fibre_chart=base,
        label=label,
    )


def _vars2(offset, n):
    return [E.var(offset + i) for i in range(n)]


def standard_hol_symplectic(m: int) -> np.ndarray:
    """``sum_k dz_{2k} ^ dz_{2k+1}`` with ``z_j = x_{2j} + i x_{2j+1}``."""
    if m % 4:
        raise PreconditionError("a holomorphic symplectic vector space has real dimension divisible by 4")
    Om = np.zeros((m, m), dtype=complex)
    for k in range(0, m, 4):
        u = np.zeros(m, dtype=complex)
        v = np.zeros(m, dtype=complex)
        u[k], u[k + 1] = 1, 1j
        v[k + 2], v[k + 3] = 1, 1j
        Om += np.outer(u, v) - np.outer(v, u)
    return Om


def check_hol_symplectic(Om: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    Om = np.asarray(Om, dtype=complex)
    m = Om.shape[0]
    if Om.shape != (m, m) or np.abs(Om + Om.T).max() > tol:
        raise PreconditionError("Omega_0 must be a skew matrix")
    w = Om.imag
    if numerical_rank(w) < m:
        raise PreconditionError("Im Omega_0 is degenerate")
    I = np.linalg.solve(w, Om.real)
    r = float(np.abs(I @ I + np.eye(m)).max())
    if r > tol * max(1.0, np.abs(I).max()) ** 2:
        raise PreconditionError(f"(Im^-1 Re)^2 = -1 fails for Omega_0 (residual {r:.3e})", r)
    return Om


def constant_form(M) -> FormField:
    M = np.asarray(M)
    m = M.shape[0]
    return FormField.from_matrix([[E.const(M[i, j]) for j in range(m)] for i in range(m)])


def pair_groupoid_fixture(Omega0=None, m: int = 4, base: Chart | None = None) -> HolSympGroupoidData:
    """Pair groupoid of ``(R^m, Omega0)`` with ``Omega = t^* Omega0 - s^* Omega0``."""
    Om = standard_hol_symplectic(m) if Omega0 is None else check_hol_symplectic(Omega0)
    m = Om.shape[0]
    G = pair_groupoid(base=base, m=m, label="pair")
    F = constant_form(Om)
    return HolSympGroupoidData(G, G.t.pull(F) - G.s.pull(F), "pair")


def random_b_solution(Omega0: np.ndarray, rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    """Constant ``B`` with ``BI + I^T B + BPB = 0`` for ``(I, P)`` of ``Omega0``.

    Built as ``g^T B0 g - B0`` with ``g`` in ``Sp(omega0)``: ``g^T Omega0 g`` is
    again holomorphic symplectic with the same imaginary part.
    """
    w = Omega0.imag
    m = w.shape[0]
    S = rng.normal(size=(m, m)) * scale
    S = S + S.T
    g = expm(np.linalg.solve(w, S))
    B0 = Omega0.real
    B = g.T @ B0 @ g - B0
    return 0.5 * (B - B.T)


# ------------------------------------------------------------ log-symplectic model


@dataclass(frozen=True, eq=False)
class Phi22Data:
    groupoid: LocalGroupoid
    data: HolSympGroupoidData
    W_base: FormField
    deck_arrows: JetMap
    deck_base: JetMap
    p: tuple
    w: tuple

    @property
    def Omega(self) -> FormField:
        return self.data.Omega


def _complex_pairs(offset, k):
    vs = _vars2(offset, 2 * k)
    return [vs[2 * i] + 1j * vs[2 * i + 1] for i in range(k)]


def _reim(zs):
    out = []
    for z in zs:
        out += [E.re(z), E.im(z)]
    return out


def phi22_fixture(margin: float = EPS_DOM, shift: float = DECK_SHIFT) -> Phi22Data:
    """The groupoid on ``(p1, p2, w1, w2)`` integrating ``w2 d/dw1 ^ d/dw2``."""
    arrow_names = ("p1r", "p1i", "p2r", "p2i", "w1r", "w1i", "w2r", "w2i")
    base_names = ("w1r", "w1i", "w2r", "w2i")

    def disc_ok(x):
        return math.hypot(x[2], x[3]) < 1 - margin

    def base_propose(rng):
        r = math.sqrt(rng.uniform()) * (1 - margin)
        th = rng.uniform(0, 2 * math.pi)
        if rng.uniform() < 0.15:
            r = 0.0
        return np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), r * math.cos(th), r * math.sin(th)])

    base = Chart(base_names, disc_ok, proposal=base_propose, label="phi22:base")

    def arrows_ok(g):
        w2 = complex(g[6], g[7])
        p2 = complex(g[2], g[3])
        return abs(w2) < 1 - margin and abs(w2 * np.exp(p2)) < 1 - margin

    def fibre_propose(rng):
        return rng.uniform(-0.8, 0.8, size=4)

    def arrows_propose(rng):
        return np.concatenate([fibre_propose(rng), base_propose(rng)])

    fib = Chart(("p1r", "p1i", "p2r", "p2i"), lambda q: True, proposal=fibre_propose, label="phi22:fibre")
    arrows = Chart(arrow_names, arrows_ok, proposal=arrows_propose, label="phi22:arrows")

    p1, p2, w1, w2 = _complex_pairs(0, 4)
    s = JetMap(8, tuple(_reim([w1, w2])))
    t = JetMap(8, tuple(_reim([w1 + w2 * p1, w2 * E.exp(p2)])))
    hp1, hp2, _, _ = _complex_pairs(0, 4)
    gp1, gp2, gw1, gw2 = _complex_pairs(8, 4)
    m = JetMap(16, tuple(_reim([gp1 + E.exp(gp2) * hp1, gp2 + hp2, gw1, gw2])))
    inv = JetMap(8, tuple(_reim([-p1 * E.exp(-p2), -p2, w1 + w2 * p1, w2 * E.exp(p2)])))
    bw1, bw2 = _complex_pairs(0, 2)
    ident = JetMap(4, tuple([E.ZERO] * 4 + _reim([bw1, bw2])))
    fibre = JetMap(8, tuple(_vars2(0, 8)))
    fcoords = JetMap(8, tuple(_vars2(0, 4)))
    G = LocalGroupoid(base, arrows, s, t, m, inv, ident, fibre, fcoords, fib, label="phi22")

    def d8(f):
        return FormField.differential(f, 8)

    Omega = (d8(w1 + w2 * p1) ^ d8(p2)) + (d8(p1) ^ d8(w2))
    W_base = FormField.differential(bw1, 4) ^ (FormField.differential(bw2, 4) * (1 / bw2))
    v8 = _vars2(0, 8)
    deck_a = JetMap(8, tuple(v8[:4] + [v8[4] + shift] + v8[5:]))
    v4 = _vars2(0, 4)
    deck_b = JetMap(4, tuple([v4[0] + shift] + v4[1:]))
    return Phi22Data(G, HolSympGroupoidData(G, Omega, "phi22"), W_base, deck_a, deck_b, (p1, p2), (w1, w2))


# ------------------------------------------------------------ covers and localizations


def hopf_cover(hopf: HopfData | None = None) -> HolomorphicCover:
    """The two-chart holomorphic cover ``{X1, X2}`` with gauges ``Re B1``, ``Re B2``."""
    h = hopf or hopf_fixture()
    return HolomorphicCover(
        charts=[h.charts["X1"], h.charts["X2"]],
        complex_structures=[h.I1, h.I2],
        poisson=h.P,
        gauges=[h.B1.re(), h.B2.re()],
        overlaps=[(0, 1)],
        label="hopf",
    )


def _overlap_chart(a: Chart, b: Chart, label: str) -> Chart:
    return Chart(a.names, lambda p: a.contains(p) and b.contains(p), proposal=a._propose, label=label)


def hopf_localization_fixture(hopf: HopfData | None = None) -> LocalizationData:
    """Pair groupoids over ``X1`` and ``X2`` with ``t*Z - s*Z`` and ``t*W - s*W``.

    The cross component over the overlap carries ``t*W - s*Z``; its pullback
    along the identity bisection is ``W - Z``, whose real part glues the charts.
    """
    h = hopf or hopf_fixture()
    X1, X2 = h.charts["X1"], h.charts["X2"]
    G1 = pair_groupoid(base=X1, label="hopf:G11")
    G2 = pair_groupoid(base=X2, label="hopf:G22")
    G12 = pair_groupoid(base=_overlap_chart(X1, X2, "hopf:X12"), label="hopf:G12")
    diag = [
        HolSympGroupoidData(G1, G1.t.pull(h.Z) - G1.s.pull(h.Z), "hopf:G11"),
        HolSympGroupoidData(G2, G2.t.pull(h.W) - G2.s.pull(h.W), "hopf:G22"),
    ]
    bis = {(0, 1): Bisection(G12.t.pull(h.W) - G12.s.pull(h.Z), G12.ident)}
    return LocalizationData([X1, X2], diag, bis, "hopf")


def modification_fixture(base: HolSympGroupoidData, B: FormField, rng=None, tol: float = 1e-8) -> LocalizationData:
    """Two copies of the base glued by the groupoid modified by ``B``.

    Chart 0 carries ``base``, chart 1 carries ``modify(base, B)``; the cross
    component is the same arrow space with ``Omega + t*B`` and the identity bisection.
    """
    G = base.groupoid
    modified = modify(base, B, rng=rng, tol=tol)
    cross = base.Omega + G.t.pull(B)
    return LocalizationData([G.base, G.base], [base, modified], {(0, 1): Bisection(cross, G.ident)}, "modification")
