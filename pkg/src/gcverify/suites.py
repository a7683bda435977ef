"""Named verification suites and deterministic JSON reports.

A suite is a list of :class:`Check` objects.  Each check draws from its own
generator ``default_rng([seed, crc32(key)])`` so results do not depend on
which other checks run or in what order.
"""
from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .calculus import (
    courant_bracket,
    courant_bracket_field,
    exterior_d,
    in_clifford_image,
    jacobian_det,
    pairing_field,
    pullback,
    pullback_matrix,
    twisted_d,
    wirtinger_jacobian_det,
)
from .cover_glue import (
    Bisection,
    HolomorphicCover,
    LocalizationData,
    differentiate_localization,
    reconstruct_gc,
    verify_cover,
)
from .errors import DomainError, InconclusiveError, PreconditionError
from .examples import (
    DECK_SHIFT,
    constant_form,
    hopf_cover,
    hopf_fixture,
    hopf_localization_fixture,
    modification_fixture,
    pair_groupoid,
    pair_groupoid_fixture,
    phi22_fixture,
    random_b_solution,
    standard_hol_symplectic,
)
from .expr import Jet, evaluate_many
from .gc_linear import (
    apply_b_transform,
    b_matrix,
    check_gauge_condition,
    classify,
    eigenbundle,
    gc_from_hol_poisson,
    gc_from_symplectic,
    parity_product,
    standard_symplectic,
    underlying_poisson,
)
from .groupoid import (
    HolSympGroupoidData,
    check_axioms,
    check_fibre_orthogonality,
    check_multiplicative,
    differentiate_base,
    extend_multiplicative,
    modify,
    verify_modification,
)
from .randomgen import (
    random_closed_three_form,
    random_polynomial,
    random_dirac,
    random_gc,
    random_isotropic,
    random_section,
    random_skew,
    random_split_space,
)
from .spinor import (
    annihilator,
    b_transform_spinor,
    collinearity_defect,
    form_exp,
    mukai_pairing,
)
from .split_linear import (
    SplitSpace,
    compose,
    graph_relation,
    identity_relation,
    induced_isometry,
    orthogonal_complement,
    principal_angle,
    reduce,
    relation_kernels,
    standard_pairing,
)

SCHEMA = 1
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
BELOW, ABOVE = "below", "above"
LINEAR_COUNT = 500
DIRAC_COUNT = 500
MODIFICATION_COUNT = 100

__all__ = [
    "Spec",
    "Check",
    "CheckResult",
    "Report",
    "RunConfig",
    "Fixtures",
    "SUITES",
    "suite_checks",
    "run_checks",
    "run_suite",
    "check_rng",
]


# ------------------------------------------------------------------ records


@dataclass(frozen=True)
class Spec:
    """One reported quantity: pass iff ``residual < tol`` (or ``> tol`` for controls)."""

    name: str
    anchor: str
    tol: float
    comparison: str = BELOW


@dataclass(frozen=True)
class Check:
    """Produces one or more residuals with a shared generator.

    ``run(rng, n)`` returns ``{spec.name: (residual, samples)}``.
    """

    specs: tuple
    run: Callable

    @property
    def key(self) -> str:
        return self.specs[0].name


@dataclass(frozen=True)
class CheckResult:
    name: str
    anchor: str
    samples: int
    max_residual: float | None
    tol: float
    status: str
    comparison: str
    message: str = ""

    def as_dict(self) -> dict:
        r = self.max_residual
        d = {
            "name": self.name,
            "anchor": self.anchor,
            "samples": int(self.samples),
            "max_residual": r if r is None or math.isfinite(r) else repr(r),
            "tol": self.tol,
            "status": self.status,
            "comparison": self.comparison,
        }
        if self.message:
            d["message"] = self.message
        return d


@dataclass(frozen=True)
class Report:
    label: str
    seed: int
    samples: int
    results: tuple

    @property
    def status(self) -> str:
        states = {r.status for r in self.results}
        if FAIL in states:
            return FAIL
        if INCONCLUSIVE in states:
            return INCONCLUSIVE
        return PASS

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 1, INCONCLUSIVE: 3}[self.status]

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "label": self.label,
            "seed": self.seed,
            "samples": self.samples,
            "status": self.status,
            "checks": [r.as_dict() for r in sorted(self.results, key=lambda r: r.name)],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def summary(self) -> str:
        lines = []
        for r in sorted(self.results, key=lambda r: r.name):
            res = "n/a" if r.max_residual is None else f"{r.max_residual:.3e}"
            op = "<" if r.comparison == BELOW else ">"
            line = f"{r.status.upper():13s}{r.name}  {res} {op} {r.tol:.1e}  [{r.samples}]"
            lines.append(line + (f"  ({r.message})" if r.message else ""))
        lines.append(f"{self.label}: {self.status} ({len(self.results)} checks)")
        return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    samples: int = 64
    tol: float | None = None


def check_rng(seed: int, key: str) -> np.random.Generator:
    return np.random.default_rng([int(seed) % 2**64, zlib.crc32(key.encode())])


def _evaluate(spec: Spec, value, tol_override) -> CheckResult:
    residual, samples = value
    tol = spec.tol if (tol_override is None or spec.comparison == ABOVE) else float(tol_override)
    residual = float(residual)
    if math.isnan(residual):
        ok = False
    elif spec.comparison == BELOW:
        ok = residual < tol
    else:
        ok = residual > tol
    return CheckResult(spec.name, spec.anchor, samples, residual, tol, PASS if ok else FAIL, spec.comparison)


def run_checks(checks, cfg: RunConfig, label: str = "") -> Report:
    results = []
    for chk in checks:
        rng = check_rng(cfg.seed, chk.key)
        try:
            values = chk.run(rng, cfg.samples)
        except InconclusiveError as exc:
            for s in chk.specs:
                results.append(CheckResult(s.name, s.anchor, 0, None, s.tol, INCONCLUSIVE, s.comparison, str(exc)))
            continue
        except (PreconditionError, DomainError, np.linalg.LinAlgError) as exc:
            # the data violate a hypothesis of the check: a mathematical failure
            for s in chk.specs:
                results.append(CheckResult(s.name, s.anchor, 0, None, s.tol, FAIL, s.comparison, str(exc)))
            continue
        for s in chk.specs:
            results.append(_evaluate(s, values[s.name], cfg.tol))
    return Report(label, cfg.seed, cfg.samples, tuple(results))


def _single(name, anchor, tol, fn, comparison=BELOW) -> Check:
    spec = Spec(name, anchor, tol, comparison)
    return Check((spec,), lambda rng, n: {name: fn(rng, n)})


def _maxover(pts, f) -> tuple[float, int]:
    return (max((float(f(p)) for p in pts), default=0.0), len(pts))


def _minover(pts, f) -> tuple[float, int]:
    return (min((float(f(p)) for p in pts), default=float("inf")), len(pts))


def _absmax(M) -> float:
    M = np.asarray(M)
    return float(np.abs(M).max()) if M.size else 0.0


# ------------------------------------------------------------------ fixtures


class Fixtures:
    """Lazily built fixtures shared by the checks of one run."""

    @cached_property
    def hopf(self):
        return hopf_fixture()

    @cached_property
    def hopf_cover(self) -> HolomorphicCover:
        return hopf_cover(self.hopf)

    @cached_property
    def phi22(self):
        return phi22_fixture()

    @cached_property
    def pair2(self):
        return pair_groupoid(m=2)

    @cached_property
    def pair4(self) -> HolSympGroupoidData:
        return pair_groupoid_fixture()


# ------------------------------------------------------------------ hopf


def hopf_checks(fx: Fixtures) -> list[Check]:
    h = fx.hopf
    ch = h.charts
    out = []

    def on(chart, fn, extra=None, reduce_=_maxover):
        def run(rng, n):
            return reduce_(ch[chart].sample(rng, n, extra=extra), fn)
        return run

    out.append(_single("hopf.dC_plus_H", "-H = dC", 1e-9,
                       on("C", lambda p: (exterior_d(h.C, p) + h.H.at(p)).norm())))
    out.append(_single("hopf.H_real", "H is a real 3-form", 1e-9,
                       on("C", lambda p: _absmax(h.H.at(p).coeffs.imag))))
    out.append(_single("hopf.rho_is_exp_C", "rho = exp(C)", 1e-9,
                       on("C", lambda p: (form_exp(h.C.at(p)) - h.rho.at(p)).norm())))
    out.append(_single("hopf.rho_twisted_closed", "(d + H)rho = 0", 1e-9,
                       on("C", lambda p: twisted_d(h.rho, h.H, p).norm())))
    out.append(_single("hopf.rho_integrable", "(d + H)rho in Clifford image of rho", 1e-8,
                       on("C", lambda p: in_clifford_image(twisted_d(h.rho, h.H, p), h.rho.at(p)))))
    out.append(_single("hopf.rho_prime_integrable", "(d + H)rho' in Clifford image of rho'", 1e-8,
                       on("prime", lambda p: in_clifford_image(twisted_d(h.rho_prime, h.H, p), h.rho_prime.at(p)))))

    def prime_divisor(rng, n):
        pts = ch["prime"].sample(rng, max(n // 4, 16), extra=lambda p: p[2] == 0 and p[3] == 0, minimum=16)
        return _maxover(pts, lambda p: in_clifford_image(twisted_d(h.rho_prime, h.H, p), h.rho_prime.at(p)))

    out.append(_single("hopf.rho_prime_integrable_on_divisor", "rho' integrable along x2 = 0", 1e-8, prime_divisor))
    out.append(_single("hopf.rho_prime_projective", "rho' spans the same line as rho", 1e-9,
                       on("prime", lambda p: collinearity_defect(h.rho_prime.at(p), h.rho.at(p)),
                          extra=lambda p: math.hypot(p[2], p[3]) > 1e-2)))
    out.append(_single("hopf.im_C_identity", "C - conj(C) as a wedge of d log terms", 1e-9,
                       on("C", lambda p: (h.C.at(p) - h.C.at(p).conj() - h.im_c_identity.at(p)).norm())))
    out.append(_single("hopf.im_W_equals_im_C", "Im W = Im C", 1e-9,
                       on("X2", lambda p: _absmax(h.W.matrix_at(p).imag - h.C.matrix_at(p).imag))))
    out.append(_single("hopf.B2_closed_form", "B2 = W - C in closed form", 1e-9,
                       on("X2", lambda p: (h.B2.at(p) - h.B2_closed.at(p)).norm())))
    out.append(_single("hopf.im_Z_equals_im_C", "Im Z = Im C", 1e-9,
                       on("X1", lambda p: _absmax(h.Z.matrix_at(p).imag - h.C.matrix_at(p).imag))))

    dw1, dw2 = h.dw()
    dz1, dz2 = h.dz()
    dwdw, dzdz = dw1 ^ dw2, dz1 ^ dz2

    def w_spinor(p):
        w2 = complex(evaluate_many([h.w2], list(map(float, p)))[0])
        lhs = b_transform_spinor(h.B2.matrix_at(p), h.rho.at(p)) * w2
        return (lhs - dwdw.at(p) - w2).norm()

    def z_spinor(p):
        z1, z2 = evaluate_many([h.z1, h.z2], list(map(float, p)))
        zz = complex(z1) * complex(z2)
        lhs = b_transform_spinor(h.B1.matrix_at(p), h.rho.at(p)) * zz
        return (lhs - dzdz.at(p) - zz).norm()

    out.append(_single("hopf.w_spinor", "w2 exp(B2) rho = w2 + dw1 dw2", 1e-8, on("X2", w_spinor)))
    out.append(_single("hopf.z_spinor", "z1 z2 exp(B1) rho = z1 z2 + dz1 dz2", 1e-8, on("X1", z_spinor)))

    wr = h.w_real_map()

    def R4(p):
        return float(np.dot(p, p)) ** 2

    out.append(_single("hopf.jacobian_w", "Jacobian determinant 4/R^4", 1e-9,
                       on("X2", lambda p: abs(jacobian_det(wr, p).real / (4 / R4(p)) - 1))))
    out.append(_single("hopf.jacobian_w_wirtinger", "Jacobian determinant 4/R^4 (complex route)", 1e-9,
                       on("X2", lambda p: abs(wirtinger_jacobian_det((h.w1, h.w2), p, [(0, 1), (2, 3)])
                                              / (4 / R4(p)) - 1))))
    out.append(_single("hopf.z_chart_nondegenerate", "z coordinates are a chart on the tube", 1e-6,
                       on("X1", lambda p: abs(wirtinger_jacobian_det((h.z1, h.z2), p, [(0, 1), (2, 3)])),
                          reduce_=_minover), ABOVE))

    def reality(p):
        p1, p2, q2 = evaluate_many([h.p1, h.p2, h.q2], list(map(float, p)))
        return max(abs(complex(p1).imag), abs(complex(p2).imag), abs(abs(complex(q2)) - 1))

    out.append(_single("hopf.p_real_q2_unit", "p1, p2 real and |q2| = 1", 1e-10, on("C", reality)))

    def deck_defect(F):
        return lambda p: (pullback(h.deck, F, p) - F.at(p)).norm()

    for nm, F in (("C", h.C), ("rho", h.rho), ("H", h.H)):
        out.append(_single(f"hopf.homogeneous_{nm}", f"{nm} homogeneous of degree 0", 1e-9,
                           on("C", deck_defect(F))))
    for nm, F, chart in (("W", h.W, "X2"), ("B2", h.B2, "X2"), ("Z", h.Z, "X1"),
                         ("B1", h.B1, "X1"), ("B12", h.B12, "X1")):
        extra = ch["X2"].contains if nm == "B12" else None
        out.append(_single(f"hopf.deck_invariant_{nm}", f"{nm} invariant under x -> 2x", 1e-9,
                           on(chart, deck_defect(F), extra=extra)))

    def w1_shift(p):
        w_big = complex(evaluate_many([h.w1], list(map(float, 2 * np.asarray(p))))[0])
        w_small = complex(evaluate_many([h.w1], list(map(float, p)))[0])
        return abs(w_big - w_small - DECK_SHIFT)

    out.append(_single("hopf.deck_shift_w1", "w1 -> w1 + log 4 under x -> 2x", 1e-9, on("X2", w1_shift)))

    # cover data on the overlap of X1 and X2
    cov = fx.hopf_cover
    both = ch["X2"].contains

    def overlap(fn, reduce_=_maxover):
        def run(rng, n):
            return reduce_(ch["X1"].sample(rng, n, extra=both, minimum=16), fn)
        return run

    def gauge(p):
        I1, I2, P = h.I1.at(p), h.I2.at(p), h.P.at(p)
        return I1, I2, P, h.B12.matrix_at(p).real

    def qb1(p):
        I1, I2, P, B = gauge(p)
        return _absmax(I1 + P @ B - I2)

    def qb2(p):
        I1, _, P, B = gauge(p)
        return check_gauge_condition(I1, P, B).max

    def agree(p):
        return _absmax(reconstruct_gc(cov, 0, p).matrix - reconstruct_gc(cov, 1, p).matrix)

    def ann(p):
        return principal_angle(annihilator(h.rho.at(p)), eigenbundle(reconstruct_gc(cov, 1, p)))

    out.append(_single("hopf.B12_closed", "B12 = B2 - B1 is closed", 1e-8,
                       overlap(lambda p: exterior_d(h.B12, p).norm())))
    out.append(_single("hopf.QB1", "I1 + P B12 = I2", 1e-8, overlap(qb1)))
    out.append(_single("hopf.QB2", "B12 I1 + I1^T B12 + B12 P B12 = 0", 1e-8, overlap(qb2)))
    out.append(_single("hopf.reconstruction_agreement", "chart reconstructions agree on overlaps", 1e-8,
                       overlap(agree)))
    out.append(_single("hopf.reconstruction_matches_spinor", "Ann(rho) = +i eigenbundle of reconstruction", 1e-8,
                       lambda rng, n: _maxover(ch["X2"].sample(rng, n), ann)))
    out.append(_single("hopf.B1_not_closed", "B1 is not closed (negative control)", 1e-3,
                       on("X1", lambda p: exterior_d(h.B1.re(), p).norm(), reduce_=_minover), ABOVE))
    out.append(_single("hopf.B2_not_closed", "B2 is not closed (negative control)", 1e-3,
                       on("X2", lambda p: exterior_d(h.B2.re(), p).norm(), reduce_=_minover), ABOVE))

    def cover_run(rng, n):
        rep = verify_cover(cov, rng, n)
        return rep.max_residual(), min(c.samples for c in rep.checks)

    out.append(_single("hopf.cover", "holomorphic cover {X1, X2} verifies", 1e-8, cover_run))
    return out


# ------------------------------------------------------------------ phi22


def phi22_checks(fx: Fixtures) -> list[Check]:
    ph = fx.phi22
    G = ph.groupoid
    arrows = G.arrows

    def on_divisor(g):
        return g[6] == 0 and g[7] == 0

    def off_divisor(g):
        return math.hypot(g[6], g[7]) > 0.05

    def axioms(rng, n):
        res = check_axioms(G, rng, n)
        k = res.pop("samples")
        return max(res.values()), k

    def sample(rng, n, extra=None, minimum=None):
        return arrows.sample(rng, n, extra=extra, minimum=minimum)

    def min_sv(g):
        return np.linalg.svd(ph.data.omega_at(g), compute_uv=False)[-1]

    def from_W(g):
        M = pullback_matrix(G.t, ph.W_base, g) - pullback_matrix(G.s, ph.W_base, g)
        return _absmax(ph.Omega.matrix_at(g) - M)

    def base_points(rng, n, extra=None):
        return G.base.sample(rng, n, extra=extra)

    der = differentiate_base(ph.data)

    def base_poisson(x):
        return _absmax(der.P(x) - np.linalg.inv(ph.W_base.matrix_at(x).imag))

    def deck(g):
        r = max(_absmax(G.source(ph.deck_arrows(g).real) - ph.deck_base(G.source(g)).real),
                _absmax(G.target(ph.deck_arrows(g).real) - ph.deck_base(G.target(g)).real))
        return max(r, _absmax(pullback_matrix(ph.deck_arrows, ph.Omega, g) - ph.Omega.matrix_at(g)))

    quarter = lambda n: max(16, n // 4)  # noqa: E731
    return [
        _single("phi22.axioms", "local groupoid axioms", 1e-9, axioms),
        _single("phi22.multiplicative", "m*Omega = p1*Omega + p2*Omega", 1e-8,
                lambda rng, n: (check_multiplicative(G, ph.Omega, rng, n), n)),
        _single("phi22.closed", "d Omega = 0", 1e-8,
                lambda rng, n: _maxover(sample(rng, n), lambda g: exterior_d(ph.Omega, g).norm())),
        _single("phi22.closed_on_divisor", "d Omega = 0 along w2 = 0", 1e-8,
                lambda rng, n: _maxover(sample(rng, quarter(n), on_divisor, 16),
                                        lambda g: exterior_d(ph.Omega, g).norm())),
        _single("phi22.nondegenerate", "Im Omega nondegenerate", 1e-6,
                lambda rng, n: _minover(sample(rng, n), min_sv), ABOVE),
        _single("phi22.nondegenerate_on_divisor", "Omega extends nondegenerately over w2 = 0", 1e-6,
                lambda rng, n: _minover(sample(rng, quarter(n), on_divisor, 16), min_sv), ABOVE),
        _single("phi22.I_squared", "(Im^-1 Re Omega)^2 = -1", 1e-9,
                lambda rng, n: (ph.data.validate(rng, n)["I_squared"], n)),
        _single("phi22.Omega_from_W", "Omega = t*W - s*W with W = dw1 ^ dlog w2", 1e-8,
                lambda rng, n: _maxover(sample(rng, n, off_divisor), from_W)),
        _single("phi22.fibre_orthogonality", "s_* omega^-1 t^* = t_* omega^-1 s^* = 0", 1e-8,
                lambda rng, n: (check_fibre_orthogonality(G, ph.Omega, rng, n, part="im"), n)),
        _single("phi22.base_poisson", "t_*(omega^-1) = (Im W)^-1", 1e-8,
                lambda rng, n: _maxover(base_points(rng, n, lambda x: math.hypot(x[2], x[3]) > 0.05),
                                        base_poisson)),
        _single("phi22.source_anti_poisson", "s_*(omega^-1) = -t_*(omega^-1)", 1e-9,
                lambda rng, n: _maxover(base_points(rng, n), lambda x: _absmax(der.P_source(x) + der.P(x)))),
        _single("phi22.t_holomorphic", "t is holomorphic", 1e-9,
                lambda rng, n: _maxover(base_points(rng, n), der.holomorphy_residual)),
        _single("phi22.deck_equivariance", "structure maps commute with w1 -> w1 + log 4", 1e-9,
                lambda rng, n: _maxover(sample(rng, n), deck)),
    ]


# ------------------------------------------------------------------ pair groupoids


def pair_checks(fx: Fixtures) -> list[Check]:
    d = fx.pair4
    G = d.groupoid
    Om = standard_hol_symplectic(4)
    der = differentiate_base(d)

    def axioms(GG):
        def run(rng, n):
            res = check_axioms(GG, rng, n)
            k = res.pop("samples")
            return max(res.values()), k
        return run

    # constant symplectic form on the arrows coupling source and target directions
    k = Om.shape[0]
    bad = constant_form(np.block([[Om.imag, 0.3 * np.eye(k)], [-0.3 * np.eye(k), -Om.imag]]))

    def base(fn):
        return lambda rng, n: _maxover(G.base.sample(rng, n), fn)

    def extension(rng, n):
        G2 = fx.pair2
        w = constant_form(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        F1 = G2.t.pull(w) - G2.s.pull(w)
        worst, count = 0.0, max(4, n // 8)
        for _ in range(count):
            g1 = G2.arrows.sample(rng, 1)[0]
            g2 = G2.arrow_over(G2.base.sample(rng, 1)[0], G2.target(g1))
            g3 = G2.arrow_over(G2.base.sample(rng, 1)[0], G2.target(g2))
            r = extend_multiplicative(G2, F1, [g1, g2, g3])
            worst = max(worst, max(r.consistency.values()))
        return worst, count

    def near_far(rng, n):
        near = [G.identity(x) + 1e-3 * rng.normal(size=G.N) for x in G.base.sample(rng, n)]
        near = [g for g in near if G.arrows.contains(g)]
        far = G.arrows.sample(rng, n)
        m_near = min(np.linalg.svd(d.omega_at(g), compute_uv=False)[-1] for g in near)
        m_far = min(np.linalg.svd(d.omega_at(g), compute_uv=False)[-1] for g in far)
        return abs(m_far - m_near) / m_near, len(near) + len(far)

    return [
        _single("pair.m2.axioms", "pair groupoid axioms (real dimension 2)", 1e-9, axioms(fx.pair2)),
        _single("pair.m4.axioms", "pair groupoid axioms (real dimension 4)", 1e-9, axioms(G)),
        _single("pair.multiplicative", "t*Omega0 - s*Omega0 is multiplicative", 1e-9,
                lambda rng, n: (check_multiplicative(G, d.Omega, rng, n), n)),
        _single("pair.closed_and_I_squared", "Omega closed with (Im^-1 Re)^2 = -1", 1e-9,
                lambda rng, n: (max(v for k, v in d.validate(rng, n).items() if k in ("closed", "I_squared")), n)),
        _single("pair.fibre_orthogonality", "s_* omega^-1 t^* = t_* omega^-1 s^* = 0", 1e-9,
                lambda rng, n: (check_fibre_orthogonality(G, d.Omega, rng, n, part="im"), n)),
        _single("pair.fibre_orthogonality_control", "non-multiplicative form breaks orthogonality", 1e-3,
                lambda rng, n: (check_fibre_orthogonality(G, bad, rng, n), n), ABOVE),
        _single("pair.base_poisson", "t_*(omega^-1) = (Im Omega0)^-1", 1e-9,
                base(lambda x: _absmax(der.P(x) - np.linalg.inv(Om.imag)))),
        _single("pair.source_anti_poisson", "s_*(omega^-1) = -t_*(omega^-1)", 1e-9,
                base(lambda x: _absmax(der.P_source(x) + der.P(x)))),
        _single("pair.base_complex", "I_base = (Im Omega0)^-1 Re Omega0", 1e-9,
                base(lambda x: _absmax(der.I(x) - np.linalg.solve(Om.imag, Om.real)))),
        _single("pair.extension_consistency", "F_n = sum p_i* F_1 is compatible with local composition",
                1e-8, extension),
        _single("pair.near_far_nondegeneracy", "nondegeneracy near Id matches far from Id", 1e-9, near_far),
    ]


# ------------------------------------------------------------------ modification


def modification_checks(fx: Fixtures) -> list[Check]:
    d = fx.pair4
    G = d.groupoid
    Om = standard_hol_symplectic(4)
    names = ["B_condition", "multiplicative", "I_squared", "arrow_law", "base_law",
             "t_holomorphic", "fibre_orthogonality"]
    anchors = {
        "B_condition": "B I + I^T B + B P B = 0 for generated B",
        "multiplicative": "Omega + t*B - s*B is multiplicative",
        "I_squared": "modified arrow structure squares to -1",
        "arrow_law": "I1 = I0 + omega^-1 (t*B - s*B)",
        "base_law": "I1_base = I0_base + P B",
        "t_holomorphic": "t holomorphic for the modified structures",
        "fibre_orthogonality": "s_* omega1^-1 t^* = 0 after modification",
    }
    tols = {"B_condition": 1e-12}

    def run(rng, n):
        res = {k: 0.0 for k in names}
        per = 16  # the sampling floor for composable pairs
        der = differentiate_base(d)
        x0 = G.base.sample(rng, 1)[0]
        I0, P0 = der.I(x0), der.P(x0)
        for _ in range(MODIFICATION_COUNT):
            B = random_b_solution(Om, rng)
            res["B_condition"] = max(res["B_condition"], check_gauge_condition(I0, P0, B).modification)
            Bf = constant_form(B)
            new = modify(d, Bf, rng, n=per, tol=1e-9)
            v = verify_modification(d, new, Bf, rng, per)
            for k in ("multiplicative", "I_squared", "arrow_law", "base_law", "t_holomorphic"):
                res[k] = max(res[k], v[k])
            res["fibre_orthogonality"] = max(res["fibre_orthogonality"],
                                             check_fibre_orthogonality(G, new.Omega, rng, per, part="im"))
        return {f"modification.{k}": (v, MODIFICATION_COUNT) for k, v in res.items()}

    specs = tuple(Spec(f"modification.{k}", anchors[k], tols.get(k, 1e-9)) for k in names)

    def zero(rng, n):
        new = modify(d, constant_form(np.zeros((4, 4))), rng)
        return _maxover(G.arrows.sample(rng, n), lambda g: _absmax(new.Omega.matrix_at(g) - d.Omega.matrix_at(g)))

    def additive(rng, n):
        worst = 0.0
        count = max(4, n // 16)
        for _ in range(count):
            B = random_b_solution(Om, rng)
            B2 = random_b_solution(Om + B, rng)
            one = modify(modify(d, constant_form(B), rng), constant_form(B2), rng)
            both = modify(d, constant_form(B + B2), rng)
            for g in G.arrows.sample(rng, 4):
                worst = max(worst, _absmax(one.Omega.matrix_at(g) - both.Omega.matrix_at(g)))
        return worst, count

    def rejects(rng, n):
        worst = float("inf")
        count = max(4, n // 16)
        for _ in range(count):
            try:
                modify(d, constant_form(random_skew(4, rng)), rng)
                return 0.0, count
            except PreconditionError as exc:
                worst = min(worst, exc.residual)
        return worst, count

    return [
        Check(specs, run),
        _single("modification.zero", "B = 0 leaves the groupoid unchanged", 1e-12, zero),
        _single("modification.additive", "modifying by B then B' equals modifying by B + B'", 1e-9, additive),
        _single("modification.rejects_generic_B", "generic B violates the modification condition", 1e-3,
                rejects, ABOVE),
    ]


# ------------------------------------------------------------------ linear algebra


def linear_checks(fx: Fixtures, ms=(2, 4, 6)) -> list[Check]:
    out = []
    for m in ms:
        keys = ["square", "orthogonal", "btransform_invariants", "btransform_composition",
                "eigenbundle_isotropic", "eigenbundle_transverse", "spinor_annihilator", "pure",
                "mukai_nonvanishing", "mukai_b_invariant"]
        anchors = {
            "square": "J^2 = -1",
            "orthogonal": "J preserves the pairing",
            "btransform_invariants": "B-transform preserves J^2 = -1, orthogonality, Poisson tensor, rank, type",
            "btransform_composition": "exp(B') exp(B) = exp(B + B')",
            "eigenbundle_isotropic": "+i eigenbundle isotropic",
            "eigenbundle_transverse": "L and conj(L) transverse (smallest singular value)",
            "spinor_annihilator": "Ann(rho) = +i eigenbundle",
            "pure": "dim Ann(rho) = m",
            "mukai_nonvanishing": "|(rho, conj rho)| > 0 for real rank zero",
            "mukai_b_invariant": "Mukai pairing invariant under real B",
        }
        above = {"eigenbundle_transverse": 1e-6, "mukai_nonvanishing": 1e-10}
        tols = {"spinor_annihilator": 1e-8}
        specs = tuple(
            Spec(f"linear.m{m}.{k}", anchors[k], above.get(k, tols.get(k, 1e-9)), ABOVE if k in above else BELOW)
            for k in keys
        )

        def run(rng, n, m=m):
            res = {k: 0.0 for k in keys}
            res["eigenbundle_transverse"] = res["mukai_nonvanishing"] = float("inf")
            G = standard_pairing(m)
            for _ in range(LINEAR_COUNT):
                J, rho = random_gc(m, rng)
                M = J.matrix
                s = max(1.0, _absmax(M)) ** 2
                res["square"] = max(res["square"], _absmax(M @ M + np.eye(2 * m)) / s)
                res["orthogonal"] = max(res["orthogonal"], _absmax(M.T @ G @ M - G) / s)
                B, B2 = random_skew(m, rng, 0.5), random_skew(m, rng, 0.5)
                JB = apply_b_transform(J, B)
                MB = JB.matrix
                sb = max(1.0, _absmax(MB)) ** 2
                c0, c1 = classify(J), classify(JB)
                inv = max(_absmax(MB @ MB + np.eye(2 * m)) / sb, _absmax(MB.T @ G @ MB - G) / sb,
                          _absmax(underlying_poisson(JB) - underlying_poisson(J)),
                          float(c0 != c1))
                res["btransform_invariants"] = max(res["btransform_invariants"], inv)
                comp = _absmax(apply_b_transform(JB, B2).matrix - apply_b_transform(J, B + B2).matrix) / sb
                res["btransform_composition"] = max(res["btransform_composition"], comp)
                L = eigenbundle(J)
                res["eigenbundle_isotropic"] = max(res["eigenbundle_isotropic"], L.isotropy_defect())
                sv = np.linalg.svd(np.hstack([L.basis, L.basis.conj()]), compute_uv=False)[-1]
                res["eigenbundle_transverse"] = min(res["eigenbundle_transverse"], float(sv))
                A = annihilator(rho)
                res["pure"] = max(res["pure"], float(abs(A.dim - m)))
                res["spinor_annihilator"] = max(res["spinor_annihilator"], principal_angle(A, L))
                rn = rho * (1.0 / rho.norm())
                res["mukai_nonvanishing"] = min(res["mukai_nonvanishing"], abs(mukai_pairing(rn, rn.conj())))
                other = rn.conj()
                mb = abs(mukai_pairing(b_transform_spinor(B, rn), b_transform_spinor(B, other))
                         - mukai_pairing(rn, other))
                res["mukai_b_invariant"] = max(res["mukai_b_invariant"], mb)
            return {f"linear.m{m}.{k}": (v, LINEAR_COUNT) for k, v in res.items()}

        out.append(Check(specs, run))

    def gauge_blocks(rng, n):
        worst = 0.0
        count = max(8, n)
        for _ in range(count):
            m = int(rng.choice([4, 8]))
            Om = standard_hol_symplectic(m)
            g = np.linalg.qr(rng.normal(size=(m, m)))[0] + 2 * np.eye(m)
            Om = g.T @ Om @ g
            I = np.linalg.solve(Om.imag, Om.real)
            P = np.linalg.inv(Om.imag)
            B = random_b_solution(Om, rng)
            J = apply_b_transform(gc_from_hol_poisson(I, P), B).matrix
            Jn = I + P @ B
            expect = np.block([[-Jn, P], [np.zeros((m, m)), Jn.T]])
            worst = max(worst, _absmax(J - expect) / max(1.0, _absmax(J)))
        return worst, count

    def parity(rng, n):
        J = gc_from_symplectic(standard_symplectic(2))
        c0, c1 = classify(J), classify(parity_product(J))
        c2 = classify(parity_product(parity_product(J)))
        ok = (c0.poisson_rank, c0.parity_ok, c1.poisson_rank, c1.parity_ok, c2.poisson_rank) == (2, False, 4, True, 6)
        return (0.0 if ok else 1.0), 1

    out.append(_single("linear.gauge_block_form", "e^B I_{I,P} e^-B = [[-J, P], [0, J^T]] with J = I + PB",
                       1e-9, gauge_blocks))
    out.append(_single("linear.parity_product", "product with the symplectic plane shifts rank by 2", 0.5, parity))
    return out


# ------------------------------------------------------------------ Dirac relations


def dirac_checks(fx: Fixtures) -> list[Check]:
    keys = ["composition_isotropic", "associativity", "reduction_nondegenerate", "kernel_isometry",
            "kernel_dimensions", "double_complement", "b_transform_composition", "identity_unit"]
    anchors = {
        "composition_isotropic": "compositions are maximal isotropic",
        "associativity": "(D3 D2) D1 = D3 (D2 D1)",
        "reduction_nondegenerate": "K^perp / K has nondegenerate pairing (smallest singular value)",
        "kernel_isometry": "D induces an isometry between reductions by its kernels",
        "kernel_dimensions": "dim left kernel = dim right kernel for equal dimensions",
        "double_complement": "(S^perp)^perp = S",
        "b_transform_composition": "graph(e^B) o graph(e^B') = graph(e^(B+B'))",
        "identity_unit": "identity o D = D",
    }
    above = {"reduction_nondegenerate": 1e-6}
    specs = tuple(Spec(f"dirac.{k}", anchors[k], above.get(k, 1e-9), ABOVE if k in above else BELOW) for k in keys)

    def run(rng, n):
        res = {k: 0.0 for k in keys}
        res["reduction_nondegenerate"] = float("inf")
        for _ in range(DIRAC_COUNT):
            ms = rng.integers(1, 5, size=4)
            U, V, W, X = (random_split_space(int(k), rng) for k in ms)
            D1, D2, D3 = random_dirac(U, V, rng), random_dirac(V, W, rng), random_dirac(W, X, rng)
            D21 = compose(D2, D1)
            res["composition_isotropic"] = max(res["composition_isotropic"], D21.graph.isotropy_defect(),
                                               float(2 * D21.graph.dim != U.dim + W.dim))
            a = compose(compose(D3, D2), D1)
            b = compose(D3, D21)
            res["associativity"] = max(res["associativity"], principal_angle(a.graph, b.graph))
            K = random_isotropic(V, int(rng.integers(0, V.dim // 2 + 1)), rng)
            red = reduce(V, K)
            if red.space.dim:
                sv = np.linalg.svd(red.space.pairing, compute_uv=False)[-1]
                res["reduction_nondegenerate"] = min(res["reduction_nondegenerate"], float(sv))
            M, rs, rt = induced_isometry(D2)
            res["kernel_isometry"] = max(res["kernel_isometry"], _absmax(M.T @ rt.space.pairing @ M - rs.space.pairing))
            Dsq = random_dirac(V, random_split_space(V.dim // 2, rng), rng)
            left, right = relation_kernels(Dsq)
            res["kernel_dimensions"] = max(res["kernel_dimensions"], float(abs(left.dim - right.dim)))
            S = random_isotropic(V, int(rng.integers(0, V.dim + 1)) // 2, rng)
            if rng.uniform() < 0.5:
                S = S.sum(random_isotropic(V, 1, rng))
            res["double_complement"] = max(res["double_complement"],
                                           principal_angle(orthogonal_complement(orthogonal_complement(S)), S))
            m = int(ms[0])
            Bs, Bt = random_skew(m, rng), random_skew(m, rng)
            Vs = SplitSpace.standard(m)
            g = compose(graph_relation(b_matrix(Bs), Vs), graph_relation(b_matrix(Bt), Vs))
            res["b_transform_composition"] = max(res["b_transform_composition"],
                                                 principal_angle(g.graph, graph_relation(b_matrix(Bs + Bt), Vs).graph))
            res["identity_unit"] = max(res["identity_unit"],
                                       principal_angle(compose(identity_relation(V), D1).graph, D1.graph))
        return {f"dirac.{k}": (v, DIRAC_COUNT) for k, v in res.items()}

    return [Check(specs, run)]


# ------------------------------------------------------------------ Courant axioms


def courant_checks(fx: Fixtures, m: int = 4) -> list[Check]:
    keys = ["jacobi", "leibniz", "symmetric_part", "invariance"]
    anchors = {
        "jacobi": "[u,[v,w]] = [[u,v],w] + [v,[u,w]]",
        "leibniz": "[u, f v] = (rho(u) f) v + f [u, v]",
        "symmetric_part": "[u, u] = 1/2 rho* d<u, u>",
        "invariance": "rho(u) <v, v> = 2 <[u, v], v>",
    }
    specs = tuple(Spec(f"courant.{k}", anchors[k], 1e-8) for k in keys)

    def grad(f, p):
        env = [Jet.variable(p[i], i, m, 1) for i in range(m)]
        j = evaluate_many([f], env)[0]
        return (j.value, j.grad) if isinstance(j, Jet) else (complex(j), np.zeros(m))

    def pair(a, b):
        return 0.5 * (a[m:] @ b[:m] + b[m:] @ a[:m])

    def run(rng, n):
        res = {k: 0.0 for k in keys}
        sets = max(4, n // 16)
        per = max(1, n // sets)
        count = 0
        for _ in range(sets):
            u, v, w = (random_section(m, rng) for _ in range(3))
            H = random_closed_three_form(m, rng)
            f = random_polynomial(m, rng, 2, 0.5)
            vw = courant_bracket_field(v, w, H)
            uw = courant_bracket_field(u, w, H)
            uv = courant_bracket_field(u, v, H)
            uu_pair = pairing_field(u, u)
            vv_pair = pairing_field(v, v)
            fv = v.scale(f)
            for p in rng.uniform(-1, 1, size=(per, m)):
                count += 1
                lhs = courant_bracket(u, vw, H, p)
                rhs = courant_bracket(uv, w, H, p) + courant_bracket(v, uw, H, p)
                res["jacobi"] = max(res["jacobi"], _absmax(lhs - rhs))
                fval, fgrad = grad(f, p)
                U = u.at(p)
                lhs = courant_bracket(u, fv, H, p)
                rhs = (fgrad @ U[:m]) * v.at(p) + fval * courant_bracket(u, v, H, p)
                res["leibniz"] = max(res["leibniz"], _absmax(lhs - rhs))
                _, dpair = grad(uu_pair, p)
                half_anchor_dual = np.concatenate([np.zeros(m), dpair])  # rho* = 2 x (covector inclusion)
                res["symmetric_part"] = max(res["symmetric_part"],
                                            _absmax(courant_bracket(u, u, H, p) - half_anchor_dual))
                _, dvv = grad(vv_pair, p)
                lhs = dvv @ U[:m]
                rhs = 2 * pair(courant_bracket(u, v, H, p), v.at(p))
                res["invariance"] = max(res["invariance"], abs(lhs - rhs))
        return {f"courant.{k}": (val, count) for k, val in res.items()}

    return [Check(specs, run)]


# ------------------------------------------------------------------ localization


def localization_checks(fx: Fixtures) -> list[Check]:
    d = fx.pair4
    G = d.groupoid
    Om = standard_hol_symplectic(4)

    def roundtrip(rng, n):
        worst, cov_worst = 0.0, 0.0
        count = max(4, n // 16)
        for _ in range(count):
            B = random_b_solution(Om, rng)
            cov = differentiate_localization(modification_fixture(d, constant_form(B), rng))
            for x in G.base.sample(rng, 4):
                worst = max(worst, _absmax(cov.gluing(0, 1).matrix_at(x) - B))
            cov_worst = max(cov_worst, verify_cover(cov, rng, 16).max_residual())
        return {"localization.modification_roundtrip": (worst, count),
                "localization.modification_cover": (cov_worst, count)}

    def trivial(rng, n):
        loc = LocalizationData([G.base, G.base], [d, d], {(0, 1): Bisection(d.Omega, G.ident)}, "trivial")
        cov = differentiate_localization(loc)
        I0 = np.linalg.solve(Om.imag, Om.real)
        P0 = np.linalg.inv(Om.imag)

        def defect(x):
            return max(_absmax(cov.gluing(0, 1).matrix_at(x)), _absmax(cov.complex_structures[0].at(x) - I0),
                       _absmax(cov.poisson.at(x) - P0))
        return _maxover(G.base.sample(rng, n), defect)

    def hopf_loc(rng, n):
        h = fx.hopf
        cov = differentiate_localization(hopf_localization_fixture(h))
        rep = verify_cover(cov, rng, max(16, n // 2))
        pts = h.charts["X1"].sample(rng, max(16, n // 4), extra=h.charts["X2"].contains)
        glue = max(_absmax(cov.gluing(0, 1).matrix_at(p) - h.B12.matrix_at(p)) for p in pts)
        return {"localization.hopf_cover": (rep.max_residual(), min(c.samples for c in rep.checks)),
                "localization.hopf_gluing": (glue, len(pts))}

    def refinement(rng, n):
        h = fx.hopf
        base = fx.hopf_cover
        refined = HolomorphicCover(base.charts + [base.charts[1]], base.complex_structures + [h.I2],
                                   base.poisson, list(base.gauges) + [base.gauges[1]], label="hopf:refined")
        pts = h.charts["X2"].sample(rng, n)
        worst = 0.0
        for p in pts:
            J = reconstruct_gc(base, 1, p).matrix
            worst = max(worst, _absmax(reconstruct_gc(refined, 2, p).matrix - J),
                        _absmax(reconstruct_gc(refined, 1, p).matrix - J))
        return worst, len(pts)

    def poisson(rng, n):
        h = fx.hopf
        cov = fx.hopf_cover
        worst = 0.0
        pts = []
        for i, name in enumerate(("X1", "X2")):
            for p in h.charts[name].sample(rng, max(16, n // 2)):
                pts.append(p)
                worst = max(worst, _absmax(underlying_poisson(reconstruct_gc(cov, i, p)) - h.P.at(p)))
        return worst, len(pts)

    return [
        Check((Spec("localization.modification_roundtrip", "differentiated gluing equals the modifying B", 1e-8),
               Spec("localization.modification_cover", "differentiated modification cover verifies", 1e-8)),
              roundtrip),
        _single("localization.trivial", "identical charts glue by B = 0 and recover (I, P)", 1e-9, trivial),
        Check((Spec("localization.hopf_cover", "differentiated Hopf localization verifies", 1e-8),
               Spec("localization.hopf_gluing", "differentiated gluing equals Re(W - Z)", 1e-8)), hopf_loc),
        _single("localization.refinement", "redundant chart changes no reconstruction", 1e-10, refinement),
        _single("localization.poisson_invariance", "reconstructions have Poisson tensor P", 1e-9, poisson),
    ]


SUITES: dict = {
    "hopf": hopf_checks,
    "phi22": phi22_checks,
    "pair-groupoid": pair_checks,
    "modification": modification_checks,
    "linear": linear_checks,
    "dirac": dirac_checks,
    "courant": courant_checks,
    "localization": localization_checks,
}


def suite_checks(name: str, fx: Fixtures | None = None) -> list[Check]:
    fx = fx or Fixtures()
    if name == "all":
        return [c for key in SUITES for c in SUITES[key](fx)]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](fx)


def run_suite(name: str, cfg: RunConfig | None = None, fx: Fixtures | None = None) -> Report:
    cfg = cfg or RunConfig()
    return run_checks(suite_checks(name, fx), cfg, name)
