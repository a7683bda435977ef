"""Local Lie groupoids in coordinates, multiplicative 2-forms and the gauge
modification of holomorphic symplectic groupoids.

Structure maps are :class:`~gcverify.calculus.JetMap` objects on real
coordinates.  Composable pairs ``(h, g)`` with ``s(h) = t(g)`` are
parametrized by ``(g, q)`` where ``h = fibre(q, t(g))`` runs through the
source fibre over ``t(g)``; pullbacks to the space of composable pairs are
computed on this parameter space, which embeds onto it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import expr as E
from .calculus import Chart, FormField, JetMap, MatrixField, exterior_d, pullback_matrix
from .errors import InconclusiveError, PreconditionError
from .gc_linear import check_gauge_condition
from .split_linear import numerical_rank

MIN_SAMPLES = 16
MAX_TRIES = 10_000

__all__ = [
    "LocalGroupoid",
    "MultiplicativeForm",
    "HolSympGroupoidData",
    "BaseDerivative",
    "ExtensionResult",
    "check_axioms",
    "check_multiplicative",
    "check_fibre_orthogonality",
    "differentiate_base",
    "modify",
    "verify_modification",
    "extend_multiplicative",
    "sample_composable",
]


def _vars(offset: int, n: int) -> list:
    return [E.var(offset + i) for i in range(n)]


@dataclass(frozen=True, eq=False)
class LocalGroupoid:
    """Coordinates, structure maps and composability of a local Lie groupoid.

    ``m`` acts on the concatenation ``(h, g)`` of two arrow points.
    ``fibre`` maps ``(q, x)`` to an arrow with source ``x``; ``fibre_coords``
    recovers ``q`` from an arrow, and ``fibre_chart`` samples ``q``.
    """

    base: Chart
    arrows: Chart
    s: JetMap
    t: JetMap
    m: JetMap
    inv: JetMap
    ident: JetMap
    fibre: JetMap
    fibre_coords: JetMap
    fibre_chart: Chart
    composable: Callable[[np.ndarray, np.ndarray], bool] | None = None
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.base.m

    @property
    def N(self) -> int:
        return self.arrows.m

    @property
    def k(self) -> int:
        return self.fibre_chart.m

    # pointwise evaluation -----------------------------------------------------
    def source(self, g) -> np.ndarray:
        return self.s.real(g)

    def target(self, g) -> np.ndarray:
        return self.t.real(g)

    def mult(self, h, g) -> np.ndarray:
        return self.m.real(np.concatenate([h, g]))

    def inverse(self, g) -> np.ndarray:
        return self.inv.real(g)

    def identity(self, x) -> np.ndarray:
        return self.ident.real(x)

    def arrow_over(self, q, x) -> np.ndarray:
        return self.fibre.real(np.concatenate([q, x]))

    def is_composable(self, h, g) -> bool:
        if not (self.arrows.contains(h) and self.arrows.contains(g)):
            return False
        if np.abs(self.source(h) - self.target(g)).max() > 1e-9 * (1 + np.abs(self.target(g)).max()):
            return False
        if self.composable is not None and not self.composable(h, g):
            return False
        try:
            return self.arrows.contains(self.mult(h, g))
        except (ValueError, ZeroDivisionError, OverflowError):
            return False

    # parametrizations -------------------------------------------------------
    def pair_maps(self) -> tuple[JetMap, JetMap, JetMap]:
        """Maps from ``(g, q)`` to ``h``, ``g`` and ``h g``."""
        if "pair" not in self._cache:
            N, k = self.N, self.k
            g = _vars(0, N)
            q = _vars(N, k)
            tg = [E.substitute(o, g) for o in self.t.outputs]
            h = [E.substitute(o, q + tg) for o in self.fibre.outputs]
            hg = [E.substitute(o, h + g) for o in self.m.outputs]
            dim = N + k
            self._cache["pair"] = (JetMap(dim, tuple(h)), JetMap(dim, tuple(g)), JetMap(dim, tuple(hg)))
        return self._cache["pair"]

    def word_maps(self, n: int) -> list[JetMap]:
        """Entries ``g_1..g_n`` of a word as maps of ``(g_1, q_2, .., q_n)``."""
        key = ("word", n)
        if key not in self._cache:
            N, k = self.N, self.k
            dim = N + (n - 1) * k
            entries = [_vars(0, N)]
            for i in range(1, n):
                q = _vars(N + (i - 1) * k, k)
                tprev = [E.substitute(o, entries[-1]) for o in self.t.outputs]
                entries.append([E.substitute(o, q + tprev) for o in self.fibre.outputs])
            self._cache[key] = [JetMap(dim, tuple(e)) for e in entries]
        return self._cache[key]

    def word_params(self, word: Sequence[np.ndarray]) -> np.ndarray:
        parts = [np.asarray(word[0], float)]
        for g in word[1:]:
            parts.append(self.fibre_coords.real(g))
        return np.concatenate(parts)


def sample_composable(G: LocalGroupoid, rng: np.random.Generator, n: int,
                      minimum: int = MIN_SAMPLES, max_tries: int = MAX_TRIES) -> list[tuple]:
    """Composable pairs as ``(h, g, params)`` with ``params = (g, q)``."""
    out = []
    tries = 0
    while len(out) < n and tries < max_tries:
        tries += 1
        g = G.arrows._propose(rng)
        if not G.arrows.contains(g):
            continue
        q = G.fibre_chart._propose(rng)
        if not G.fibre_chart.contains(q):
            continue
        try:
            h = G.arrow_over(q, G.target(g))
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        if G.is_composable(h, g):
            out.append((h, g, np.concatenate([g, q])))
    if len(out) < minimum:
        raise InconclusiveError(f"{G.label}: only {len(out)} composable pairs after {tries} tries")
    return out


def _diff(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def check_axioms(G: LocalGroupoid, rng: np.random.Generator, n: int = 64) -> dict:
    """Max residuals of the groupoid axioms over sampled instances."""
    res = {k: 0.0 for k in ("unit_source", "unit_target", "mult_source", "mult_target",
                            "left_unit", "right_unit", "inverse_right", "inverse_left", "associativity")}
    xs = G.base.sample(rng, n)
    for x in xs:
        e = G.identity(x)
        res["unit_source"] = max(res["unit_source"], _diff(G.source(e), x))
        res["unit_target"] = max(res["unit_target"], _diff(G.target(e), x))
    pairs = sample_composable(G, rng, n)
    for h, g, _ in pairs:
        hg = G.mult(h, g)
        res["mult_source"] = max(res["mult_source"], _diff(G.source(hg), G.source(g)))
        res["mult_target"] = max(res["mult_target"], _diff(G.target(hg), G.target(h)))
        res["left_unit"] = max(res["left_unit"], _diff(G.mult(G.identity(G.target(g)), g), g))
        res["right_unit"] = max(res["right_unit"], _diff(G.mult(g, G.identity(G.source(g))), g))
        gi = G.inverse(g)
        res["inverse_right"] = max(res["inverse_right"], _diff(G.mult(g, gi), G.identity(G.target(g))))
        res["inverse_left"] = max(res["inverse_left"], _diff(G.mult(gi, g), G.identity(G.source(g))))
    triples = 0
    tries = 0
    while triples < n and tries < MAX_TRIES:
        tries += 1
        h, g, _ = pairs[tries % len(pairs)]
        q = G.fibre_chart._propose(rng)
        if not G.fibre_chart.contains(q):
            continue
        k = G.arrow_over(q, G.target(h))
        if not (G.is_composable(k, h)):
            continue
        hg, kh = G.mult(h, g), G.mult(k, h)
        if not (G.is_composable(k, hg) and G.is_composable(kh, g)):
            continue
        triples += 1
        res["associativity"] = max(res["associativity"], _diff(G.mult(k, hg), G.mult(kh, g)))
    if triples < MIN_SAMPLES:
        raise InconclusiveError(f"{G.label}: only {triples} composable triples")
    res["samples"] = min(len(xs), len(pairs), triples)
    return res


@dataclass(frozen=True, eq=False)
class MultiplicativeForm:
    groupoid: LocalGroupoid
    theta: FormField

    def residual(self, rng, n: int = 64) -> float:
        return check_multiplicative(self.groupoid, self.theta, rng, n)


def multiplicativity_defect(G: LocalGroupoid, theta: FormField, params) -> np.ndarray:
    """``m^* theta - p1^* theta - p2^* theta`` at a composable-pair parameter."""
    ph, pg, pm = G.pair_maps()
    return (pullback_matrix(pm, theta, params) - pullback_matrix(ph, theta, params)
            - pullback_matrix(pg, theta, params))


def check_multiplicative(G: LocalGroupoid, theta: FormField, rng, n: int = 64) -> float:
    """Max entrywise residual of ``m^* theta = p1^* theta + p2^* theta`` (2-forms)."""
    worst = 0.0
    for _, _, u in sample_composable(G, rng, n):
        worst = max(worst, float(np.abs(multiplicativity_defect(G, theta, u)).max()))
    return worst


def _form_matrix(theta: FormField | MatrixField, g, part: str | None) -> np.ndarray:
    M = theta.at(g) if isinstance(theta, MatrixField) else theta.matrix_at(g)
    if part == "im":
        return np.imag(M)
    if part == "re":
        return np.real(M)
    return np.real_if_close(M)


def check_fibre_orthogonality(G: LocalGroupoid, omega: FormField, rng, n: int = 64,
                              part: str | None = None, points=None) -> float:
    """Max operator norm of ``s_* omega^{-1} t^*`` and ``t_* omega^{-1} s^*``."""
    pts = G.arrows.sample(rng, n) if points is None else points
    worst = 0.0
    for g in pts:
        w = _form_matrix(omega, g, part)
        if numerical_rank(w) < w.shape[0]:
            raise PreconditionError(f"form is degenerate at arrow {np.asarray(g).tolist()}")
        wi = np.linalg.inv(w)
        S, T = G.s.jacobian(g), G.t.jacobian(g)
        worst = max(worst, float(np.linalg.norm(S @ wi @ T.T, 2)), float(np.linalg.norm(T @ wi @ S.T, 2)))
    return worst


@dataclass(frozen=True, eq=False)
class HolSympGroupoidData:
    """A local groupoid with multiplicative ``Omega = B + i omega``."""

    groupoid: LocalGroupoid
    Omega: FormField
    label: str = ""

    def B_at(self, g) -> np.ndarray:
        return self.Omega.matrix_at(g).real

    def omega_at(self, g) -> np.ndarray:
        return self.Omega.matrix_at(g).imag

    def I_at(self, g) -> np.ndarray:
        M = self.Omega.matrix_at(g)
        return np.linalg.solve(M.imag, M.real)

    def validate(self, rng, n: int = 64, points=None) -> dict:
        """Sampled invariants: nondegeneracy, closedness, ``I^2 = -1``."""
        pts = self.groupoid.arrows.sample(rng, n) if points is None else points
        res = {"min_singular_omega": np.inf, "closed": 0.0, "I_squared": 0.0}
        for g in pts:
            w = self.omega_at(g)
            res["min_singular_omega"] = min(res["min_singular_omega"], float(np.linalg.svd(w, compute_uv=False)[-1]))
            I = self.I_at(g)
            res["I_squared"] = max(res["I_squared"], float(np.abs(I @ I + np.eye(len(I))).max()))
            if self.Omega.m <= 8:
                res["closed"] = max(res["closed"], exterior_d(self.Omega, g).norm())
        res["samples"] = len(pts)
        return res


@dataclass(frozen=True, eq=False)
class BaseDerivative:
    """Complex structure and Poisson tensor induced on the base."""

    data: HolSympGroupoidData

    def _at_identity(self, x):
        G = self.data.groupoid
        e = G.identity(np.asarray(x, float))
        T = G.t.jacobian(e).real
        S = G.s.jacobian(e).real
        if numerical_rank(T) < G.n:
            raise PreconditionError(f"t is not a submersion at Id({np.asarray(x).tolist()})")
        return e, T, S

    def P(self, x) -> np.ndarray:
        e, T, _ = self._at_identity(x)
        wi = np.linalg.inv(self.data.omega_at(e))
        return T @ wi @ T.T

    def P_source(self, x) -> np.ndarray:
        e, _, S = self._at_identity(x)
        wi = np.linalg.inv(self.data.omega_at(e))
        return S @ wi @ S.T

    def I(self, x) -> np.ndarray:
        e, T, _ = self._at_identity(x)
        return T @ self.data.I_at(e) @ np.linalg.pinv(T)

    def holomorphy_residual(self, x) -> float:
        """``|t_* I - I_base t_*|`` at the identity over ``x``."""
        e, T, _ = self._at_identity(x)
        return float(np.abs(T @ self.data.I_at(e) - self.I(x) @ T).max())

    def as_fields(self) -> tuple[MatrixField, MatrixField]:
        return MatrixField(self.I, "I_base"), MatrixField(self.P, "P_base")


def differentiate_base(data: HolSympGroupoidData) -> BaseDerivative:
    return BaseDerivative(data)


def _pulled(G: LocalGroupoid, B: FormField) -> FormField:
    return G.t.pull(B) - G.s.pull(B)


def modify(data: HolSympGroupoidData, B_base: FormField, rng=None, n: int = 16,
           tol: float = 1e-8, points=None) -> HolSympGroupoidData:
    """``Omega + t^* B - s^* B`` after sampled checks of the preconditions."""
    G = data.groupoid
    if rng is None:
        rng = np.random.default_rng(0)
    pts = G.base.sample(rng, n) if points is None else points
    der = differentiate_base(data)
    for x in pts:
        if B_base.m <= 8:
            r = exterior_d(B_base, x).norm()
            if r > tol:
                raise PreconditionError(f"B is not closed (|dB| = {r:.3e})", r)
        Bx = B_base.matrix_at(x).real
        r = check_gauge_condition(der.I(x), der.P(x), Bx).modification
        if r > tol:
            raise PreconditionError(f"B violates the modification condition (residual {r:.3e})", r)
    return HolSympGroupoidData(G, data.Omega + _pulled(G, B_base), f"{data.label}+B")


def verify_modification(old: HolSympGroupoidData, new: HolSympGroupoidData, B_base: FormField,
                        rng, n: int = 64) -> dict:
    """Sampled postconditions of :func:`modify`."""
    G = old.groupoid
    res = {"multiplicative": check_multiplicative(G, new.Omega, rng, n)}
    C = _pulled(G, B_base)
    sq = law_arrows = 0.0
    for g in G.arrows.sample(rng, n):
        I1 = new.I_at(g)
        sq = max(sq, float(np.abs(I1 @ I1 + np.eye(len(I1))).max()))
        expect = old.I_at(g) + np.linalg.solve(old.omega_at(g), C.matrix_at(g).real)
        law_arrows = max(law_arrows, float(np.abs(I1 - expect).max()))
    res["I_squared"] = sq
    res["arrow_law"] = law_arrows
    d0, d1 = differentiate_base(old), differentiate_base(new)
    base_law = hol = 0.0
    for x in G.base.sample(rng, n):
        expect = d0.I(x) + d0.P(x) @ B_base.matrix_at(x).real
        base_law = max(base_law, float(np.abs(d1.I(x) - expect).max()))
        hol = max(hol, d1.holomorphy_residual(x))
    res["base_law"] = base_law
    res["t_holomorphic"] = hol
    return res


@dataclass(frozen=True)
class ExtensionResult:
    value: np.ndarray
    params: np.ndarray
    consistency: dict


def _compose_word_map(G: LocalGroupoid, n: int, i: int) -> JetMap:
    """Local composition ``m^n_i`` from (n+1)-word parameters to n-word parameters."""
    entries = [list(w.outputs) for w in G.word_maps(n + 1)]
    merged = [E.substitute(o, entries[i] + entries[i - 1]) for o in G.m.outputs]
    new = entries[: i - 1] + [merged] + entries[i + 1 :]
    outs = list(new[0])
    for e in new[1:]:
        outs += [E.substitute(o, e) for o in G.fibre_coords.outputs]
    dim = G.N + n * G.k
    return JetMap(dim, tuple(outs))


def extension_field(G: LocalGroupoid, F1: FormField, n: int) -> FormField:
    """``F_n = sum_i p_i^* F_1`` on the word-parameter space."""
    maps = G.word_maps(n)
    out = FormField(G.N + (n - 1) * G.k)
    for w in maps:
        out = out + w.pull(F1)
    return out


def extend_multiplicative(G: LocalGroupoid, F1: FormField, word: Sequence, check: bool = True) -> ExtensionResult:
    """Evaluate ``F_n`` at a composable word ``(g_1, .., g_n)`` with ``t(g_i) = s(g_{i+1})``.

    With ``check`` the local compositions of ``(g_1, .., g_n)`` are verified to
    pull ``F_{n-1}`` back to ``F_n`` at the word.
    """
    word = [np.asarray(g, float) for g in word]
    n = len(word)
    if n == 0:
        raise ValueError("empty word")
    for a, b in zip(word, word[1:]):
        if not G.is_composable(b, a):
            raise ValueError("word entries are not composable in sequence")
    u = G.word_params(word)
    Fn = extension_field(G, F1, n)
    value = Fn.matrix_at(u).real if np.allclose(Fn.matrix_at(u).imag, 0) else Fn.matrix_at(u)
    consistency = {}
    if check and n >= 2:
        Fm = extension_field(G, F1, n - 1)
        for i in range(1, n):
            mi = _compose_word_map(G, n - 1, i)
            consistency[i] = float(np.abs(pullback_matrix(mi, Fm, u) - Fn.matrix_at(u)).max())
    return ExtensionResult(value, u, consistency)
