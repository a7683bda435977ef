"""Holomorphic covers: chart-wise holomorphic Poisson data glued by B-fields.

All charts of a cover are subdomains of one ambient coordinate space, so
fields from different charts can be compared at the same point.  Gauge
convention: on chart ``i`` the structure is ``exp(-B_i) I_{I_i,P} exp(B_i)``,
and the gluing field is ``B_ij = B_j - B_i`` with ``I_j = I_i + P B_ij``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .calculus import Chart, FormField, JetMap, MatrixField, exterior_d
from .errors import DomainError, InconclusiveError
from .gc_linear import GCStructure, apply_b_transform, check_gauge_condition, classify, gc_from_hol_poisson
from .groupoid import differentiate_base

MIN_OVERLAP = 16

__all__ = [
    "HolomorphicCover",
    "CoverCheck",
    "CoverReport",
    "Bisection",
    "LocalizationData",
    "verify_cover",
    "reconstruct_gc",
    "differentiate_localization",
    "classify_at",
]


@dataclass(frozen=True, eq=False)
class HolomorphicCover:
    charts: list
    complex_structures: list
    poisson: MatrixField
    gauges: list | None = None
    gluings: dict | None = None
    overlaps: list | None = None
    label: str = ""
    _derived: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        k = len(self.charts)
        if len(self.complex_structures) != k:
            raise ValueError("one complex structure per chart is required")
        if self.gauges is None and self.gluings is None and k > 1:
            raise ValueError("a cover needs gauge fields or gluing fields")
        if self.gauges is not None and len(self.gauges) != k:
            raise ValueError("one gauge field per chart is required")

    @property
    def overlap_pairs(self) -> list:
        if self.overlaps is not None:
            return list(self.overlaps)
        if self.gluings is not None:
            return sorted(self.gluings)
        k = len(self.charts)
        return [(i, j) for i in range(k) for j in range(i + 1, k)]

    def gluing(self, i: int, j: int) -> FormField:
        """``B_ij`` as a real 2-form field."""
        if self.gluings is not None:
            if (i, j) in self.gluings:
                return self.gluings[(i, j)]
            if (j, i) in self.gluings:
                return -self.gluings[(j, i)]
        if self.gauges is not None:
            return (self.gauges[j] - self.gauges[i]).re()
        raise KeyError(f"no gluing data between charts {i} and {j}")

    def gauge(self, i: int) -> FormField | None:
        """``B_i``; without explicit gauges these come from the gluings along a tree."""
        if self.gauges is not None:
            return self.gauges[i].re()
        if "tree" not in self._derived:
            k = len(self.charts)
            found: dict = {0: None}
            queue = deque([0])
            while queue:
                a = queue.popleft()
                for b in range(k):
                    if b in found:
                        continue
                    try:
                        Bab = self.gluing(a, b)
                    except KeyError:
                        continue
                    found[b] = Bab if found[a] is None else found[a] + Bab
                    queue.append(b)
            if len(found) < k:
                raise ValueError("gluing graph of the cover is disconnected")
            self._derived["tree"] = found
        return self._derived["tree"][i]

    def gauge_matrix(self, i: int, p) -> np.ndarray:
        B = self.gauge(i)
        if B is None:
            n = len(p)
            return np.zeros((n, n))
        return B.matrix_at(p).real


@dataclass(frozen=True)
class CoverCheck:
    name: str
    residual: float
    samples: int


@dataclass(frozen=True)
class CoverReport:
    checks: tuple

    def max_residual(self, prefix: str = "") -> float:
        vals = [c.residual for c in self.checks if c.name.startswith(prefix)]
        return max(vals) if vals else 0.0

    def as_dict(self) -> dict:
        return {c.name: c.residual for c in self.checks}


def reconstruct_gc(cov: HolomorphicCover, i: int, p) -> GCStructure:
    chart: Chart = cov.charts[i]
    chart.require(p)
    J = gc_from_hol_poisson(cov.complex_structures[i].at(p), cov.poisson.at(p))
    return apply_b_transform(J, -cov.gauge_matrix(i, p))


def classify_at(cov: HolomorphicCover, p) -> dict:
    """Classification of the reconstructed structure at ``p`` (first chart containing it)."""
    for i, chart in enumerate(cov.charts):
        if chart.contains(p):
            c = classify(reconstruct_gc(cov, i, p))
            return {"chart": i, "poisson_rank": int(c.poisson_rank), "type": int(c.type), "parity_ok": bool(c.parity_ok)}
    raise DomainError(f"point {np.asarray(p).tolist()} lies in no chart of cover {cov.label}")


def _overlap_points(cov, i, j, rng, n):
    ci, cj = cov.charts[i], cov.charts[j]
    try:
        return ci.sample(rng, n, extra=cj.contains, minimum=MIN_OVERLAP)
    except InconclusiveError as exc:
        raise InconclusiveError(f"overlap ({i},{j}) of cover {cov.label}: {exc}") from exc


def verify_cover(cov: HolomorphicCover, rng: np.random.Generator, n: int = 64) -> CoverReport:
    """Chart invariants, closedness of gluings, QB1/QB2, cocycle and agreement."""
    checks = []
    P = cov.poisson
    for i, chart in enumerate(cov.charts):
        pts = chart.sample(rng, n)
        sq = hp = 0.0
        for p in pts:
            I, Pp = cov.complex_structures[i].at(p), P.at(p)
            sq = max(sq, float(np.abs(I @ I + np.eye(len(I))).max()))
            hp = max(hp, float(np.abs(I @ Pp - Pp @ I.T).max()), float(np.abs(Pp + Pp.T).max()))
        checks.append(CoverCheck(f"chart{i}.I_squared", sq, len(pts)))
        checks.append(CoverCheck(f"chart{i}.hol_poisson", hp, len(pts)))
    for i, j in cov.overlap_pairs:
        pts = _overlap_points(cov, i, j, rng, n)
        Bij = cov.gluing(i, j)
        closed = qb1 = qb2 = pb2 = agree = 0.0
        for p in pts:
            if Bij.m <= 8:
                closed = max(closed, exterior_d(Bij, p).norm())
            B = Bij.matrix_at(p).real
            Ii, Ij, Pp = cov.complex_structures[i].at(p), cov.complex_structures[j].at(p), P.at(p)
            qb1 = max(qb1, float(np.abs(Ii + Pp @ B - Ij).max()))
            g = check_gauge_condition(Ii, Pp, B)
            qb2, pb2 = max(qb2, g.modification), max(pb2, g.pb2)
            Ji, Jj = reconstruct_gc(cov, i, p), reconstruct_gc(cov, j, p)
            agree = max(agree, float(np.abs(Ji.matrix - Jj.matrix).max()))
        tag = f"overlap{i}{j}"
        checks += [
            CoverCheck(f"{tag}.closed", closed, len(pts)),
            CoverCheck(f"{tag}.QB1", qb1, len(pts)),
            CoverCheck(f"{tag}.QB2", qb2, len(pts)),
            CoverCheck(f"{tag}.PB2", pb2, len(pts)),
            CoverCheck(f"{tag}.agreement", agree, len(pts)),
        ]
    k = len(cov.charts)
    pairs = set(cov.overlap_pairs)
    for a in range(k):
        for b in range(a + 1, k):
            for c in range(b + 1, k):
                if not {(a, b), (b, c), (a, c)} <= pairs:
                    continue
                ca, cb, cc = cov.charts[a], cov.charts[b], cov.charts[c]
                try:
                    pts = ca.sample(rng, n, extra=lambda p: cb.contains(p) and cc.contains(p), minimum=MIN_OVERLAP)
                except InconclusiveError:
                    continue
                res = 0.0
                for p in pts:
                    M = (cov.gluing(a, b) + cov.gluing(b, c) - cov.gluing(a, c)).matrix_at(p)
                    res = max(res, float(np.abs(M).max()))
                checks.append(CoverCheck(f"triple{a}{b}{c}.cocycle", res, len(pts)))
    return CoverReport(tuple(checks))


@dataclass(frozen=True, eq=False)
class Bisection:
    """Form on the arrows of ``G_ij`` and the identity-bisection embedding."""

    Omega: FormField
    ident: JetMap


@dataclass(frozen=True, eq=False)
class LocalizationData:
    """Restriction data of a holomorphic localization over a cover.

    ``diagonal[i]`` is the holomorphic symplectic groupoid over chart ``i``;
    ``bisections[(i, j)]`` carries the cross component with source in chart
    ``i`` and target in chart ``j``.
    """

    charts: list
    diagonal: list
    bisections: dict
    label: str = ""


def differentiate_localization(loc: LocalizationData, overlaps: list | None = None) -> HolomorphicCover:
    if len(loc.diagonal) != len(loc.charts):
        raise ValueError("one diagonal groupoid per chart is required")
    pairs = overlaps if overlaps is not None else sorted(loc.bisections)
    gluings = {}
    for i, j in pairs:
        if (i, j) not in loc.bisections:
            raise KeyError(f"missing bisection data for overlap ({i},{j})")
        bis = loc.bisections[(i, j)]
        gluings[(i, j)] = bis.ident.pull(bis.Omega).re()
    derivs = [differentiate_base(d) for d in loc.diagonal]
    Is = [MatrixField(dv.I, f"I{i}") for i, dv in enumerate(derivs)]

    def poisson(x):
        # every chart carries the same Poisson tensor; read it from one containing x
        for chart, dv in zip(loc.charts, derivs):
            if chart.contains(x):
                return dv.P(x)
        raise DomainError(f"point {np.asarray(x).tolist()} lies in no chart of the cover")

    P = MatrixField(poisson, "P")
    return HolomorphicCover(list(loc.charts), Is, P, None, gluings, pairs, loc.label)
