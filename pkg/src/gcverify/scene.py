"""JSON scene documents: user charts, fields, groupoids and covers plus checks.

A scene is loaded in stages (charts, groupoids, fields, groupoid forms,
covers, checks) so that later sections may refer to names from earlier
ones.  Structural problems are reported through jsonschema; unresolved names
and invalid expressions raise :class:`SceneError`.  See the README for the
full format and ``export_scene`` for generated examples.
"""
from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import expr as E
from .calculus import (
    Chart,
    _mask_indices,
    FormField,
    MatrixField,
    exterior_d,
    holomorphic_structure,
    in_clifford_image,
    poisson_of_form,
    twisted_d,
)
from .cover_glue import HolomorphicCover, verify_cover
from .errors import GCVerifyError, PreconditionError, SceneError
from .examples import hopf_cover, hopf_fixture, pair_groupoid, pair_groupoid_fixture, phi22_fixture
from .groupoid import HolSympGroupoidData, LocalGroupoid, check_axioms, check_multiplicative
from .spinor import annihilator, mukai_pairing
from .suites import ABOVE, BELOW, SUITES, Check, Fixtures, Report, RunConfig, Spec, run_checks, suite_checks

SCENE_SCHEMA_VERSION = 1

__all__ = ["Scene", "SCENE_SCHEMA", "load_scene", "parse_scene", "export_scene", "EXPORTABLE"]

# ------------------------------------------------------------------ schema

_NAME = {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_.-]*$"}
_EXPR: dict = {}  # any JSON value; the expression grammar is checked by expr.from_json
_NUMS = {"type": "array", "items": {"type": "number"}}

_FIELD_SPEC = {
    "type": "object",
    "properties": {
        "chart": {"type": "string"},
        "scalar": _EXPR,
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"dx": {"type": "array", "items": {"type": "string"}}, "coeff": _EXPR},
                "required": ["dx", "coeff"],
                "additionalProperties": False,
            },
        },
        "op": {"enum": ["d", "dlog", "add", "sub", "neg", "wedge", "exp", "conj", "re", "im"]},
        "args": {"type": "array", "items": {"anyOf": [{"type": "string"}, {"$ref": "#/$defs/field"}]}},
    },
    "oneOf": [{"required": ["scalar"]}, {"required": ["terms"]}, {"required": ["op", "args"]}],
    "additionalProperties": False,
}

SCENE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "$defs": {"field": _FIELD_SPEC},
    "properties": {
        "schema": {"const": SCENE_SCHEMA_VERSION},
        "label": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "tol": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "charts": {
            "type": "object",
            "propertyNames": _NAME,
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "coords": {"type": "array", "items": _NAME, "minItems": 1, "uniqueItems": True},
                    "box": {
                        "type": "object",
                        "properties": {"lower": _NUMS, "upper": _NUMS},
                        "required": ["lower", "upper"],
                        "additionalProperties": False,
                    },
                    "domain": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {"expr": _EXPR, "op": {"enum": ["<", "<=", ">", ">="]}, "value": {"type": "number"}},
                            "required": ["expr", "op", "value"],
                            "additionalProperties": False,
                        },
                    },
                    "singular": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {"expr": _EXPR, "margin": {"type": "number", "exclusiveMinimum": 0}},
                            "required": ["expr", "margin"],
                            "additionalProperties": False,
                        },
                    },
                },
                "required": ["coords", "box"],
                "additionalProperties": False,
            },
        },
        "groupoids": {
            "type": "object",
            "propertyNames": _NAME,
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "builtin": {"enum": ["pair", "phi22"]},
                    "params": {"type": "object"},
                    "Omega": {"type": "string"},
                },
                "required": ["builtin"],
                "additionalProperties": False,
            },
        },
        "fields": {"type": "object", "propertyNames": _NAME, "additionalProperties": {"$ref": "#/$defs/field"}},
        "covers": {
            "type": "object",
            "propertyNames": _NAME,
            "additionalProperties": {
                "type": "object",
                "properties": {
                    "builtin": {"enum": ["hopf"]},
                    "charts": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "holomorphic": {"type": "object", "additionalProperties": {"type": "array"}},
                    "poisson": {
                        "type": "object",
                        "properties": {"inverse_im": {"type": "string"}, "matrix": {"type": "array"}},
                        "minProperties": 1,
                        "maxProperties": 1,
                        "additionalProperties": False,
                    },
                    "gauges": {"type": "object", "additionalProperties": {"type": "string"}},
                    "gluings": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "properties": {
                                "charts": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                                "field": {"type": "string"},
                            },
                            "required": ["charts", "field"],
                            "additionalProperties": False,
                        },
                    },
                    "overlaps": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                    },
                },
                "oneOf": [{"required": ["builtin"]}, {"required": ["charts", "holomorphic", "poisson"]}],
                "additionalProperties": False,
            },
        },
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "kind": {
                        "enum": ["suite", "vanishes", "equal", "closed", "twisted_closed", "integrable", "pure",
                                 "mukai", "cover", "axioms", "multiplicative", "hol_symplectic"]
                    },
                    "name": _NAME,
                    "anchor": {"type": "string"},
                    "tol": {"type": "number", "exclusiveMinimum": 0},
                    "suite": {"type": "string"},
                    "field": {"type": "string"},
                    "lhs": {"type": "string"},
                    "rhs": {"type": "string"},
                    "spinor": {"type": "string"},
                    "H": {"type": "string"},
                    "cover": {"type": "string"},
                    "groupoid": {"type": "string"},
                    "form": {"type": "string"},
                    "points": {"type": "array", "items": _NUMS},
                },
                "required": ["kind"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["schema", "checks"],
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENE_SCHEMA)

_CMP = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


# ------------------------------------------------------------------ scene


@dataclass
class Scene:
    label: str
    seed: int | None
    samples: int | None
    tol: float | None
    charts: dict = field(default_factory=dict)
    groupoids: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)
    covers: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def config(self, seed=None, samples=None, tol=None) -> RunConfig:
        """Flags given explicitly win over the scene's own settings."""
        pick = lambda a, b, d: a if a is not None else (b if b is not None else d)  # noqa: E731
        return RunConfig(pick(seed, self.seed, 42), pick(samples, self.samples, 64), pick(tol, self.tol, None))

    def run(self, cfg: RunConfig | None = None) -> Report:
        return run_checks(self.checks, cfg or self.config(), self.label)


def load_scene(path) -> Scene:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneError(f"cannot read scene {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scene(doc, default_label=Path(path).stem)


def _schema_errors(doc) -> list[str]:
    out = []
    for err in sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(map(str, err.absolute_path)) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def parse_scene(doc, default_label: str = "scene") -> Scene:
    errors = _schema_errors(doc)
    if errors:
        raise SceneError("scene does not match schema 1:\n  " + "\n  ".join(errors[:20]))
    b = _Builder(doc)
    try:
        return b.build(doc.get("label", default_label))
    except SceneError:
        raise
    except (E.ExprError, GCVerifyError, ValueError, KeyError) as exc:
        raise SceneError(f"{b.where}: {exc}") from exc


class _Builder:
    def __init__(self, doc):
        self.doc = doc
        self.where = "<root>"
        self.charts: dict[str, Chart] = {}
        self.groupoids: dict[str, LocalGroupoid] = {}
        self.omegas: dict[str, FormField] = {}
        self.fields: dict[str, tuple[str, FormField]] = {}
        self.covers: dict[str, HolomorphicCover] = {}
        self._fixtures = Fixtures()
        self._resolving: set = set()

    def fail(self, msg):
        raise SceneError(f"{self.where}: {msg}")

    def build(self, label) -> Scene:
        d = self.doc
        for name, spec in d.get("charts", {}).items():
            self.where = f"charts/{name}"
            self.charts[name] = self.chart(name, spec)
        for name, spec in d.get("groupoids", {}).items():
            self.where = f"groupoids/{name}"
            self.groupoid(name, spec)
        for name in d.get("fields", {}):
            self.resolve_field(name)
        for name, spec in d.get("groupoids", {}).items():
            if "Omega" in spec:
                self.where = f"groupoids/{name}/Omega"
                self.omegas[name] = self.field_on(spec["Omega"], f"{name}.arrows")
        for name, spec in d.get("covers", {}).items():
            self.where = f"covers/{name}"
            self.covers[name] = self.cover(name, spec)
        checks, seen = [], set()
        for k, spec in enumerate(d["checks"]):
            self.where = f"checks/{k}"
            for chk in self.check(spec):
                for s in chk.specs:
                    if s.name in seen:
                        self.fail(f"duplicate check name {s.name!r}")
                    seen.add(s.name)
                checks.append(chk)
        return Scene(label, d.get("seed"), d.get("samples"), d.get("tol"), self.charts, self.groupoids,
                     {k: v for k, (_, v) in self.fields.items()}, self.covers, checks)

    # -------------------------------------------------------------- charts

    def chart(self, name, spec) -> Chart:
        names = tuple(spec["coords"])
        lo, hi = np.asarray(spec["box"]["lower"], float), np.asarray(spec["box"]["upper"], float)
        if lo.shape != (len(names),) or hi.shape != (len(names),):
            self.fail("box bounds need one entry per coordinate")
        if np.any(lo > hi):
            self.fail("box lower bound exceeds upper bound")
        conds = [(E.from_json(c["expr"], names), _CMP[c["op"]], float(c["value"])) for c in spec.get("domain", [])]
        sing = [(E.from_json(c["expr"], names), float(c["margin"])) for c in spec.get("singular", [])]
        exprs = [c[0] for c in conds] + [s[0] for s in sing]
        if not exprs:
            return Chart(names, None, lo, hi, label=name)
        k = len(conds)

        def predicate(p):
            with np.errstate(all="ignore"):
                try:
                    vals = E.evaluate_many(exprs, list(p))
                except (ZeroDivisionError, ValueError, OverflowError):
                    return False
            for (_, op, v), val in zip(conds, vals[:k]):
                x = complex(val).real
                if not (math.isfinite(x) and op(x, v)):
                    return False
            return all(abs(complex(val)) > margin for (_, margin), val in zip(sing, vals[k:]))

        return Chart(names, predicate, lo, hi, label=name)

    def chart_ref(self, ref) -> Chart:
        if ref in self.charts:
            return self.charts[ref]
        gname, _, part = ref.rpartition(".")
        if gname in self.groupoids and part in ("arrows", "base"):
            return getattr(self.groupoids[gname], part)
        self.fail(f"unknown chart {ref!r}")

    # -------------------------------------------------------------- groupoids

    def groupoid(self, name, spec):
        params = dict(spec.get("params", {}))
        kind = spec["builtin"]
        if kind == "phi22":
            if params:
                self.fail("phi22 takes no parameters")
            data = self._fixtures.phi22.data
            self.groupoids[name], self.omegas[name] = data.groupoid, data.Omega
            return
        base = params.pop("base", None)
        m = params.pop("m", None)
        Om = params.pop("Omega0", None)
        if params:
            self.fail(f"unknown pair parameters {sorted(params)}")
        chart = self.chart_ref(base) if base is not None else None
        dim = chart.m if chart is not None else m
        if not isinstance(dim, int) or dim < 1:
            self.fail("pair groupoid needs a positive integer 'm' or a 'base' chart")
        if Om is not None:
            data = pair_groupoid_fixture(_complex_matrix(Om), base=chart)
        elif dim % 4 == 0:
            data = pair_groupoid_fixture(m=dim, base=chart)
        else:
            # no holomorphic symplectic form in this dimension: bare groupoid
            self.groupoids[name] = pair_groupoid(base=chart, m=dim, label=name)
            return
        self.groupoids[name], self.omegas[name] = data.groupoid, data.Omega

    # -------------------------------------------------------------- fields

    def resolve_field(self, name) -> tuple[str, FormField]:
        if name in self.fields:
            return self.fields[name]
        specs = self.doc.get("fields", {})
        if name not in specs:
            self.fail(f"unknown field {name!r}")
        if name in self._resolving:
            self.fail(f"field {name!r} is defined in terms of itself")
        self._resolving.add(name)
        saved, self.where = self.where, f"fields/{name}"
        out = self.field(specs[name])
        self.where = saved
        self._resolving.discard(name)
        self.fields[name] = out
        return out

    def field(self, spec, chart_hint: str | None = None) -> tuple[str, FormField]:
        if "op" in spec:
            args = [self.resolve_field(a) if isinstance(a, str) else self.field(a, spec.get("chart")) for a in spec["args"]]
            charts = {c for c, _ in args}
            if len(charts) != 1:
                self.fail(f"operands live on different charts {sorted(charts)}")
            (cname,) = charts
            if "chart" in spec and spec["chart"] != cname:
                self.fail(f"declared chart {spec['chart']!r} differs from operand chart {cname!r}")
            return cname, self.apply(spec["op"], [f for _, f in args])
        cname = spec.get("chart", chart_hint)
        if cname is None:
            self.fail("field needs a chart")
        chart = self.chart_ref(cname)
        if "scalar" in spec:
            return cname, FormField.scalar(chart.m, E.from_json(spec["scalar"], chart.names))
        F = FormField.zero(chart.m)
        index = {n: i for i, n in enumerate(chart.names)}
        for t in spec["terms"]:
            missing = [v for v in t["dx"] if v not in index]
            if missing:
                self.fail(f"unknown coordinates {missing} in dx")
            if len(set(t["dx"])) != len(t["dx"]):
                self.fail(f"repeated coordinate in dx {t['dx']}")
            idx = [index[v] for v in t["dx"]]
            coeff = E.from_json(t["coeff"], chart.names)
            if idx:
                F = F + FormField.basis(chart.m, idx, coeff)
            else:
                F = F + FormField.scalar(chart.m, coeff)
        return cname, F

    def apply(self, op, fs: list[FormField]) -> FormField:
        unary = {"d": 1, "dlog": 1, "neg": 1, "exp": 1, "conj": 1, "re": 1, "im": 1}
        if op in unary and len(fs) != 1:
            self.fail(f"{op} takes one operand")
        if op not in unary and len(fs) < 2:
            self.fail(f"{op} takes at least two operands")
        F = fs[0]
        if op == "d":
            return F.d()
        if op == "dlog":
            if F.degrees() - {0}:
                self.fail("dlog needs a scalar field")
            f = F.terms.get(0, E.const(0.0))
            return F.d() * (1 / f)
        if op == "neg":
            return -F
        if op == "conj":
            return F.conj()
        if op == "re":
            return F.re()
        if op == "im":
            return F.im()
        if op == "exp":
            if any(k % 2 for k in F.degrees()):
                self.fail("exp needs an even form")
            out = term = FormField.scalar(F.m, 1.0)
            for k in range(1, F.m // 2 + 1):
                term = (term ^ F) * (1.0 / k)
                out = out + term
            return out
        binary = {"add": operator.add, "sub": operator.sub, "wedge": operator.xor}[op]
        for G in fs[1:]:
            F = binary(F, G)
        return F

    def field_on(self, name, chart_ref=None) -> FormField:
        cname, F = self.resolve_field(name)
        if chart_ref is not None and cname != chart_ref:
            self.fail(f"field {name!r} lives on {cname!r}, expected {chart_ref!r}")
        return F

    # -------------------------------------------------------------- covers

    def cover(self, name, spec) -> HolomorphicCover:
        if "builtin" in spec:
            return self._fixtures.hopf_cover
        cnames = spec["charts"]
        for c in cnames:
            if c not in self.charts:
                self.fail(f"unknown chart {c!r}")
        charts = [self.charts[c] for c in cnames]
        names = charts[0].names
        if any(c.names != names for c in charts):
            self.fail("cover charts must share one coordinate system")
        if set(spec["holomorphic"]) != set(cnames):
            self.fail("holomorphic coordinates must be given for exactly the cover charts")
        Is = []
        for c in cnames:
            fs = [E.from_json(f, names) for f in spec["holomorphic"][c]]
            if 2 * len(fs) != len(names):
                self.fail(f"chart {c!r} needs {len(names) // 2} holomorphic functions")
            Is.append(holomorphic_structure(fs, f"I[{c}]"))
        P = self.poisson(spec["poisson"], names, cnames)
        pos = {c: i for i, c in enumerate(cnames)}
        gauges = gluings = None
        if "gauges" in spec:
            if set(spec["gauges"]) != set(cnames):
                self.fail("gauges must be given for exactly the cover charts")
            gauges = []
            for c in cnames:
                if not self._same_coords(spec["gauges"][c], names):
                    self.fail(f"gauge {spec['gauges'][c]!r} has the wrong coordinates")
                gauges.append(self.resolve_field(spec["gauges"][c])[1].re())
        if "gluings" in spec:
            gluings = {}
            for g in spec["gluings"]:
                a, b = g["charts"]
                if a not in pos or b not in pos:
                    self.fail(f"gluing between unknown charts {g['charts']}")
                if not self._same_coords(g["field"], names):
                    self.fail(f"gluing {g['field']!r} has the wrong coordinates")
                gluings[(pos[a], pos[b])] = self.resolve_field(g["field"])[1].re()
        overlaps = None
        if "overlaps" in spec:
            overlaps = []
            for a, b in spec["overlaps"]:
                if a not in pos or b not in pos:
                    self.fail(f"overlap between unknown charts {[a, b]}")
                overlaps.append((pos[a], pos[b]))
        if gauges is None and gluings is None and len(cnames) > 1:
            self.fail("a cover with several charts needs gauges or gluings")
        return HolomorphicCover(charts, Is, P, gauges, gluings, overlaps, name)

    def _same_coords(self, fname, names) -> bool:
        cname, _ = self.resolve_field(fname)
        return self.chart_ref(cname).names == names

    def poisson(self, spec, names, cnames) -> MatrixField:
        if "inverse_im" in spec:
            if not self._same_coords(spec["inverse_im"], names):
                self.fail("poisson form has the wrong coordinates")
            return poisson_of_form(self.resolve_field(spec["inverse_im"])[1], "im", "P")
        rows = spec["matrix"]
        n = len(names)
        if len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
            self.fail(f"poisson matrix must be {n}x{n}")
        entries = [E.from_json(x, names) for r in rows for x in r]

        def f(p):
            vals = E.evaluate_many(entries, list(p))
            return np.real(np.array(vals, dtype=complex)).reshape(n, n)

        return MatrixField(f, "P")

    # -------------------------------------------------------------- checks

    def check(self, spec) -> list[Check]:
        kind = spec["kind"]
        need = {
            "suite": ["suite"], "vanishes": ["field"], "equal": ["lhs", "rhs"], "closed": ["field"],
            "twisted_closed": ["spinor", "H"], "integrable": ["spinor", "H"], "pure": ["spinor"],
            "mukai": ["spinor"], "cover": ["cover"], "axioms": ["groupoid"], "multiplicative": ["groupoid"],
            "hol_symplectic": ["groupoid"],
        }[kind]
        missing = [k for k in need if k not in spec]
        if missing:
            self.fail(f"{kind} check needs {missing}")
        if kind == "suite":
            if spec["suite"] != "all" and spec["suite"] not in SUITES:
                self.fail(f"unknown suite {spec['suite']!r}")
            extra = set(spec) - {"kind", "suite"}
            if extra:
                self.fail(f"suite checks take no {sorted(extra)}")
            return suite_checks(spec["suite"], self._fixtures)
        return [getattr(self, f"check_{kind}")(spec)]

    def _name(self, spec, default):
        return spec.get("name", default)

    def _pointwise(self, spec, chart_name, default_name, anchor, tol, fn, comparison=BELOW) -> Check:
        chart = self.chart_ref(chart_name)
        extra = [np.asarray(p, float) for p in spec.get("points", [])]
        for p in extra:
            if not chart.contains(p):
                self.fail(f"point {p.tolist()} is outside chart {chart_name!r}")
        name = self._name(spec, default_name)
        s = Spec(name, spec.get("anchor", anchor), spec.get("tol", tol), comparison)
        agg = max if comparison == BELOW else min

        def run(rng, n):
            pts = list(chart.sample(rng, n)) + extra
            vals = [float(fn(p)) for p in pts]
            return {name: (agg(vals), len(pts))}

        return Check((s,), run)

    def check_vanishes(self, spec):
        c, F = self.resolve_field(spec["field"])
        return self._pointwise(spec, c, f"vanishes.{spec['field']}", "field vanishes", 1e-9,
                               lambda p: F.at(p).norm())

    def check_equal(self, spec):
        c1, F = self.resolve_field(spec["lhs"])
        c2, G = self.resolve_field(spec["rhs"])
        if c1 != c2:
            self.fail("compared fields live on different charts")
        D = F - G
        return self._pointwise(spec, c1, f"equal.{spec['lhs']}.{spec['rhs']}", "fields agree", 1e-9,
                               lambda p: D.at(p).norm())

    def check_closed(self, spec):
        c, F = self.resolve_field(spec["field"])
        return self._pointwise(spec, c, f"closed.{spec['field']}", "dF = 0", 1e-9,
                               lambda p: exterior_d(F, p).norm())

    def _spinor_pair(self, spec):
        c, rho = self.resolve_field(spec["spinor"])
        c2, H = self.resolve_field(spec["H"])
        if c != c2:
            self.fail("spinor and H live on different charts")
        if H.degrees() - {3}:
            self.fail("H must be a 3-form")
        return c, rho, H

    def check_twisted_closed(self, spec):
        c, rho, H = self._spinor_pair(spec)
        return self._pointwise(spec, c, f"twisted_closed.{spec['spinor']}", "(d + H) rho = 0", 1e-9,
                               lambda p: twisted_d(rho, H, p).norm())

    def check_integrable(self, spec):
        c, rho, H = self._spinor_pair(spec)
        return self._pointwise(spec, c, f"integrable.{spec['spinor']}",
                               "(d + H) rho lies in the Clifford image of rho", 1e-8,
                               lambda p: in_clifford_image(twisted_d(rho, H, p), rho.at(p)))

    def check_pure(self, spec):
        c, rho = self.resolve_field(spec["spinor"])
        m = rho.m
        return self._pointwise(spec, c, f"pure.{spec['spinor']}", "annihilator is maximal isotropic", 0.5,
                               lambda p: abs(m - annihilator(rho.at(p)).dim))

    def check_mukai(self, spec):
        c, rho = self.resolve_field(spec["spinor"])
        return self._pointwise(spec, c, f"mukai.{spec['spinor']}", "Mukai pairing with the conjugate is nonzero",
                               1e-10, lambda p: abs(mukai_pairing(rho.at(p), rho.at(p).conj())), ABOVE)

    def check_cover(self, spec):
        key = spec["cover"]
        if key not in self.covers:
            self.fail(f"unknown cover {key!r}")
        cov = self.covers[key]
        name = self._name(spec, f"cover.{key}")
        tol = spec.get("tol")
        cats = [("I_squared", "chart complex structures square to -1", 1e-9),
                ("hol_poisson", "P is skew and of type (2,0)", 1e-9),
                ("closed", "gluing fields are closed", 1e-8),
                ("QB1", "I_j = I_i + P B_ij", 1e-8),
                ("QB2", "B_ij satisfies the gauge condition", 1e-8),
                ("PB2", "Poisson tensors agree across overlaps", 1e-8),
                ("agreement", "chart reconstructions agree", 1e-8)]
        k = len(cov.charts)
        pairs = set(cov.overlap_pairs)
        triples = [(a, b, c) for a in range(k) for b in range(a + 1, k) for c in range(b + 1, k)
                   if {(a, b), (b, c), (a, c)} <= pairs]
        if triples:
            cats.append(("cocycle", "B_ab + B_bc = B_ac", 1e-8))
        specs = tuple(Spec(f"{name}.{c}", spec.get("anchor", a), tol or t) for c, a, t in cats)

        def run(rng, n):
            rep = verify_cover(cov, rng, n)
            out = {}
            for c, _, _ in cats:
                hits = [x for x in rep.checks if x.name.endswith("." + c)]
                out[f"{name}.{c}"] = (max((x.residual for x in hits), default=0.0),
                                      min((x.samples for x in hits), default=0))
            return out

        return Check(specs, run)

    def _groupoid(self, spec):
        g = spec["groupoid"]
        if g not in self.groupoids:
            self.fail(f"unknown groupoid {g!r}")
        return g, self.groupoids[g]

    def check_axioms(self, spec):
        g, G = self._groupoid(spec)
        name = self._name(spec, f"axioms.{g}")
        s = Spec(name, spec.get("anchor", "groupoid axioms"), spec.get("tol", 1e-9))

        def run(rng, n):
            res = check_axioms(G, rng, n)
            samples = res.pop("samples")
            return {name: (max(res.values()), samples)}

        return Check((s,), run)

    def _omega(self, spec, g):
        if "form" in spec:
            return self.field_on(spec["form"], f"{g}.arrows")
        if g not in self.omegas:
            self.fail(f"groupoid {g!r} carries no form; give 'form'")
        return self.omegas[g]

    def check_multiplicative(self, spec):
        g, G = self._groupoid(spec)
        theta = self._omega(spec, g)
        if theta.degrees() - {2}:
            self.fail("multiplicativity is checked for 2-forms")
        name = self._name(spec, f"multiplicative.{g}")
        s = Spec(name, spec.get("anchor", "m* = p1* + p2*"), spec.get("tol", 1e-8))
        return Check((s,), lambda rng, n: {name: (check_multiplicative(G, theta, rng, n), n)})

    def check_hol_symplectic(self, spec):
        g, G = self._groupoid(spec)
        data = HolSympGroupoidData(G, self._omega(spec, g), g)
        name = self._name(spec, f"hol_symplectic.{g}")
        tol = spec.get("tol")
        specs = (Spec(f"{name}.closed", "Omega is closed", tol or 1e-9),
                 Spec(f"{name}.I_squared", "I = omega^-1 B squares to -1", tol or 1e-9),
                 Spec(f"{name}.nondegenerate", "smallest singular value of Im Omega", 1e-6, ABOVE))

        def run(rng, n):
            try:
                r = data.validate(rng, n)
            except np.linalg.LinAlgError as exc:
                raise PreconditionError(str(exc)) from exc
            k = r["samples"]
            return {specs[0].name: (r["closed"], k), specs[1].name: (r["I_squared"], k),
                    specs[2].name: (r["min_singular_omega"], k)}

        return Check(specs, run)


def _complex_matrix(M) -> np.ndarray:
    """Entries are numbers or ``[re, im]`` pairs."""
    try:
        return np.array([[complex(*x) if isinstance(x, list) else complex(x) for x in row] for row in M])
    except (TypeError, ValueError) as exc:
        raise SceneError(f"Omega0 must be a matrix of numbers or [re, im] pairs ({exc})") from exc


# ------------------------------------------------------------------ export


def _terms_json(F: FormField, names) -> list:
    out = []
    for mask in sorted(F.terms, key=lambda k: (bin(k).count("1"), k)):
        out.append({"dx": [names[i] for i in _mask_indices(mask)], "coeff": E.to_json(F.terms[mask])})
    return out


def _hopf_scene() -> dict:
    h = hopf_fixture()
    cfg = h.config
    names = ["a", "b", "c", "d"]
    x1, x2 = E.to_json(h.x1), E.to_json(h.x2)
    R2 = E.to_json(h.R2)
    eps = cfg.margin
    shell = [{"expr": R2, "op": ">=", "value": (cfg.r_min + eps) ** 2},
             {"expr": R2, "op": "<=", "value": (cfg.r_max - eps) ** 2}]
    box = {"lower": [-cfg.r_max] * 4, "upper": [cfg.r_max] * 4}
    tube = ["sub", ["abs2", x1], ["mul", (cfg.tube - eps) ** 2, ["abs2", x2]]]
    ratio = ["sub", ["abs2", x2], ["mul", cfg.prime_ratio ** 2, ["abs2", x1]]]
    charts = {
        "C": {"coords": names, "box": box, "domain": shell, "singular": [{"expr": x2, "margin": eps}]},
        "X1": {"coords": names, "box": box, "domain": shell + [{"expr": tube, "op": "<", "value": 0.0}],
               "singular": [{"expr": x2, "margin": eps}]},
        "X2": {"coords": names, "box": box, "domain": shell,
               "singular": [{"expr": x2, "margin": eps}, {"expr": x1, "margin": eps}]},
        "prime": {"coords": names, "box": box, "domain": shell + [{"expr": ratio, "op": "<", "value": 0.0}],
                  "singular": [{"expr": x1, "margin": eps}]},
    }
    fields = {
        "C": {"chart": "C", "terms": _terms_json(h.C, names)},
        "H": {"chart": "C", "terms": _terms_json(h.H, names)},
        "rho": {"chart": "C", "op": "exp", "args": ["C"]},
        "rho_prime": {"chart": "prime", "terms": _terms_json(h.rho_prime, names)},
        "H_prime": {"chart": "prime", "terms": _terms_json(h.H, names)},
        "dC_plus_H": {"op": "add", "args": [{"op": "d", "args": ["C"]}, "H"]},
        "z1": {"chart": "C", "scalar": E.to_json(h.z1)},
        "z2": {"chart": "C", "scalar": E.to_json(h.z2)},
        "w1": {"chart": "C", "scalar": E.to_json(h.w1)},
        "w2": {"chart": "C", "scalar": E.to_json(h.w2)},
        "Z": {"op": "wedge", "args": [{"op": "dlog", "args": ["z1"]}, {"op": "dlog", "args": ["z2"]}]},
        "W": {"op": "wedge", "args": [{"op": "d", "args": ["w1"]}, {"op": "dlog", "args": ["w2"]}]},
        "B1": {"op": "sub", "args": ["Z", "C"]},
        "B2": {"op": "sub", "args": ["W", "C"]},
    }
    cover = {
        "charts": ["X1", "X2"],
        "holomorphic": {"X1": [E.to_json(h.z1), E.to_json(h.z2)], "X2": [E.to_json(h.w1), E.to_json(h.w2)]},
        "poisson": {"inverse_im": "C"},
        "gauges": {"X1": "B1", "X2": "B2"},
        "overlaps": [["X1", "X2"]],
    }
    return {
        "schema": SCENE_SCHEMA_VERSION,
        "label": "hopf",
        "charts": charts,
        "fields": fields,
        "covers": {"hopf": cover},
        "checks": [
            {"kind": "vanishes", "field": "dC_plus_H", "name": "hopf.dC_plus_H"},
            {"kind": "twisted_closed", "spinor": "rho", "H": "H", "name": "hopf.rho_twisted_closed"},
            {"kind": "integrable", "spinor": "rho", "H": "H", "name": "hopf.rho_integrable"},
            {"kind": "integrable", "spinor": "rho_prime", "H": "H_prime", "name": "hopf.rho_prime_integrable"},
            {"kind": "pure", "spinor": "rho", "name": "hopf.rho_pure"},
            {"kind": "mukai", "spinor": "rho", "name": "hopf.rho_mukai"},
            {"kind": "cover", "cover": "hopf", "name": "hopf.cover"},
        ],
    }


def _pair_scene() -> dict:
    return {
        "schema": SCENE_SCHEMA_VERSION,
        "label": "pair-groupoid",
        "groupoids": {"G": {"builtin": "pair", "params": {"m": 4}}, "G2": {"builtin": "pair", "params": {"m": 2}}},
        "checks": [
            {"kind": "axioms", "groupoid": "G"},
            {"kind": "axioms", "groupoid": "G2"},
            {"kind": "multiplicative", "groupoid": "G"},
            {"kind": "hol_symplectic", "groupoid": "G"},
        ],
    }


def _phi22_scene() -> dict:
    return {
        "schema": SCENE_SCHEMA_VERSION,
        "label": "phi22",
        "groupoids": {"Phi": {"builtin": "phi22"}},
        "checks": [
            {"kind": "axioms", "groupoid": "Phi"},
            {"kind": "multiplicative", "groupoid": "Phi"},
            {"kind": "hol_symplectic", "groupoid": "Phi"},
        ],
    }


EXPORTABLE = {"hopf": _hopf_scene, "pair-groupoid": _pair_scene, "phi22": _phi22_scene}


def export_scene(name: str) -> dict:
    """Scene document reproducing a built-in fixture with user-level declarations."""
    if name not in EXPORTABLE:
        raise KeyError(f"no exportable fixture {name!r}; choose from {sorted(EXPORTABLE)}")
    return EXPORTABLE[name]()
