import copy
import json

import pytest

from gcverify.errors import SceneError
from gcverify.scene import EXPORTABLE, export_scene, load_scene, parse_scene
from gcverify.suites import RunConfig

BOX4 = {"lower": [-1, -1, -1, -1], "upper": [1, 1, 1, 1]}


def base_scene(**extra):
    doc = {
        "schema": 1,
        "label": "demo",
        "charts": {"U": {"coords": ["x", "y", "u", "v"], "box": BOX4}},
        "fields": {
            "f": {"chart": "U", "scalar": ["mul", "x", "y"]},
            "df": {"op": "d", "args": ["f"]},
            "df_by_hand": {"chart": "U", "terms": [{"dx": ["x"], "coeff": "y"}, {"dx": ["y"], "coeff": "x"}]},
        },
        "checks": [
            {"kind": "closed", "field": "df"},
            {"kind": "equal", "lhs": "df", "rhs": "df_by_hand"},
        ],
    }
    doc.update(extra)
    return copy.deepcopy(doc)


def run(doc, **cfg):
    return parse_scene(doc).run(RunConfig(**cfg) if cfg else None)


def test_basic_scene_passes():
    rep = run(base_scene(), samples=8)
    assert rep.exit_code == 0
    assert {r.name for r in rep.results} == {"closed.df", "equal.df.df_by_hand"}


def test_failing_check_exit_1():
    doc = base_scene(checks=[{"kind": "vanishes", "field": "df", "name": "df_zero"}])
    rep = run(doc, samples=8)
    assert rep.exit_code == 1
    assert rep.results[0].name == "df_zero"


def test_inconclusive_exit_3():
    doc = base_scene()
    doc["charts"]["U"]["domain"] = [{"expr": "x", "op": ">", "value": 5}]
    assert run(doc, samples=8).exit_code == 3


def test_singular_locus_excluded():
    doc = base_scene()
    doc["charts"]["U"]["singular"] = [{"expr": "x", "margin": 0.5}]
    doc["fields"]["g"] = {"chart": "U", "scalar": ["div", 1, "x"]}
    doc["checks"] = [{"kind": "closed", "field": "df"}, {"kind": "vanishes", "field": "g", "name": "g", "tol": 2.0}]
    rep = run(doc, samples=16)
    assert rep.exit_code == 0  # |1/x| < 2 on the sampled set


def test_extra_points_must_lie_in_chart():
    doc = base_scene(checks=[{"kind": "closed", "field": "df", "points": [[3, 0, 0, 0]]}])
    with pytest.raises(SceneError, match="outside chart"):
        parse_scene(doc)
    doc = base_scene(checks=[{"kind": "closed", "field": "df", "points": [[0.5, 0, 0, 0]]}])
    assert run(doc, samples=4).results[0].samples == 5


@pytest.mark.parametrize(
    "mutate,fragment",
    [
        (lambda d: d.pop("schema"), "schema"),
        (lambda d: d.update(schema=2), "schema"),
        (lambda d: d["checks"].append({"kind": "bogus"}), "checks/2/kind"),
        (lambda d: d.update(extra=1), "Additional properties"),
        (lambda d: d["charts"]["U"].pop("box"), "charts/U"),
        (lambda d: d.update(checks=[]), "checks"),
        (lambda d: d.update(seed=-1), "seed"),
    ],
)
def test_schema_errors(mutate, fragment):
    doc = base_scene()
    mutate(doc)
    with pytest.raises(SceneError) as exc:
        parse_scene(doc)
    assert fragment in str(exc.value)


@pytest.mark.parametrize(
    "mutate,fragment",
    [
        (lambda d: d["checks"].append({"kind": "closed", "field": "nope"}), "unknown field"),
        (lambda d: d["fields"].update(a={"op": "neg", "args": ["b"]}, b={"op": "neg", "args": ["a"]}), "itself"),
        (lambda d: d["checks"].append({"kind": "closed", "field": "df"}), "duplicate"),
        (lambda d: d["fields"].update(bad={"chart": "U", "scalar": ["sin", "x"]}), "fields/bad"),
        (lambda d: d["fields"].update(bad={"chart": "V", "scalar": "x"}), "unknown chart"),
        (lambda d: d["fields"].update(bad={"op": "dlog", "args": ["df"]}), "scalar"),
        (lambda d: d["fields"].update(bad={"op": "exp", "args": ["df"]}), "even"),
        (lambda d: d["fields"].update(bad={"chart": "U", "terms": [{"dx": ["x", "x"], "coeff": 1}]}), "repeated"),
        (lambda d: d["fields"].update(bad={"chart": "U", "terms": [{"dx": ["q"], "coeff": 1}]}), "unknown coordinates"),
        (lambda d: d["charts"]["U"]["box"].update(lower=[0, 0]), "one entry per coordinate"),
        (lambda d: d["checks"].append({"kind": "equal", "lhs": "df"}), "needs"),
        (lambda d: d["checks"].append({"kind": "suite", "suite": "nope"}), "unknown suite"),
        (lambda d: d["checks"].append({"kind": "cover", "cover": "nope"}), "unknown cover"),
        (lambda d: d["checks"].append({"kind": "axioms", "groupoid": "nope"}), "unknown groupoid"),
    ],
)
def test_resolution_errors(mutate, fragment):
    doc = base_scene()
    mutate(doc)
    with pytest.raises(SceneError, match=fragment):
        parse_scene(doc)


def test_fields_on_different_charts_rejected():
    doc = base_scene()
    doc["charts"]["V"] = {"coords": ["x", "y", "u", "v"], "box": BOX4}
    doc["fields"]["h"] = {"chart": "V", "scalar": "x"}
    doc["fields"]["bad"] = {"op": "add", "args": ["f", "h"]}
    with pytest.raises(SceneError, match="different charts"):
        parse_scene(doc)


def test_config_precedence():
    sc = parse_scene(base_scene(seed=5, samples=7))
    assert sc.config() == RunConfig(5, 7, None)
    assert sc.config(seed=9) == RunConfig(9, 7, None)
    assert parse_scene(base_scene()).config() == RunConfig(42, 64, None)


def test_user_cover_with_type_11_gluing():
    doc = base_scene()
    doc["charts"] = {
        "L": {"coords": ["x", "y", "u", "v"], "box": {"lower": [-1, -1, -1, -1], "upper": [0.3, 1, 1, 1]}},
        "R": {"coords": ["x", "y", "u", "v"], "box": {"lower": [-0.3, -1, -1, -1], "upper": [1, 1, 1, 1]}},
    }
    doc["fields"] = {
        "B": {"chart": "L", "terms": [{"dx": ["x", "y"], "coeff": 1}, {"dx": ["u", "v"], "coeff": 2}]},
    }
    z = [["add", "x", ["mul", "i", "y"]], ["add", "u", ["mul", "i", "v"]]]
    doc["covers"] = {
        "K": {
            "charts": ["L", "R"],
            "holomorphic": {"L": z, "R": z},
            "poisson": {"matrix": [[0] * 4] * 4},
            "gluings": [{"charts": ["L", "R"], "field": "B"}],
        }
    }
    doc["checks"] = [{"kind": "cover", "cover": "K"}]
    rep = run(doc, samples=16)
    assert rep.exit_code == 0, rep.summary()
    assert "K" in parse_scene(doc).covers
    # a (2,0)+(0,2) gluing violates the gauge condition
    doc["fields"]["B"] = {"chart": "L", "terms": [{"dx": ["x", "u"], "coeff": 1}, {"dx": ["y", "v"], "coeff": -1}]}
    rep = run(doc, samples=16)
    assert rep.exit_code == 1
    failed = {r.name for r in rep.results if r.status == "fail"}
    assert "cover.K.QB2" in failed


def test_degenerate_form_reports_failure():
    doc = {
        "schema": 1,
        "groupoids": {"G": {"builtin": "pair", "params": {"m": 4}, "Omega": "zero"}},
        "fields": {"zero": {"chart": "G.arrows", "terms": [{"dx": ["t_x0", "s_x0"], "coeff": 0}]}},
        "checks": [{"kind": "hol_symplectic", "groupoid": "G"}],
    }
    rep = run(doc, samples=4)
    assert rep.exit_code == 1
    assert all(r.message for r in rep.results)


@pytest.mark.parametrize("name", sorted(EXPORTABLE))
def test_export_roundtrip(name, tmp_path):
    doc = export_scene(name)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    sc = load_scene(path)
    samples = 16 if name == "hopf" else 24
    rep = sc.run(sc.config(samples=samples))
    assert rep.exit_code == 0, rep.summary()
    assert json.loads(json.dumps(doc)) == copy.deepcopy(doc)


def test_export_unknown():
    with pytest.raises(KeyError):
        export_scene("nope")


def test_load_errors(tmp_path):
    with pytest.raises(SceneError, match="cannot read"):
        load_scene(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SceneError, match="invalid JSON"):
        load_scene(bad)


def test_suite_check_in_scene():
    doc = {"schema": 1, "checks": [{"kind": "suite", "suite": "pair-groupoid"}]}
    rep = run(doc, samples=16)
    assert rep.exit_code == 0
    assert any(r.name == "pair.multiplicative" for r in rep.results)
