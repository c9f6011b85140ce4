import copy
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statgeom.assertions import TargetError, TargetEvaluator, parse_target
from statgeom.catalog import CATALOG, CHECKS, catalog_text
from statgeom.checks import effective_plan, run_check, run_scenario
from statgeom.expr import array_value
from statgeom.geometry import SamplePlan, connection_at
from statgeom.scenarios import (
    BUNDLED_IDS,
    SYNTHETIC_IDS,
    ScenarioError,
    bundled_document,
    bundled_scenario,
    dump_scenario,
    emit_examples,
    load_scenario,
    synthetic_scenario,
    validate_scenario,
)

X4 = ("x1", "x2", "x3", "x4")


def minimal(**extra):
    d = {
        "name": "flat",
        "manifold": {"dim": 2, "coords": ["u", "v"], "box": [[-1, 1], [-1, 1]], "metric": [[1, 0], [0, 1]]},
    }
    d.update(extra)
    return d


# ----------------------------------------------------------------- loading


def test_first_example_loads():
    sc = bundled_scenario("E1")
    assert sc.geometry.dim == 4 and sc.immersion is None
    assert sc.expected_f_star is not None


def test_hypersurface_example_has_declared_normal():
    sc = bundled_scenario("E6")
    assert sc.immersion.dim == 3
    assert bundled_document("E6")["immersion"]["normals"] == [[0, 0, 0, "exp(-(x1-x3)/2)"]]
    np.testing.assert_allclose(array_value(sc.immersion.normals, np.zeros((1, 3)))[0], [[0, 0, 0, 1]])


def test_connection_coefficients_at_origin():
    gam = connection_at(bundled_scenario("E2").geometry, np.zeros((1, 4)))[0]
    assert gam[0, 0, 0] == 1.0 and gam[2, 0, 0] == 1.0


def test_geodesic_slice_declares_its_checks():
    checks = bundled_scenario("E4").checks
    for c in ("lemma7", "gauss_codazzi_ricci", "totally_geodesic"):
        assert c in checks


def test_kappa_assertion_on_second_direction():
    a = next(a for a in bundled_scenario("E7").assertions if a.name == "kappa(x2)")
    assert a.source == "1"


@pytest.mark.parametrize("ident", BUNDLED_IDS + SYNTHETIC_IDS)
def test_all_scenarios_validate_cleanly(ident):
    sc = bundled_scenario(ident) if ident in BUNDLED_IDS else synthetic_scenario(ident)
    assert validate_scenario(sc) == []


def test_load_from_text_bytes_path_and_dict(tmp_path):
    d = bundled_document("E2")
    text = dump_scenario(d)
    p = tmp_path / "e2.json"
    p.write_text(text, encoding="utf-8")
    a, b, c, e = load_scenario(text), load_scenario(text.encode()), load_scenario(p), load_scenario(d)
    assert a == b == c == e


def test_bundled_id_unknown():
    with pytest.raises(KeyError):
        bundled_scenario("E9")


# ------------------------------------------------------------------ errors


def test_dimension_mismatch_names_metric():
    d = minimal()
    d["manifold"]["dim"] = 3
    d["manifold"]["coords"] = ["u", "v", "w"]
    d["manifold"]["box"] = [[-1, 1]] * 3
    d["manifold"]["metric"] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]
    with pytest.raises(ScenarioError) as info:
        load_scenario(d)
    assert "metric" in info.value.path and "dimension mismatch" in str(info.value)


def test_parse_error_names_field_and_offset():
    d = minimal()
    d["manifold"]["metric"][0][0] = "1+*u"
    with pytest.raises(ScenarioError) as info:
        load_scenario(d)
    assert info.value.path == "manifold.metric[0][0]"
    assert "offset 2" in str(info.value)


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["manifold"].update(colour="red"), "manifold.colour"),
        (lambda d: d.pop("manifold"), "manifold"),
        (lambda d: d.update(checks=["no_such_check"]), "checks[0]"),
        (lambda d: d.update(checks=["frames"]), "checks[0]"),
        (lambda d: d.update(checks=["nabla_F"]), "checks[0]"),
        (lambda d: d.update(tolerances={"default": -1}), "tolerances.default"),
        (lambda d: d.update(model={"c": "half"}), "model.c"),
        (lambda d: d["manifold"].update(box=[[1, -1], [0, 1]]), "manifold.box[0]"),
        (lambda d: d.update(assertions=[{"name": "a", "target": "sigma(u,u)[u]", "expr": "0"}]), "assertions[0].target"),
        (lambda d: d.update(parameters={"k": "x"}), "parameters.k"),
    ],
)
def test_schema_errors_name_path(mutate, path):
    d = minimal()
    mutate(d)
    with pytest.raises(ScenarioError) as info:
        load_scenario(d)
    assert info.value.path == path


def test_invalid_json_text():
    with pytest.raises(ScenarioError, match="invalid JSON"):
        load_scenario("{not json")


def test_singular_metric_diagnostic():
    d = minimal()
    d["manifold"]["metric"] = [[1, 0], [0, 0]]
    assert any("singular metric at probe point" in m for m in validate_scenario(d))


def test_rank_deficient_immersion_diagnostic():
    d = minimal(immersion={"dim": 1, "coords": ["t"], "box": [[-1, 1]], "map": [1, 2]})
    assert any("rank deficiency" in m for m in validate_scenario(d))


def test_validation_reports_load_errors():
    d = minimal()
    d["manifold"]["metric"] = [[1, 0]]
    diags = validate_scenario(d)
    assert len(diags) == 1 and "manifold.metric" in diags[0]


# -------------------------------------------------------------- parameters


def test_parameters_become_constants():
    d = minimal(parameters={"k": 2.0})
    d["manifold"]["metric"] = [["k^2", 0], [0, 1]]
    sc = load_scenario(d)
    assert array_value(sc.geometry.metric, np.zeros((1, 2)))[0, 0, 0] == 4.0
    assert sc.parameters == (("k", 2.0),)


@pytest.mark.parametrize("ident", ["E3", "E4"])
def test_slice_results_do_not_depend_on_free_constants(ident):
    rep = run_check(bundled_scenario(ident), "parameter_independence", SamplePlan(1, 4, 0), 1e-9)
    assert rep.passed and rep.details["shifts"]


# -------------------------------------------------------------- tolerances


def test_tolerance_resolution_order():
    sc = load_scenario(minimal(tolerances={"default": 1e-5, "overrides": {"frames": 1e-3}}))
    assert sc.tolerance("frames") == 1e-3
    assert sc.tolerance("statistical") == 1e-5
    assert load_scenario(minimal()).tolerance("statistical") == CHECKS["statistical"].tolerance


def test_plan_overrides():
    sc = load_scenario(minimal(sample={"grid": 2, "random": 3, "seed": 9}))
    assert effective_plan(sc) == SamplePlan(2, 3, 9)
    assert effective_plan(sc, points=5) == SamplePlan(0, 5, 9)
    assert effective_plan(sc, seed=1) == SamplePlan(2, 3, 1)


# ----------------------------------------------------------------- targets


def test_target_parsing():
    t = parse_target("A(d_x4,x2)[x1]", X4, ("x1", "x2", "x3"))
    assert t.quantity == "A" and t.args == (("coord", 3), ("T", 1)) and t.component == 0
    assert parse_target("kappa(x2)", X4, ("x1", "x2", "x3")).component is None
    assert parse_target("D(x1,N2)[x4]", X4, ("x1", "x3")).args == (("T", 0), ("N", 1))


@pytest.mark.parametrize(
    "src, message",
    [
        ("bogus(x1)", "unknown quantity"),
        ("kappa(x1)[x2]", "scalar-valued"),
        ("A_N(x1)", "component is required"),
        ("metric(x1)", "argument"),
        ("A(q,x1)[x1]", "unknown normal argument"),
        ("A_N(x1)[x4]", "unknown component"),
        ("A_N x1", "malformed"),
    ],
)
def test_target_errors(src, message):
    with pytest.raises(TargetError, match=message):
        parse_target(src, X4, ("x1", "x2", "x3"))


def test_target_needs_immersion():
    with pytest.raises(TargetError, match="needs an immersion"):
        parse_target("sigma(x1,x1)[x2]", X4)


def test_target_evaluator_ambient_values():
    sc = bundled_scenario("E2")
    pts = np.zeros((1, 4))
    ev = TargetEvaluator(sc.geometry, sc.structure, None, pts)
    assert ev.value(parse_target("metric(x1,x1)", X4))[0] == 2.0
    assert ev.value(parse_target("F_star(x1)[x3]", X4))[0] == 2.0
    assert ev.value(parse_target("nabla(x1,x1)[x3]", X4))[0] == 1.0


def test_normal_coordinate_argument_must_be_normal():
    sc = bundled_scenario("E5")
    ev = TargetEvaluator(sc.geometry, sc.structure, sc.submanifold(), np.zeros((1, 3)))
    with pytest.raises(ValueError):
        ev.value(parse_target("A(d_x1,x1)[x1]", X4, ("x1", "x2", "x3")))


# ------------------------------------------------------------- bundled runs


@pytest.mark.parametrize("ident", BUNDLED_IDS)
def test_bundled_scenarios_pass(ident, bundled_run):
    rep = bundled_run(ident)
    assert rep.overall == "pass", [(c.name, c.max_residual, c.reason) for c in rep.checks if c.verdict == "fail"]


def test_scenario_without_assertions_skips_assertion_check():
    rep = run_scenario(load_scenario(minimal(checks=["statistical", "assertions"])))
    assert [c.verdict for c in rep.checks] == ["pass", "skipped"]
    assert rep.overall == "pass"


def test_missing_model_constant_skips():
    d = copy.deepcopy(bundled_document("E6"))
    d["checks"] = ["tk_identities"]
    d.pop("assertions", None)
    rep = run_scenario(load_scenario(d))
    assert rep.checks[0].verdict == "skipped" and "model" in rep.checks[0].reason


def test_assertion_own_tolerance_is_honoured():
    d = minimal(checks=["assertions"], assertions=[{"name": "g", "target": "metric(u,u)", "expr": "1.001", "tolerance": 1e-2}])
    rep = run_scenario(load_scenario(d))
    assert rep.overall == "pass"
    assert rep.checks[0].details["raw_max"]["g"] == pytest.approx(1e-3)
    d["assertions"][0].pop("tolerance")
    assert run_scenario(load_scenario(d)).overall == "fail"


# ---------------------------------------------------------------- emission


def test_emitted_examples_roundtrip(tmp_path):
    paths = emit_examples(tmp_path)
    assert [p.stem for p in paths] == list(BUNDLED_IDS)
    for p in paths:
        assert json.loads(p.read_text(encoding="utf-8")) == bundled_document(p.stem)
        assert load_scenario(p) == bundled_scenario(p.stem)
    again = emit_examples(tmp_path / "again")
    assert all(a.read_bytes() == b.read_bytes() for a, b in zip(paths, again))


@given(st.sampled_from(BUNDLED_IDS))
def test_dump_then_load_is_identity(ident):
    d = bundled_document(ident)
    assert json.loads(dump_scenario(d)) == d


# ----------------------------------------------------------------- catalog


def test_catalog_is_consistent():
    names = [c.name for c in CATALOG]
    assert len(names) == len(set(names)) == len(CHECKS)
    assert all(c.tolerance > 0 and c.description for c in CATALOG)
    text = catalog_text()
    assert all(n in text for n in names)
