"""Scenario documents: schema, loader, validator, bundled examples E1-E7 and
synthetic scenarios.

Documents are JSON objects.  Expressions are strings in the expression
language; numbers are accepted wherever an expression is expected.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .assertions import QUANTITIES, Target, TargetError, parse_target
from .catalog import CHECKS
from .expr import ExprError, ExprSyntaxError, array_value, parse_array
from .geometry import ChartGeometry, CubicFormConnection, SamplePlan, SingularMetricError, metric_inverse_at
from .structure import StructureField
from .submanifold import Immersion, ImmersionError, Submanifold


class ScenarioError(ValueError):
    """Schema, parse or dimension error; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# ------------------------------------------------------------------ schema

_TOP = {"name", "parameters", "manifold", "connection", "structure", "immersion", "model", "checks",
        "tolerances", "sample", "assertions"}
_MANIFOLD = {"dim", "coords", "box", "metric"}
_CONNECTION = {"gamma"}
_STRUCTURE = {"F", "expected_F_star"}
_IMMERSION = {"dim", "coords", "box", "map", "normals"}
_MODEL = {"c"}
_TOLERANCES = {"default", "overrides"}
_SAMPLE = {"grid", "random", "seed"}
_ASSERTION = {"name", "target", "expr", "tolerance"}


@dataclass(frozen=True)
class Assertion:
    name: str
    target: Target
    expr: Any  # expression tree
    source: str
    tolerance: float | None


@dataclass(frozen=True)
class Scenario:
    name: str
    parameters: tuple[tuple[str, float], ...]
    geometry: ChartGeometry
    structure: StructureField | None
    expected_f_star: tuple | None
    immersion: Immersion | None
    model_c: float | None
    checks: tuple[str, ...]
    tol_default: float | None
    tol_overrides: tuple[tuple[str, float], ...]
    plan: SamplePlan
    assertions: tuple[Assertion, ...]
    doc: dict = field(compare=False, repr=False, hash=False, default_factory=dict)

    def tolerance(self, check: str) -> float:
        over = dict(self.tol_overrides)
        if check in over:
            return over[check]
        if self.tol_default is not None:
            return self.tol_default
        return CHECKS[check].tolerance

    def submanifold(self) -> Submanifold | None:
        if self.immersion is None:
            return None
        return Submanifold(self.geometry, self.immersion, self.structure)

    @property
    def sample_box(self):
        return self.immersion.box if self.immersion is not None else self.geometry.box


def _require(d: dict, path: str, keys: set[str], required: set[str]):
    if not isinstance(d, dict):
        raise ScenarioError(path, "expected an object")
    unknown = sorted(set(d) - keys)
    if unknown:
        raise ScenarioError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown field")
    for k in sorted(required):
        if k not in d:
            raise ScenarioError(f"{path}.{k}" if path else k, "missing required field")


def _shape_of(x) -> tuple:
    if isinstance(x, list):
        if not x:
            return (0,)
        inner = [_shape_of(e) for e in x]
        if any(s != inner[0] for s in inner):
            return (len(x), None)
        return (len(x),) + inner[0]
    return ()


def _expect_shape(x, shape, path):
    s = _shape_of(x)
    if s != tuple(shape):
        raise ScenarioError(path, f"dimension mismatch: expected shape {tuple(shape)}, got {s}")


def _parse(src, path, coords, params):
    try:
        return parse_array(src, coords, params)
    except ExprSyntaxError as exc:
        raise ScenarioError(path, str(exc)) from exc
    except ExprError as exc:
        raise ScenarioError(path, str(exc)) from exc
    except TypeError as exc:
        raise ScenarioError(path, "expected an expression string or number") from exc


def _parse_nested(src, path, coords, params, shape):
    _expect_shape(src, shape, path)

    def rec(x, p):
        if isinstance(x, list):
            return tuple(rec(e, f"{p}[{i}]") for i, e in enumerate(x))
        if not isinstance(x, (str, int, float)) or isinstance(x, bool):
            raise ScenarioError(p, "expected an expression string or number")
        return _parse(x, p, coords, params)

    return rec(src, path)


def _box(b, dim, path):
    _expect_shape(b, (dim, 2), path)
    out = []
    for i, (lo, hi) in enumerate(b):
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (lo, hi)) or not lo < hi:
            raise ScenarioError(f"{path}[{i}]", "interval must be [lo, hi] with lo < hi")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _coords(c, dim, path):
    if not isinstance(c, list) or len(c) != dim or not all(isinstance(v, str) for v in c):
        raise ScenarioError(path, f"expected {dim} coordinate names")
    if len(set(c)) != dim:
        raise ScenarioError(path, "coordinate names must be distinct")
    return tuple(c)


def _number(v, path, positive=False):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not np.isfinite(v) or (positive and v <= 0):
        raise ScenarioError(path, "expected a finite" + (" positive" if positive else "") + " number")
    return float(v)


def _int(v, path):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ScenarioError(path, "expected a nonnegative integer")
    return v


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a decoded document and compile every expression."""
    _require(doc, "", _TOP, {"name", "manifold"})
    if not isinstance(doc["name"], str):
        raise ScenarioError("name", "expected a string")
    params_doc = doc.get("parameters", {})
    if not isinstance(params_doc, dict):
        raise ScenarioError("parameters", "expected an object")
    params = {k: _number(v, f"parameters.{k}") for k, v in params_doc.items()}

    man = doc["manifold"]
    _require(man, "manifold", _MANIFOLD, _MANIFOLD)
    n = _int(man["dim"], "manifold.dim")
    if n < 1:
        raise ScenarioError("manifold.dim", "dimension must be positive")
    coords = _coords(man["coords"], n, "manifold.coords")
    box = _box(man["box"], n, "manifold.box")
    metric = _parse_nested(man["metric"], "manifold.metric", coords, params, (n, n))

    gamma = None
    if "connection" in doc:
        _require(doc["connection"], "connection", _CONNECTION, _CONNECTION)
        gamma = _parse_nested(doc["connection"]["gamma"], "connection.gamma", coords, params, (n, n, n))
    geometry = ChartGeometry(coords, metric, box, gamma)

    structure = expected = None
    if "structure" in doc:
        _require(doc["structure"], "structure", _STRUCTURE, {"F"})
        structure = StructureField(_parse_nested(doc["structure"]["F"], "structure.F", coords, params, (n, n)))
        if "expected_F_star" in doc["structure"]:
            expected = _parse_nested(doc["structure"]["expected_F_star"], "structure.expected_F_star", coords,
                                     params, (n, n))

    immersion = None
    if "immersion" in doc:
        im = doc["immersion"]
        _require(im, "immersion", _IMMERSION, {"dim", "coords", "box", "map"})
        m = _int(im["dim"], "immersion.dim")
        if m < 1:
            raise ScenarioError("immersion.dim", "dimension must be positive")
        if m >= n:
            raise ScenarioError("immersion.dim", f"no normal space: domain dimension {m} >= ambient dimension {n}")
        dcoords = _coords(im["coords"], m, "immersion.coords")
        dbox = _box(im["box"], m, "immersion.box")
        fmap = _parse_nested(im["map"], "immersion.map", dcoords, params, (n,))
        normals = None
        if "normals" in im:
            normals = _parse_nested(im["normals"], "immersion.normals", dcoords, params, (n - m, n))
        immersion = Immersion(dcoords, fmap, dbox, normals)

    model_c = None
    if "model" in doc:
        _require(doc["model"], "model", _MODEL, _MODEL)
        model_c = _number(doc["model"]["c"], "model.c")

    checks = doc.get("checks", [])
    if not isinstance(checks, list):
        raise ScenarioError("checks", "expected a list of check names")
    for i, c in enumerate(checks):
        if c not in CHECKS:
            raise ScenarioError(f"checks[{i}]", f"unknown check {c!r}")
        level = CHECKS[c].level
        if level in ("submanifold", "hypersurface") and immersion is None:
            raise ScenarioError(f"checks[{i}]", f"check {c!r} needs an immersion")
        if level == "hypersurface" and immersion is not None and n - immersion.dim != 1:
            raise ScenarioError(f"checks[{i}]", f"check {c!r} needs codimension 1")
        if c == "expected_f_star" and expected is None:
            raise ScenarioError(f"checks[{i}]", "expected_f_star needs structure.expected_F_star")
        if c in ("almost_product_like", "nabla_F", "eq_o", "product_flatness", "fhts", "invariance", "parallel_f", "lemma7",
                 "structure_curvature", "eq_o_submanifold") or level == "hypersurface":
            if structure is None:
                raise ScenarioError(f"checks[{i}]", f"check {c!r} needs a structure field")

    tol_default, overrides = None, {}
    if "tolerances" in doc:
        tol = doc["tolerances"]
        _require(tol, "tolerances", _TOLERANCES, set())
        if "default" in tol:
            tol_default = _number(tol["default"], "tolerances.default", positive=True)
        ov = tol.get("overrides", {})
        if not isinstance(ov, dict):
            raise ScenarioError("tolerances.overrides", "expected an object")
        for k, v in ov.items():
            if k not in CHECKS:
                raise ScenarioError(f"tolerances.overrides.{k}", "unknown check")
            overrides[k] = _number(v, f"tolerances.overrides.{k}", positive=True)

    plan = SamplePlan()
    if "sample" in doc:
        s = doc["sample"]
        _require(s, "sample", _SAMPLE, set())
        try:
            plan = SamplePlan(
                _int(s.get("grid", 3), "sample.grid"),
                _int(s.get("random", 17), "sample.random"),
                _int(s.get("seed", 42), "sample.seed"),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError("sample", str(exc)) from exc

    assertions = []
    a_docs = doc.get("assertions", [])
    if not isinstance(a_docs, list):
        raise ScenarioError("assertions", "expected a list")
    expr_coords = immersion.coords if immersion is not None else coords
    for i, a in enumerate(a_docs):
        path = f"assertions[{i}]"
        _require(a, path, _ASSERTION, {"name", "target", "expr"})
        if not isinstance(a["name"], str) or not isinstance(a["target"], str):
            raise ScenarioError(path, "name and target must be strings")
        try:
            target = parse_target(a["target"], coords, immersion.coords if immersion is not None else None)
        except TargetError as exc:
            raise ScenarioError(f"{path}.target", str(exc)) from exc
        if QUANTITIES[target.quantity].level == "hypersurface" and n - immersion.dim != 1:
            raise ScenarioError(f"{path}.target", "hypersurface quantity needs codimension 1")
        src = a["expr"]
        tree = _parse(src, f"{path}.expr", expr_coords, params)
        tol_a = _number(a["tolerance"], f"{path}.tolerance", positive=True) if "tolerance" in a else None
        assertions.append(Assertion(a["name"], target, tree, str(src), tol_a))

    return Scenario(
        doc["name"], tuple(sorted(params.items())), geometry, structure, expected, immersion, model_c,
        tuple(checks), tol_default, tuple(sorted(overrides.items())), plan, tuple(assertions), copy.deepcopy(doc),
    )


def load_scenario(document) -> Scenario:
    """Load a scenario from JSON text, bytes, a path or an already decoded dict."""
    if isinstance(document, Path):
        document = document.read_bytes()
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ScenarioError("document", "not valid UTF-8") from exc
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioError("document", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(document)


def validate_scenario(doc) -> list[str]:
    """Diagnostics for a document; empty iff it loads and probes cleanly at the box centre."""
    try:
        sc = doc if isinstance(doc, Scenario) else load_scenario(doc)
    except ScenarioError as exc:
        return [str(exc)]
    diags = []
    centre = np.array([[0.5 * (lo + hi) for lo, hi in sc.geometry.box]])
    try:
        g = array_value(sc.geometry.metric, centre)
        if np.max(np.abs(g - np.swapaxes(g, 1, 2))) > 1e-12:
            diags.append("manifold.metric: metric is not symmetric at probe point")
        metric_inverse_at(g, centre)
    except SingularMetricError:
        diags.append("manifold.metric: singular metric at probe point")
    except ExprError as exc:
        diags.append(f"manifold.metric: {exc}")
    if sc.immersion is not None:
        try:
            sub = sc.submanifold()
            sub.frames(np.array([[0.5 * (lo + hi) for lo, hi in sc.immersion.box]]))
        except ImmersionError as exc:
            diags.append(f"immersion: {exc}")
        except SingularMetricError:
            diags.append("immersion: singular ambient metric at probe point")
        except ExprError as exc:
            diags.append(f"immersion: {exc}")
    return diags


def dump_scenario(doc: dict) -> str:
    """Canonical JSON text of a document (stable across runs)."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------- bundled examples

_A = "exp(-x1+x3)"
_B = "exp(x1-x3)"
_AMB = ["x1", "x2", "x3", "x4"]
_BOX4 = [[-1, 1]] * 4


def _e1_doc() -> dict:
    return {
        "name": "E1",
        "manifold": {
            "dim": 4,
            "coords": list(_AMB),
            "box": copy.deepcopy(_BOX4),
            "metric": [
                [f"1+{_A}", 0, 0, 0],
                [0, _B, 0, 0],
                [0, 0, _A, 0],
                [0, 0, 0, _B],
            ],
        },
        "structure": {
            "F": [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
            "expected_F_star": [
                [0, 0, f"(1+{_B})^(-1)", 0],
                [0, 0, 0, 1],
                [f"1+{_B}", 0, 0, 0],
                [0, 1, 0, 0],
            ],
        },
        "checks": ["almost_product_like", "expected_f_star"],
        "sample": {"grid": 1, "random": 24, "seed": 42},
    }


def _e2_gamma() -> list:
    n = 4
    gam = [[[0 for _ in range(n)] for _ in range(n)] for _ in range(n)]

    def put(pairs, vec):
        for i, j in pairs:
            for k in range(n):
                gam[k][i - 1][j - 1] = vec[k]

    put([(1, 1), (1, 3), (3, 1), (3, 3)], [_A, 0, _A, 0])
    put([(1, 2), (2, 1), (3, 4), (4, 3)], [0, f"-{_A}", 0, f"-(1+{_A})"])
    put([(1, 4), (4, 1), (2, 3), (3, 2)], [0, f"-(1+{_A})", 0, f"-{_A}"])
    put([(2, 2), (4, 4)], [f"-{_B}", 1, f"-{_B}", -1])
    put([(2, 4), (4, 2)], [f"-{_B}", -1, f"-{_B}", 1])
    return gam


# displayed dual-connection lines: (pairs, components along d1..d4)
E2_DUAL_LINES = (
    ([(1, 1)], [f"-{_A}*(2+{_A})/(1+{_A})", 0, f"-(1+{_A})", 0]),
    ([(1, 2), (2, 1), (1, 4), (4, 1)], [0, f"1+{_A}", 0, f"1+{_A}"]),
    ([(1, 3), (3, 1)], [f"-exp(-2*(x1-x3))/(1+{_A})", 0, f"-(1+{_A})", 0]),
    ([(2, 2), (4, 4)], [f"1/(1+{_A})", -1, f"(1+{_A})/exp(-2*(x1-x3))", 1]),
    ([(2, 3), (3, 2), (3, 4), (4, 3)], [0, _A, 0, _A]),
    ([(2, 4), (4, 2)], [_B, 1, _B, -1]),
    ([(3, 3)], [f"-exp(-2*(x1-x3))/(1+{_A})", 0, f"1-{_A}", 0]),
)


def _vector_assertions(prefix: str, quantity: str, args: str, comps: dict[str, Any]) -> list[dict]:
    out = []
    for comp, expr in comps.items():
        target = f"{quantity}({args})[{comp}]" if args else f"{quantity}[{comp}]"
        out.append({"name": f"{prefix}{target}", "target": target, "expr": str(expr)})
    return out


def _scalar_assertion(prefix, quantity, args, expr) -> dict:
    target = f"{quantity}({args})" if args else quantity
    return {"name": f"{prefix}{target}", "target": target, "expr": str(expr)}


def _e2_doc() -> dict:
    doc = _e1_doc()
    doc["name"] = "E2"
    doc["connection"] = {"gamma": _e2_gamma()}
    doc["checks"] = [
        "statistical", "dual_involution", "mean_metric", "curvature_duality", "almost_product_like",
        "expected_f_star", "nabla_F", "product_flatness", "assertions",
    ]
    asserts = []
    for pairs, vec in E2_DUAL_LINES:
        for i, j in pairs:
            asserts += _vector_assertions("", "nabla_star", f"x{i},x{j}", {f"x{k + 1}": vec[k] for k in range(4)})
    doc["assertions"] = asserts
    return doc


def _e3_doc() -> dict:
    doc = _e2_doc()
    doc["name"] = "E3"
    doc["parameters"] = {"x2": 0.0, "x4": 0.0}
    doc["immersion"] = {
        "dim": 2,
        "coords": ["x1", "x3"],
        "box": [[-1, 1], [-1, 1]],
        "map": ["x1", "x2", "x3", "x4"],
    }
    doc["checks"] = ["frames", "fhts", "invariance", "parallel_f", "assertions", "parameter_independence"]
    doc["sample"] = {"grid": 3, "random": 17, "seed": 42}
    a = []
    a.append(_scalar_assertion("", "induced_metric", "x1,x1", f"1+{_A}"))
    a.append(_scalar_assertion("", "induced_metric", "x1,x3", 0))
    a.append(_scalar_assertion("", "induced_metric", "x3,x3", _A))
    a += _vector_assertions("", "f", "x1", {"x1": 0, "x3": 1})
    a += _vector_assertions("", "f", "x3", {"x1": 1, "x3": 0})
    a += _vector_assertions("", "f_star", "x1", {"x1": 0, "x3": f"1+{_B}"})
    a += _vector_assertions("", "f_star", "x3", {"x1": f"(1+{_B})^(-1)", "x3": 0})
    for q in ("h", "h_star"):
        for arg in ("x1", "x3"):
            a += _vector_assertions("", q, arg, {"x2": 0, "x4": 0})
    for q in ("t", "t_star"):
        for arg in ("d_x2", "d_x4"):
            a += _vector_assertions("", q, arg, {"x1": 0, "x3": 0})
    for q in ("s", "s_star"):
        a += _vector_assertions("", q, "d_x2", {"x2": 0, "x4": 1})
        a += _vector_assertions("", q, "d_x4", {"x2": 1, "x4": 0})
    doc["assertions"] = a
    return doc


def _e4_doc() -> dict:
    doc = _e3_doc()
    doc["name"] = "E4"
    doc["checks"] = [
        "frames", "induced_structure", "totally_geodesic", "parallel_f", "lemma7", "gauss_codazzi_ricci",
        "structure_curvature", "assertions", "parameter_independence",
    ]
    a = []
    for i in (1, 3):
        for j in (1, 3):
            a += _vector_assertions("", "induced_nabla", f"x{i},x{j}", {"x1": _A, "x3": _A})
            a += _vector_assertions("", "sigma", f"x{i},x{j}", {"x2": 0, "x4": 0})
            a += _vector_assertions("", "sigma_star", f"x{i},x{j}", {"x2": 0, "x4": 0})
    for q in ("A", "A_star"):
        for v in ("d_x2", "d_x4"):
            for x in ("x1", "x3"):
                a += _vector_assertions("", q, f"{v},{x}", {"x1": 0, "x3": 0})
    lo, hi = {"x2": f"-{_A}", "x4": f"-(1+{_A})"}, {"x2": f"-(1+{_A})", "x4": f"-{_A}"}
    a += _vector_assertions("", "D", "x1,d_x2", lo)
    a += _vector_assertions("", "D", "x3,d_x4", lo)
    a += _vector_assertions("", "D", "x1,d_x4", hi)
    a += _vector_assertions("", "D", "x3,d_x2", hi)
    a += _vector_assertions("", "induced_nabla_star", "x1,x1", {"x1": f"-{_A}*(2+{_A})/(1+{_A})", "x3": f"-(1+{_A})"})
    for p in ("x1,x3", "x3,x1"):
        a += _vector_assertions("", "induced_nabla_star", p, {"x1": f"-exp(-2*(x1-x3))/(1+{_A})", "x3": f"-(1+{_A})"})
    a += _vector_assertions("", "induced_nabla_star", "x3,x3", {"x1": f"-exp(-2*(x1-x3))/(1+{_A})", "x3": f"1-{_A}"})
    one = {"x2": f"1+{_A}", "x4": f"1+{_A}"}
    three = {"x2": _A, "x4": _A}
    a += _vector_assertions("", "D_star", "x1,d_x2", one)
    a += _vector_assertions("", "D_star", "x1,d_x4", one)
    a += _vector_assertions("", "D_star", "x3,d_x2", three)
    a += _vector_assertions("", "D_star", "x3,d_x4", three)
    doc["assertions"] = a
    return doc


def _e5_doc() -> dict:
    doc = _e2_doc()
    doc["name"] = "E5"
    doc["parameters"] = {"x4": 0.0}
    doc["immersion"] = {
        "dim": 3,
        "coords": ["x1", "x2", "x3"],
        "box": [[-1, 1], [-1, 1], [-1, 1]],
        "map": ["x1", "x2", "x3", "x4"],
    }
    doc["checks"] = [
        "frames", "induced_structure", "parallel_f", "lemma7", "gauss_codazzi_ricci", "structure_curvature",
        "assertions",
    ]
    doc["sample"] = {"grid": 3, "random": 17, "seed": 42}
    a = []
    a.append(_scalar_assertion("", "induced_metric", "x1,x1", f"1+{_A}"))
    a.append(_scalar_assertion("", "induced_metric", "x2,x2", _B))
    a.append(_scalar_assertion("", "induced_metric", "x3,x3", _A))
    for i in (1, 3):
        for j in (1, 3):
            a += _vector_assertions("", "induced_nabla", f"x{i},x{j}", {"x1": _A, "x2": 0, "x3": _A})
    for p in ("x1,x2", "x2,x1"):
        a += _vector_assertions("", "induced_nabla", p, {"x1": 0, "x2": f"-{_A}", "x3": 0})
    a += _vector_assertions("", "induced_nabla", "x2,x2", {"x1": f"-{_B}", "x2": 1, "x3": f"-{_B}"})
    for p in ("x2,x3", "x3,x2"):
        a += _vector_assertions("", "induced_nabla", p, {"x1": 0, "x2": f"-(1+{_A})", "x3": 0})
    sig = {"x1,x1": 0, "x1,x3": 0, "x3,x3": 0, "x1,x2": f"-(1+{_A})", "x2,x2": -1, "x2,x3": f"-{_A}"}
    for p, v in sig.items():
        a += _vector_assertions("", "sigma", p, {"x4": v})
    a += _vector_assertions("", "A", "d_x4,x1", {"x1": 0, "x2": f"1+{_A}", "x3": 0})
    a += _vector_assertions("", "A", "d_x4,x2", {"x1": _B, "x2": 1, "x3": _B})
    a += _vector_assertions("", "A", "d_x4,x3", {"x1": 0, "x2": _A, "x3": 0})
    a += _vector_assertions("", "D", "x1,d_x4", {"x4": f"-{_A}"})
    a += _vector_assertions("", "D", "x2,d_x4", {"x4": 1})
    a += _vector_assertions("", "D", "x3,d_x4", {"x4": f"-(1+{_A})"})
    a += _vector_assertions("", "induced_nabla_star", "x1,x1",
                            {"x1": f"-{_A}*(2+{_A})/(1+{_A})", "x2": 0, "x3": f"-(1+{_A})"})
    for p in ("x1,x2", "x2,x1"):
        a += _vector_assertions("", "induced_nabla_star", p, {"x1": 0, "x2": f"1+{_A}", "x3": 0})
    for p in ("x1,x3", "x3,x1"):
        a += _vector_assertions("", "induced_nabla_star", p,
                                {"x1": f"-exp(-2*(x1-x3))/(1+{_A})", "x2": 0, "x3": f"-(1+{_A})"})
    a += _vector_assertions("", "induced_nabla_star", "x2,x2",
                            {"x1": f"1/(1+{_A})", "x2": -1, "x3": f"(1+{_A})/exp(-2*(x1-x3))"})
    for p in ("x2,x3", "x3,x2"):
        a += _vector_assertions("", "induced_nabla_star", p, {"x1": 0, "x2": _A, "x3": 0})
    a += _vector_assertions("", "induced_nabla_star", "x3,x3",
                            {"x1": f"-exp(-2*(x1-x3))/(1+{_A})", "x2": 0, "x3": f"1-{_A}"})
    sig_s = {"x1,x1": 0, "x1,x2": f"1+{_A}", "x1,x3": 0, "x2,x2": 1, "x2,x3": _A, "x3,x3": 0}
    for p, v in sig_s.items():
        a += _vector_assertions("", "sigma_star", p, {"x4": v})
    a += _vector_assertions("", "A_star", "d_x4,x1", {"x1": 0, "x2": f"-(1+{_A})", "x3": 0})
    a += _vector_assertions("", "A_star", "d_x4,x2", {"x1": f"-{_B}", "x2": -1, "x3": f"-{_B}"})
    a += _vector_assertions("", "A_star", "d_x4,x3", {"x1": 0, "x2": f"-{_A}", "x3": 0})
    a += _vector_assertions("", "D_star", "x1,d_x4", {"x4": f"1+{_A}"})
    a += _vector_assertions("", "D_star", "x2,d_x4", {"x4": -1})
    a += _vector_assertions("", "D_star", "x3,d_x4", {"x4": _A})
    doc["assertions"] = a
    return doc


_HALF = "exp((x1-x3)/2)"
_NHALF = "exp(-(x1-x3)/2)"


def _e6_doc() -> dict:
    doc = _e5_doc()
    doc["name"] = "E6"
    doc["immersion"]["normals"] = [[0, 0, 0, _NHALF]]
    doc["checks"] = [
        "frames", "fhts", "invariance", "tangential", "xi_mu", "phi_eta", "para_contact_like", "assertions",
    ]
    a = []
    a.append(_scalar_assertion("", "mu", "", 0))
    a += _vector_assertions("", "xi", "", {"x1": 0, "x2": _NHALF, "x3": 0})
    a.append(_scalar_assertion("", "eta_star", "x1", 0))
    a.append(_scalar_assertion("", "eta_star", "x2", _HALF))
    a.append(_scalar_assertion("", "eta_star", "x3", 0))
    a += _vector_assertions("", "f", "x1", {"x1": 0, "x2": 0, "x3": 1})
    a += _vector_assertions("", "f", "x2", {"x1": 0, "x2": 0, "x3": 0})
    a += _vector_assertions("", "f", "x3", {"x1": 1, "x2": 0, "x3": 0})
    a += _vector_assertions("", "phi", "x1", {"x1": 0, "x2": 0, "x3": 1})
    a += _vector_assertions("", "phi", "x2", {"x1": 0, "x2": 0, "x3": 0})
    a += _vector_assertions("", "phi", "x3", {"x1": 1, "x2": 0, "x3": 0})
    a += _vector_assertions("", "h", "x1", {"x4": 0})
    a += _vector_assertions("", "h", "x2", {"x4": 1})
    a += _vector_assertions("", "h", "x3", {"x4": 0})
    a += _vector_assertions("", "t", "d_x4", {"x1": 0, "x2": 1, "x3": 0})
    a += _vector_assertions("", "s", "d_x4", {"x4": 0})
    a += _vector_assertions("", "f_star", "x1", {"x1": 0, "x2": 0, "x3": f"1+{_B}"})
    a += _vector_assertions("", "f_star", "x2", {"x1": 0, "x2": 0, "x3": 0})
    a += _vector_assertions("", "f_star", "x3", {"x1": f"(1+{_B})^(-1)", "x2": 0, "x3": 0})
    a += _vector_assertions("", "h_star", "x1", {"x4": 0})
    a += _vector_assertions("", "h_star", "x2", {"x4": 1})
    a += _vector_assertions("", "h_star", "x3", {"x4": 0})
    a += _vector_assertions("", "t_star", "d_x4", {"x1": 0, "x2": 1, "x3": 0})
    a += _vector_assertions("", "s_star", "d_x4", {"x4": 0})
    doc["assertions"] = a
    return doc


def _e7_doc() -> dict:
    doc = _e6_doc()
    doc["name"] = "E7"
    doc["checks"] = [
        "frames", "tangential", "xi_mu", "phi_eta", "kappa", "induced_structure", "lemma7",
        "gauss_codazzi_ricci", "structure_curvature", "prop5a", "prop8a", "curvature_xi", "para_contact_like",
        "assertions",
    ]
    a = []
    xi = _NHALF  # xi = exp(-(x1-x3)/2) d2
    a.append(_scalar_assertion("", "kappa", "x1", f"-(1+2*{_A})/2"))
    a.append(_scalar_assertion("", "kappa", "x2", 1))
    a.append(_scalar_assertion("", "kappa", "x3", f"-(1+2*{_A})/2"))
    a.append(_scalar_assertion("", "kappa_star", "x1", f"(1+2*{_A})/2"))
    a.append(_scalar_assertion("", "kappa_star", "x2", -1))
    a.append(_scalar_assertion("", "kappa_star", "x3", f"(1+2*{_A})/2"))
    an = {
        "x1": {"x1": 0, "x2": f"(1+{_A})*{xi}", "x3": 0},
        "x2": {"x1": _HALF, "x2": xi, "x3": _HALF},
        "x3": {"x1": 0, "x2": f"{_A}*{xi}", "x3": 0},
    }
    for x, comps in an.items():
        a += _vector_assertions("", "A_N", x, comps)
        a += _vector_assertions("", "A_N_star", x, {k: (0 if v == 0 else f"-({v})") for k, v in comps.items()})
    k1 = f"-(1+2*{_A})/2*{xi}"
    a += _vector_assertions("", "nabla_xi", "x1", {"x1": 0, "x2": k1, "x3": 0})
    a += _vector_assertions("", "nabla_xi", "x3", {"x1": 0, "x2": k1, "x3": 0})
    a += _vector_assertions("", "nabla_xi", "x2", {"x1": f"-{_HALF}", "x2": xi, "x3": f"-{_HALF}"})
    zero = {"x1": 0, "x2": 0, "x3": 0}
    for b in ("x1", "x2", "x3"):
        a += _vector_assertions("", "nabla_phi", f"x1,{b}", zero)
        a += _vector_assertions("", "nabla_phi", f"x3,{b}", zero)
    a += _vector_assertions("", "nabla_phi", "x2,x1", {"x1": 0, "x2": f"-2*cosh((x1-x3)/2)*{xi}", "x3": 0})
    a += _vector_assertions("", "nabla_phi", "x2,x2", {"x1": _B, "x2": 0, "x3": _B})
    a += _vector_assertions("", "nabla_phi", "x2,x3", {"x1": 0, "x2": f"-{_NHALF}*{xi}", "x3": 0})
    doc["assertions"] = a
    doc["tolerances"] = {"overrides": {"assertions": 1e-8}}
    return doc


_BUNDLED = {"E1": _e1_doc, "E2": _e2_doc, "E3": _e3_doc, "E4": _e4_doc, "E5": _e5_doc, "E6": _e6_doc, "E7": _e7_doc}
BUNDLED_IDS = tuple(_BUNDLED)


def bundled_document(ident: str) -> dict:
    if ident not in _BUNDLED:
        raise KeyError(f"unknown bundled scenario {ident!r}; expected one of {', '.join(BUNDLED_IDS)}")
    return _BUNDLED[ident]()


def bundled_scenario(ident: str) -> Scenario:
    return scenario_from_dict(bundled_document(ident))


def emit_examples(directory) -> list[Path]:
    """Write the bundled documents as ``<id>.json`` files."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for ident in BUNDLED_IDS:
        p = d / f"{ident}.json"
        p.write_text(dump_scenario(bundled_document(ident)), encoding="utf-8")
        out.append(p)
    return out


# ---------------------------------------------------------- synthetic scenarios

_EUCLID = {
    2: [[1, 0], [0, 1]],
    3: [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    4: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
}


def _s2xs2(r: float = 1.0) -> dict:
    """S^2(r) x S^2(r) in (th1, p1, th2, p2) with F = diag(1,1,-1,-1)."""
    coords = ["th1", "p1", "th2", "p2"]
    return {
        "parameters": {"r": r},
        "manifold": {
            "dim": 4,
            "coords": coords,
            "box": [[0.6, 2.5], [-1, 1], [0.6, 2.5], [-1, 1]],
            "metric": [
                ["r^2", 0, 0, 0],
                [0, "r^2*sin(th1)^2", 0, 0],
                [0, 0, "r^2", 0],
                [0, 0, 0, "r^2*sin(th2)^2"],
            ],
        },
        "structure": {"F": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]},
        "model": {"c": 1.0 / (2.0 * r * r)},
    }


def _synthetic_docs() -> dict:
    docs = {}
    docs["sphere2"] = {
        "name": "sphere2",
        "manifold": {"dim": 2, "coords": ["th", "ph"], "box": [[0.6, 2.5], [-1, 1]],
                     "metric": [[1, 0], [0, "sin(th)^2"]]},
        "checks": ["statistical", "curvature_duality", "constant_curvature"],
    }
    docs["sphere_in_r3"] = {
        "name": "sphere_in_r3",
        "parameters": {"r": 2.0},
        "manifold": {"dim": 3, "coords": ["x", "y", "z"], "box": [[-3, 3]] * 3, "metric": _EUCLID[3]},
        "immersion": {
            "dim": 2,
            "coords": ["th", "ph"],
            "box": [[0.6, 2.5], [-1, 1]],
            "map": ["r*sin(th)*cos(ph)", "r*sin(th)*sin(ph)", "r*cos(th)"],
            "normals": [["-sin(th)*cos(ph)", "-sin(th)*sin(ph)", "-cos(th)"]],
        },
        "checks": ["frames", "induced_structure", "gauss_codazzi_ricci", "umbilicity"],
    }
    d = _s2xs2()
    d.update({"name": "s2xs2", "checks": ["statistical", "almost_product_like", "nabla_F", "eq_o", "product_flatness"]})
    docs["s2xs2"] = d
    d = _s2xs2()
    d.update({
        "name": "s2xs2_slice",
        "parameters": {"r": 1.0, "th0": 1.2, "p0": 0.3},
        "immersion": {"dim": 2, "coords": ["u1", "u2"], "box": [[0.6, 2.5], [-1, 1]],
                      "map": ["u1", "u2", "th0", "p0"]},
        "checks": ["frames", "invariance", "totally_geodesic", "eq_o_submanifold", "lemma7"],
    })
    docs["s2xs2_slice"] = d
    d = _s2xs2()
    d.update({
        "name": "s2xs2_diagonal",
        "immersion": {"dim": 2, "coords": ["u1", "u2"], "box": [[0.6, 2.5], [-1, 1]],
                      "map": ["u1", "u2", "u1", "u2"]},
        "checks": ["frames", "invariance", "eq_o_submanifold", "lemma7"],
    })
    docs["s2xs2_diagonal"] = d
    d = _s2xs2()
    d.update({
        "name": "s2xs2_hypersurface",
        "immersion": {"dim": 3, "coords": ["u1", "u2", "u3"], "box": [[0.6, 2.5], [-1, 1], [-1, 1]],
                      "map": ["u1", "u2", "u1", "u3"]},
        "checks": ["frames", "tangential", "xi_mu", "phi_eta", "kappa", "prop5a", "prop8a", "curvature_xi",
                   "tk_identities", "para_contact_like", "lemma7", "gauss_codazzi_ricci", "structure_curvature"],
    })
    docs["s2xs2_hypersurface"] = d
    docs["flat_geodesic_hypersurface"] = {
        "name": "flat_geodesic_hypersurface",
        "manifold": {"dim": 4, "coords": ["x1", "x2", "x3", "x4"], "box": [[-1, 1]] * 4, "metric": _EUCLID[4]},
        "structure": {"F": [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]},
        "immersion": {"dim": 3, "coords": ["u1", "u2", "u3"], "box": [[-1, 1]] * 3, "map": [0, "u1", "u2", "u3"]},
        "model": {"c": 1.0},
        "checks": ["tangential", "tk_identities"],
    }
    docs["flat_tangential_hyperplane"] = {
        "name": "flat_tangential_hyperplane",
        "manifold": {"dim": 3, "coords": ["x1", "x2", "x3"], "box": [[-1, 1]] * 3, "metric": _EUCLID[3]},
        "structure": {"F": [[0, 1, 0], [1, 0, 0], [0, 0, 1]]},
        "immersion": {"dim": 2, "coords": ["u1", "u2"], "box": [[-1, 1]] * 2, "map": [0, "u1", "u2"]},
        "model": {"c": 0.0},
        "checks": ["tangential", "xi_mu", "phi_eta", "kappa", "prop5a", "prop8a", "curvature_xi", "tk_identities",
                   "para_contact_like"],
    }
    docs["anti_invariant_line"] = {
        "name": "anti_invariant_line",
        "manifold": {"dim": 2, "coords": ["x1", "x2"], "box": [[-1, 1]] * 2, "metric": _EUCLID[2]},
        "structure": {"F": [[0, 1], [1, 0]]},
        "immersion": {"dim": 1, "coords": ["u"], "box": [[-1, 1]], "map": ["u", 0]},
        "checks": ["frames", "fhts", "invariance"],
    }
    docs["non_tangential"] = {
        "name": "non_tangential",
        "manifold": {"dim": 4, "coords": ["x1", "x2", "x3", "x4"], "box": [[-1, 1]] * 4, "metric": _EUCLID[4]},
        "structure": {"F": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]},
        "immersion": {"dim": 3, "coords": ["u1", "u2", "u3"], "box": [[-1, 1]] * 3, "map": ["u1", "u2", "u3", 0]},
        "checks": ["tangential", "xi_mu", "para_contact_like"],
    }
    return docs


SYNTHETIC_IDS = tuple(_synthetic_docs())


def synthetic_document(ident: str) -> dict:
    docs = _synthetic_docs()
    if ident not in docs:
        raise KeyError(f"unknown synthetic scenario {ident!r}; expected one of {', '.join(SYNTHETIC_IDS)}")
    return docs[ident]


def synthetic_scenario(ident: str) -> Scenario:
    return scenario_from_dict(synthetic_document(ident))


def any_document(ident: str) -> dict:
    return bundled_document(ident) if ident in _BUNDLED else synthetic_document(ident)


# ------------------------------------------------- random statistical geometries


def random_statistical_geometry(seed: int, dim: int = 3) -> ChartGeometry:
    """A random analytic metric with a Levi-Civita-plus-Codazzi connection.

    The metric is diagonally dominant with smooth bounded perturbations, and
    the cubic form is a random constant symmetric tensor scaled by a smooth
    positive function, so ``nabla g`` is totally symmetric by construction.
    """
    rng = np.random.default_rng(seed)
    coords = tuple(f"x{i + 1}" for i in range(dim))
    funcs = ("sin", "cos", "exp")

    def smooth_term(scale):
        i = int(rng.integers(dim))
        f = funcs[int(rng.integers(len(funcs)))]
        a = rng.uniform(-1, 1)
        arg = f"{a:.6f}*x{i + 1}" if f != "exp" else f"{0.3 * a:.6f}*x{i + 1}"
        return f"{scale * rng.uniform(-1, 1):.6f}*{f}({arg})"

    metric_src = [[None] * dim for _ in range(dim)]
    for i in range(dim):
        metric_src[i][i] = f"{2.0 + dim:.1f}+{smooth_term(0.5)}"
        for j in range(i + 1, dim):
            metric_src[i][j] = metric_src[j][i] = smooth_term(0.4)
    metric = parse_array(metric_src, coords)
    C = rng.normal(size=(dim, dim, dim))
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    C = 0.3 * sum(np.transpose(C, p) for p in perms) / 6.0
    scale = f"(1+0.5*sin({rng.uniform(-1, 1):.6f}*x1)^2)"
    cubic = parse_array(
        [[[f"{C[k, i, j]:.12f}*{scale}" for j in range(dim)] for i in range(dim)] for k in range(dim)], coords
    )
    box = tuple((-1.0, 1.0) for _ in range(dim))
    return ChartGeometry(coords, metric, box, None, CubicFormConnection(cubic))
