"""Run catalog checks against a loaded scenario."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import __version__
from .assertions import TargetEvaluator, evaluate_expected
from .catalog import CHECKS
from .expr import array_value
from .geometry import (
    SamplePlan,
    constant_curvature_check,
    curvature_duality_check,
    dual_involution_check,
    is_statistical_check,
    mean_metric_check,
)
from .hypersurface import (
    curvature_xi_check,
    kappa_check,
    para_contact_like_check,
    phi_eta_check,
    prop5a_check,
    prop8a_check,
    tangential_check,
    tk_check,
    xi_mu_check,
)
from .report import CheckReport, RunReport, build_report, skipped_report
from .scenarios import Scenario, scenario_from_dict
from .structure import (
    almost_product_like_check,
    derive_f_star_at,
    eq_o_residual_check,
    product_flatness_check,
    nabla_F_check,
)
from .submanifold import (
    domain_points,
    eq_o_submanifold_check,
    fhts_check,
    frames_check,
    gauss_codazzi_ricci_check,
    induced_structure_check,
    invariance_check,
    parallel_f_check,
    lemma7_check,
    structure_curvature_check,
    totally_geodesic_check,
    umbilicity_check,
)

PARAMETER_SHIFTS = (0.37, -0.61)


def sample_points(sc: Scenario, plan: SamplePlan) -> np.ndarray:
    """Points in the chart assertions are written in (domain if immersed)."""
    if sc.immersion is not None:
        return domain_points(sc.immersion, plan)
    return plan.points(sc.geometry.box)


def assertion_components(sc: Scenario, pts: np.ndarray, tol: float) -> tuple[dict, dict]:
    """Per-assertion residuals normalised to the check tolerance.

    An assertion with its own tolerance ``t`` contributes ``|value - expected| * tol / t``
    so the report verdict stays ``max residual < tol``; raw maxima go to the details.
    """
    sub = sc.submanifold()
    ev = TargetEvaluator(sc.geometry, sc.structure, sub, pts)
    comps, raw = {}, {}
    for a in sc.assertions:
        r = np.abs(ev.value(a.target) - evaluate_expected(a.expr, pts))
        r = np.where(np.isnan(r), np.inf, r)
        raw[a.name] = float(np.max(r)) if r.size else 0.0
        scale = 1.0 if a.tolerance is None else tol / a.tolerance
        comps[a.name] = r * scale
    return comps, raw


def assertions_check(sc: Scenario, plan: SamplePlan, tol: float, name="assertions") -> CheckReport:
    if not sc.assertions:
        return skipped_report(name, tol, "scenario declares no assertions")
    pts = sample_points(sc, plan)
    comps, raw = assertion_components(sc, pts, tol)
    return build_report(name, pts, comps, tol, {"raw_max": raw})


def parameter_independence_check(sc: Scenario, plan: SamplePlan, tol: float, name="parameter_independence") -> CheckReport:
    """Re-evaluate the assertions after shifting every scenario parameter."""
    if not sc.parameters:
        return skipped_report(name, tol, "scenario declares no parameters")
    if not sc.assertions:
        return skipped_report(name, tol, "scenario declares no assertions")
    pts = sample_points(sc, plan)
    comps = {}
    for shift in PARAMETER_SHIFTS:
        doc = dict(sc.doc)
        doc["parameters"] = {k: v + shift for k, v in sc.parameters}
        shifted = scenario_from_dict(doc)
        c, _ = assertion_components(shifted, pts, tol)
        for k, v in c.items():
            comps[f"{k}@{shift:+g}"] = v
    return build_report(name, pts, comps, tol, {"shifts": list(PARAMETER_SHIFTS)})


def expected_f_star_check(sc: Scenario, plan: SamplePlan, tol: float, name="expected_f_star") -> CheckReport:
    pts = plan.points(sc.geometry.box)
    mj = sc.geometry.metric_jets(pts)
    F, _ = sc.structure.jet(pts)
    derived = derive_f_star_at(mj.g, F)
    expected = array_value(sc.expected_f_star, pts)
    return build_report(name, pts, {"F_star": derived - expected}, tol)


def _needs_c(name, sc, tol):
    if sc.model_c is None:
        return skipped_report(name, tol, "scenario declares no model constant (model.c)")
    return None


def run_check(sc: Scenario, name: str, plan: SamplePlan, tol: float) -> CheckReport:
    """Run one catalog check with an explicit plan and tolerance."""
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}")
    geom, F = sc.geometry, sc.structure
    level = CHECKS[name].level
    if level in ("submanifold", "hypersurface") and sc.immersion is None:
        return skipped_report(name, tol, "scenario has no immersion")
    if F is None and name in _STRUCTURE_CHECKS:
        return skipped_report(name, tol, "scenario has no structure field")
    sub = sc.submanifold()
    if name == "statistical":
        return is_statistical_check(geom, plan, tol)
    if name == "dual_involution":
        return dual_involution_check(geom, plan, tol)
    if name == "mean_metric":
        return mean_metric_check(geom, plan, tol)
    if name == "curvature_duality":
        return curvature_duality_check(geom, plan, tol)
    if name == "constant_curvature":
        return constant_curvature_check(geom, plan, tol, sc.model_c)
    if name == "product_flatness":
        return product_flatness_check(geom, F, plan, tol)
    if name == "almost_product_like":
        return almost_product_like_check(geom, F, plan, tol)
    if name == "expected_f_star":
        if sc.expected_f_star is None:
            return skipped_report(name, tol, "scenario declares no expected F*")
        return expected_f_star_check(sc, plan, tol)
    if name == "nabla_F":
        return nabla_F_check(geom, F, plan, tol)
    if name == "eq_o":
        return eq_o_residual_check(geom, F, sc.model_c, plan, tol)
    if name == "assertions":
        return assertions_check(sc, plan, tol)
    if name == "parameter_independence":
        return parameter_independence_check(sc, plan, tol)
    if name == "frames":
        return frames_check(sub, plan, tol)
    if name == "induced_structure":
        return induced_structure_check(sub, plan, tol)
    if name == "fhts":
        return fhts_check(sub, plan, tol)
    if name == "invariance":
        return invariance_check(sub, plan, tol)
    if name == "parallel_f":
        return parallel_f_check(sub, plan, tol)
    if name == "lemma7":
        return lemma7_check(sub, plan, tol)
    if name == "gauss_codazzi_ricci":
        return gauss_codazzi_ricci_check(sub, plan, tol)
    if name == "structure_curvature":
        return structure_curvature_check(sub, plan, tol)
    if name == "totally_geodesic":
        return totally_geodesic_check(sub, plan, tol)
    if name == "umbilicity":
        return umbilicity_check(sub, plan, tol)
    if name == "eq_o_submanifold":
        return _needs_c(name, sc, tol) or eq_o_submanifold_check(sub, sc.model_c, plan, tol)
    if sub.r != 1:
        return skipped_report(name, tol, f"codimension {sub.r} is not a hypersurface")
    if name == "tangential":
        return tangential_check(sub, plan, tol)
    if name == "xi_mu":
        return xi_mu_check(sub, plan, tol)
    if name == "phi_eta":
        return phi_eta_check(sub, plan, tol)
    if name == "kappa":
        return kappa_check(sub, plan, tol)
    if name == "prop5a":
        return prop5a_check(sub, plan, tol)
    if name == "prop8a":
        return prop8a_check(sub, plan, tol)
    if name == "curvature_xi":
        return curvature_xi_check(sub, plan, tol)
    if name == "tk_identities":
        return _needs_c(name, sc, tol) or tk_check(sub, sc.model_c, plan, tol)
    if name == "para_contact_like":
        return para_contact_like_check(sub, plan, tol)
    raise KeyError(f"no runner for check {name!r}")  # pragma: no cover


_STRUCTURE_CHECKS = {
    "product_flatness", "almost_product_like", "expected_f_star", "nabla_F", "eq_o", "fhts", "invariance", "parallel_f", "lemma7",
    "structure_curvature", "eq_o_submanifold", "tangential", "xi_mu", "phi_eta", "kappa", "prop5a", "prop8a",
    "curvature_xi", "tk_identities", "para_contact_like",
}


def effective_plan(sc: Scenario, points: int | None = None, seed: int | None = None) -> SamplePlan:
    """Scenario plan with the run-time overrides: ``points`` replaces the plan by
    that many seeded random points; ``seed`` replaces the seed."""
    plan = sc.plan
    if points is not None:
        plan = SamplePlan(grid=0, random=points, seed=plan.seed)
    if seed is not None:
        plan = replace(plan, seed=seed)
    return plan


def run_scenario(
    sc: Scenario,
    checks=None,
    tol: float | None = None,
    points: int | None = None,
    seed: int | None = None,
) -> RunReport:
    """Run the declared checks (or ``checks``) in catalog-independent declared order."""
    plan = effective_plan(sc, points, seed)
    names = list(checks) if checks else list(sc.checks)
    reports = []
    for name in names:
        t = tol if tol is not None else sc.tolerance(name)
        reports.append(run_check(sc, name, plan, t))
    return RunReport(sc.name, __version__, plan.seed, reports)
