"""Numerical-accuracy survey.

* jet gradient versus central differences over random expressions and step sizes;
* dual-involution and curvature-duality residuals over random statistical geometries;
* identity-suite residuals on the tangential hypersurface as the sample box grows.

    python3 scripts/residual_survey.py [--expressions N] [--geometries N]
"""

import argparse

import numpy as np

from statgeom.checks import run_check
from statgeom.expr import eval_jet, eval_value, parse_expr
from statgeom.geometry import SamplePlan, curvature_duality_check, dual_involution_check
from statgeom.scenarios import bundled_document, random_statistical_geometry, scenario_from_dict

COORDS = ("x1", "x2", "x3")


def random_expression(rng, depth):
    # domain-safe generator: logs and roots only see positive arguments
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([*COORDS, f"{rng.uniform(-2, 2):.3f}"])
    kind = rng.integers(0, 4)
    a = random_expression(rng, depth - 1)
    if kind == 0:
        return f"({a}){rng.choice(['+', '-', '*'])}({random_expression(rng, depth - 1)})"
    if kind == 1:
        return f"{rng.choice(['sin', 'cos', 'exp', 'sinh', 'cosh'])}(({a})/4)"
    if kind == 2:
        return f"{rng.choice(['ln', 'sqrt'])}(2+sin({a}))"
    return f"({a})/(2+cos({random_expression(rng, depth - 1)}))"


def survey_jets(n):
    print("jet gradient vs central difference, max abs error")
    for h in (1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        worst = 0.0
        for seed in range(n):
            rng = np.random.default_rng(seed)
            t = parse_expr(random_expression(rng, 3), COORDS)
            p = rng.uniform(-1, 1, 3)
            g = eval_jet(t, p).gradient
            fd = np.array([(eval_value(t, p + h * e) - eval_value(t, p - h * e)) / (2 * h) for e in np.eye(3)])
            worst = max(worst, float(np.max(np.abs(g - fd))))
        print(f"  h = {h:.0e}: {worst:.2e}")


def survey_geometries(n):
    plan = SamplePlan(grid=0, random=8, seed=3)
    inv, dual = [], []
    for seed in range(n):
        geom = random_statistical_geometry(seed)
        inv.append(dual_involution_check(geom, plan, 1.0).max_residual)
        dual.append(curvature_duality_check(geom, plan, 1.0).max_residual)
    for name, vals in (("dual involution", inv), ("curvature duality", dual)):
        v = np.array(vals)
        print(f"{name:18s} median {np.median(v):.2e}  max {v.max():.2e}  over {n} geometries")


def survey_box():
    print("tangential-hypersurface suites versus sample box half-width")
    for w in (0.25, 0.5, 1.0, 1.5, 2.0):
        d = bundled_document("E7")
        d["immersion"]["box"] = [[-w, w]] * 3
        sc = scenario_from_dict(d)
        plan = SamplePlan(grid=1, random=6, seed=5)
        worst = {name: run_check(sc, name, plan, 1.0).max_residual for name in ("prop5a", "prop8a", "curvature_xi")}
        print(f"  w = {w:4.2f}: " + "  ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--expressions", type=int, default=200)
    ap.add_argument("--geometries", type=int, default=30)
    args = ap.parse_args()
    survey_jets(args.expressions)
    survey_geometries(args.geometries)
    survey_box()


if __name__ == "__main__":
    main()
