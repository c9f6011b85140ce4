"""Almost product-like structures: conjugate F*, projectors, parallelism and
the model curvature tensor.

Structure fields are (1,1)-tensors stored as ``F[B,i,j] = F^i_j`` so that
``F d_j = F^i_j d_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import array_jet
from .geometry import (
    ChartGeometry,
    MetricJets,
    SamplePlan,
    constant_curvature_model,
    covariant_derivative_tensor11,
    least_squares_scale,
    metric_inverse_at,
    riemann_from,
)
from .report import CheckReport, build_report

TRIVIAL_TOL = 1e-10


class NotInvolutiveError(ValueError):
    pass


def derive_f_star_at(g: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``F* = g^{-1} F^T g``, the g-adjoint of ``F`` (batched or single)."""
    ginv = metric_inverse_at(g)
    return ginv @ np.swapaxes(F, -1, -2) @ g


@dataclass(frozen=True)
class StructureField:
    """Expression trees ``F[i][j] = F^i_j``."""

    trees: tuple

    def jet(self, points) -> tuple[np.ndarray, np.ndarray]:
        v, d, _ = array_jet(self.trees, points)
        return v, d


def f_star_jet(F: np.ndarray, dF: np.ndarray, mj: MetricJets) -> tuple[np.ndarray, np.ndarray]:
    """Value and first derivatives of ``F*`` as ``[B,i,j]`` and ``[B,i,j,k]``."""
    Ft = np.swapaxes(F, 1, 2)
    fs = np.einsum("bia,bac,bcj->bij", mj.ginv, Ft, mj.g)
    dFt = np.swapaxes(dF, 1, 2)
    dfs = (
        np.einsum("biak,bac,bcj->bijk", mj.dginv, Ft, mj.g)
        + np.einsum("bia,back,bcj->bijk", mj.ginv, dFt, mj.g)
        + np.einsum("bia,bac,bcjk->bijk", mj.ginv, Ft, mj.dg)
    )
    return fs, dfs


@dataclass(frozen=True)
class Projectors:
    P: np.ndarray
    Q: np.ndarray


def projectors_at(F: np.ndarray, tol: float = 1e-10) -> Projectors:
    F = np.asarray(F, dtype=float)
    eye = np.eye(F.shape[-1])
    if np.max(np.abs(F @ F - eye)) >= tol:
        raise NotInvolutiveError("structure is not involutive (F^2 != I)")
    return Projectors(0.5 * (eye + F), 0.5 * (eye - F))


def _mat_res(a: np.ndarray) -> np.ndarray:
    return a.reshape(a.shape[0], -1)


def almost_product_like_check(
    geom: ChartGeometry, structure: StructureField, plan: SamplePlan, tol: float = 1e-10, name="almost_product_like"
) -> CheckReport:
    pts = plan.points(geom.box)
    mj = geom.metric_jets(pts)
    F, _ = structure.jet(pts)
    return almost_product_like_from(name, pts, mj.g, F, tol)


def almost_product_like_from(name, pts, g, F, tol) -> CheckReport:
    n = F.shape[-1]
    eye = np.eye(n)
    Fs = derive_f_star_at(g, F)
    comps = {
        "F_squared": F @ F - eye,
        "F_star_squared": Fs @ Fs - eye,
        # g(F e_i, F* e_j) - g_ij
        "compatibility": np.swapaxes(F, 1, 2) @ g @ Fs - g,
        "adjoint": np.swapaxes(F, 1, 2) @ g - g @ Fs,
        "f_star_involution": derive_f_star_at(g, Fs) - F,
    }
    # |tr F| <= n with equality only for F = +-I
    tr = np.trace(F, axis1=1, axis2=2)
    dist_pm = np.minimum(np.max(np.abs(_mat_res(F - eye)), axis=1), np.max(np.abs(_mat_res(F + eye)), axis=1))
    comps["trace_bound"] = np.maximum(np.abs(tr) - n, 0.0) + np.where(
        (np.abs(np.abs(tr) - n) < 1e-9) & (dist_pm > 1e-6), 1.0, 0.0
    )
    trivial_plus = bool(np.all(np.max(np.abs(_mat_res(F - eye)), axis=1) < TRIVIAL_TOL))
    trivial_minus = bool(np.all(np.max(np.abs(_mat_res(F + eye)), axis=1) < TRIVIAL_TOL))
    reason = None
    details = {"trivial": trivial_plus or trivial_minus}
    if trivial_plus or trivial_minus:
        comps["nontrivial"] = np.ones(len(pts))
        reason = "trivial structure: F = " + ("I" if trivial_plus else "-I") + " at every sampled point"
    return build_report(name, pts, comps, tol, details, reason)


def nabla_F_check(
    geom: ChartGeometry, structure: StructureField, plan: SamplePlan, tol: float = 1e-8, name="nabla_F"
) -> CheckReport:
    pts = plan.points(geom.box)
    mj = geom.metric_jets(pts)
    F, dF = structure.jet(pts)
    Fs, dFs = f_star_jet(F, dF, mj)
    gam, _ = geom.primal().jet(pts, mj)
    star, _ = geom.dual().jet(pts, mj)
    nF = covariant_derivative_tensor11(gam, F, dF)
    nFs = covariant_derivative_tensor11(star, Fs, dFs)
    # g((nabla_k F) e_j, e_l) - g(e_j, (nabla*_k F*) e_l)
    pairing = np.einsum("bkij,bil->bkjl", nF, mj.g) - np.einsum("bji,bkil->bkjl", mj.g, nFs)
    return build_report(name, pts, {"nabla_F": nF, "nabla_star_F_star": nFs, "adjoint_pairing": pairing}, tol)


def eq_o_model(g: np.ndarray, F: np.ndarray, c: float) -> np.ndarray:
    """Model curvature ``R[B,l,i,j,k]`` built from ``(g, F)`` and the constant ``c``."""
    S = g @ F  # S_jk = g(e_j, F e_k)
    n = g.shape[-1]
    eye = np.eye(n)
    t = (
        np.einsum("bjk,li->blijk", g, eye)
        - np.einsum("bik,lj->blijk", g, eye)
        + np.einsum("bjk,bli->blijk", S, F)
        - np.einsum("bik,blj->blijk", S, F)
        + np.einsum("bji,blk->blijk", S - np.swapaxes(S, 1, 2), F)
    )
    return c * t


def model_curvature_eq_o_at(g, F, c: float, i: int, j: int, k: int) -> np.ndarray:
    """Component vector of the model tensor applied to ``(e_i, e_j) e_k``."""
    return eq_o_model(np.asarray(g)[None], np.asarray(F)[None], c)[0, :, i, j, k]


def fit_eq_o_c(r: np.ndarray, g: np.ndarray, F: np.ndarray) -> float | None:
    c, _ = least_squares_scale(r, eq_o_model(g, F, 1.0))
    return c


def eq_o_residuals(geom: ChartGeometry, structure: StructureField, pts: np.ndarray, c: float | None):
    mj = geom.metric_jets(pts)
    F, _ = structure.jet(pts)
    Fs = derive_f_star_at(mj.g, F)
    r = riemann_from(*geom.primal().jet(pts, mj))
    rs = riemann_from(*geom.dual().jet(pts, mj))
    fitted = c is None
    if fitted:
        c = fit_eq_o_c(np.concatenate([r, rs]), np.concatenate([mj.g, mj.g]), np.concatenate([F, Fs]))
        c = 0.0 if c is None else c
    comps = {"primal": r - eq_o_model(mj.g, F, c), "dual": rs - eq_o_model(mj.g, Fs, c)}
    return comps, c, fitted


def eq_o_residual_check(
    geom: ChartGeometry, structure: StructureField, c: float | None, plan: SamplePlan, tol: float = 1e-8, name="eq_o"
) -> CheckReport:
    pts = plan.points(geom.box)
    comps, c, fitted = eq_o_residuals(geom, structure, pts, c)
    return build_report(name, pts, comps, tol, {"c": c, "c_fitted": fitted})


def product_flatness_check(
    geom: ChartGeometry, structure: StructureField, plan: SamplePlan, tol: float = 1e-8, fit_tol: float = 1e-6,
    name="product_flatness",
) -> CheckReport:
    """A nontrivial parallel structure admits no nonzero constant-curvature fit.

    Residual is ``|c|`` when the fit is good (residual < ``fit_tol``), else 0.
    """
    pts = plan.points(geom.box)
    mj = geom.metric_jets(pts)
    F, _ = structure.jet(pts)
    n = F.shape[-1]
    eye = np.eye(n)
    nontrivial = np.max(np.abs(np.minimum(np.abs(_mat_res(F - eye)).max(1), np.abs(_mat_res(F + eye)).max(1)))) > 1e-6
    r = riemann_from(*geom.primal().jet(pts, mj))
    c, res = least_squares_scale(r, constant_curvature_model(mj.g))
    fit_res = float(np.max(res))
    violation = abs(c) if (c is not None and nontrivial and fit_res < fit_tol) else 0.0
    tr = np.trace(F, axis1=1, axis2=2)
    comps = {"product_flatness": np.full(len(pts), violation), "trace_bound": np.maximum(np.abs(tr) - n, 0.0)}
    details = {"c": c, "fit_residual": fit_res, "nontrivial": bool(nontrivial)}
    return build_report(name, pts, comps, tol, details)
