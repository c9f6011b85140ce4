"""Charts, metric and connection fields, curvature and statistical checks.

Array conventions (``B`` is the batch of points, indices 0-based):

* metric ``g[B,i,j]``, ``dg[B,i,j,k] = d_k g_ij``, ``d2g[B,i,j,k,l]``
* connection ``gam[B,k,i,j] = Gamma^k_ij`` so that ``nabla_{d_i} d_j = Gamma^k_ij d_k``;
  its derivative ``dgam[B,k,i,j,l] = d_l Gamma^k_ij``
* curvature ``R[B,l,i,j,k]`` with ``R(d_i, d_j) d_k = R^l_ijk d_l``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .expr import array_jet
from .report import CheckReport, build_report

SINGULAR_COND = 1e12


class SingularMetricError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sample: a grid over the centred half-extent sub-box plus
    seeded uniform points in the full box."""

    grid: int = 3
    random: int = 17
    seed: int = 42

    def __post_init__(self):
        if self.grid < 0 or self.random < 0 or self.grid + self.random == 0:
            raise ValueError("sample plan must contain at least one point")

    def points(self, box) -> np.ndarray:
        box = np.asarray(box, dtype=float)
        lo, hi = box[:, 0], box[:, 1]
        n = box.shape[0]
        out = []
        if self.grid > 0:
            centre = 0.5 * (lo + hi)
            quarter = 0.25 * (hi - lo)
            if self.grid == 1:
                axes = [np.array([c]) for c in centre]
            else:
                axes = [np.linspace(c - q, c + q, self.grid) for c, q in zip(centre, quarter)]
            mesh = np.meshgrid(*axes, indexing="ij")
            out.append(np.stack([m.ravel() for m in mesh], axis=-1))
        if self.random > 0:
            rng = np.random.default_rng(self.seed)
            out.append(lo + (hi - lo) * rng.random((self.random, n)))
        return np.concatenate(out, axis=0)


# ---------------------------------------------------------------- metric


@dataclass(frozen=True)
class MetricJets:
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    ginv: np.ndarray

    @property
    def dginv(self) -> np.ndarray:
        """``d_k g^{ij}`` as ``[B,i,j,k]``."""
        return -np.einsum("bia,back,bcj->bijk", self.ginv, self.dg, self.ginv)


def metric_inverse_at(g: np.ndarray, points: np.ndarray | None = None) -> np.ndarray:
    """Inverse of a batch of symmetric matrices; hard error when near-singular."""
    g = np.asarray(g, dtype=float)
    single = g.ndim == 2
    gb = g[None] if single else g
    cond = np.linalg.cond(gb)
    bad = ~np.isfinite(cond) | (cond > SINGULAR_COND)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        where = ""
        if points is not None:
            p = np.atleast_2d(points)[idx]
            where = " at point (" + ", ".join(f"{v:.17g}" for v in p) + ")"
        raise SingularMetricError(f"singular metric{where}: condition number {cond[idx]:.3g}")
    inv = np.linalg.inv(gb)
    inv = 0.5 * (inv + np.swapaxes(inv, -1, -2))
    return inv[0] if single else inv


@dataclass(frozen=True)
class ChartGeometry:
    """A coordinate chart with metric trees and an optional connection.

    ``connection`` holds trees ``gamma[k][i][j]``.  ``connection_field`` may
    instead supply any object with a ``jet`` method (used for generated
    scenarios); if both are absent the Levi-Civita connection is used.
    """

    coords: tuple[str, ...]
    metric: tuple
    box: tuple[tuple[float, float], ...]
    connection: tuple | None = None
    connection_field: object | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def metric_jets(self, points) -> MetricJets:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        g, dg, d2g = array_jet(self.metric, p)
        g = 0.5 * (g + np.swapaxes(g, 1, 2))
        ginv = metric_inverse_at(g, p)
        return MetricJets(g, dg, d2g, ginv)

    def has_connection(self) -> bool:
        return self.connection is not None or self.connection_field is not None

    def primal(self) -> "ConnectionField":
        if self.connection_field is not None:
            return self.connection_field
        if self.connection is not None:
            return ExprConnection(self.connection)
        return LeviCivita()

    def dual(self) -> "ConnectionField":
        return DualConnection(self.primal())

    def mean(self) -> "ConnectionField":
        return MeanConnection(self.primal(), self.dual())

    def family(self, name: str) -> "ConnectionField":
        return {"primal": self.primal, "dual": self.dual, "mean": self.mean, "levi_civita": LeviCivita}[name]()


def metric_at(geom: ChartGeometry, p):
    """``(g, dg, d2g)`` at a point or batch."""
    mj = geom.metric_jets(p)
    if np.asarray(p).ndim == 1:
        return mj.g[0], mj.dg[0], mj.d2g[0]
    return mj.g, mj.dg, mj.d2g


# ------------------------------------------------------------ connections


class ConnectionField(Protocol):
    def jet(self, points: np.ndarray, mj: MetricJets) -> tuple[np.ndarray, np.ndarray]:
        ...


@dataclass(frozen=True)
class ExprConnection:
    trees: tuple

    def jet(self, points, mj):
        v, g, _ = array_jet(self.trees, points)
        return v, g


@dataclass(frozen=True)
class LeviCivita:
    def jet(self, points, mj):
        dg, d2g, ginv = mj.dg, mj.d2g, mj.ginv
        # lowered symbols Gamma_{l,ij} = 1/2 (d_i g_lj + d_j g_il - d_l g_ij)
        low = 0.5 * (np.einsum("blji->blij", dg) + np.einsum("bilj->blij", dg) - np.einsum("bijl->blij", dg))
        dlow = 0.5 * (
            np.einsum("bljim->blijm", d2g) + np.einsum("biljm->blijm", d2g) - np.einsum("bijlm->blijm", d2g)
        )
        gam = np.einsum("bkl,blij->bkij", ginv, low)
        dgam = np.einsum("bklm,blij->bkijm", mj.dginv, low) + np.einsum("bkl,blijm->bkijm", ginv, dlow)
        return gam, dgam


@dataclass(frozen=True)
class DualConnection:
    """``Gamma*^m_kj = g^{mi} (d_k g_ij - Gamma^l_ki g_lj)``."""

    base: object

    def jet(self, points, mj):
        gam, dgam = self.base.jet(points, mj)
        g, dg, d2g, ginv = mj.g, mj.dg, mj.d2g, mj.ginv
        low = np.einsum("bijk->bikj", dg) - np.einsum("blki,blj->bikj", gam, g)
        dlow = (
            np.einsum("bijkp->bikjp", d2g)
            - np.einsum("blkip,blj->bikjp", dgam, g)
            - np.einsum("blki,bljp->bikjp", gam, dg)
        )
        star = np.einsum("bmi,bikj->bmkj", ginv, low)
        dstar = np.einsum("bmip,bikj->bmkjp", mj.dginv, low) + np.einsum("bmi,bikjp->bmkjp", ginv, dlow)
        return star, dstar


@dataclass(frozen=True)
class MeanConnection:
    a: object
    b: object

    def jet(self, points, mj):
        ga, da = self.a.jet(points, mj)
        gb, db = self.b.jet(points, mj)
        return 0.5 * (ga + gb), 0.5 * (da + db)


@dataclass(frozen=True)
class CubicFormConnection:
    """Levi-Civita minus ``1/2 g^{-1} C`` for a totally symmetric cubic form
    ``C[k][i][j]`` given as trees.  The result is statistical with
    ``(nabla g)_kij = C_kij``."""

    cubic: tuple

    def jet(self, points, mj):
        lc, dlc = LeviCivita().jet(points, mj)
        c, dc, _ = array_jet(self.cubic, points)
        k = -0.5 * np.einsum("bkl,blij->bkij", mj.ginv, c)
        dk = -0.5 * (np.einsum("bklm,blij->bkijm", mj.dginv, c) + np.einsum("bkl,blijm->bkijm", mj.ginv, dc))
        return lc + k, dlc + dk


# --------------------------------------------------------------- pointwise


def connection_at(geom: ChartGeometry, p, family: str = "primal") -> np.ndarray:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    mj = geom.metric_jets(pts)
    gam, _ = geom.family(family).jet(pts, mj)
    return gam[0] if np.asarray(p).ndim == 1 else gam


def levi_civita_at(geom: ChartGeometry, p) -> np.ndarray:
    return connection_at(geom, p, "levi_civita")


def dual_connection_at(geom: ChartGeometry, p) -> np.ndarray:
    return connection_at(geom, p, "dual")


def nabla_g_from(gam: np.ndarray, g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """``C[B,k,i,j] = d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il``."""
    return (
        np.einsum("bijk->bkij", dg)
        - np.einsum("blki,blj->bkij", gam, g)
        - np.einsum("blkj,bil->bkij", gam, g)
    )


def nabla_g_at(geom: ChartGeometry, p, family: str = "primal") -> np.ndarray:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    mj = geom.metric_jets(pts)
    gam, _ = geom.family(family).jet(pts, mj)
    c = nabla_g_from(gam, mj.g, mj.dg)
    return c[0] if np.asarray(p).ndim == 1 else c


def duality_residual(gam: np.ndarray, star: np.ndarray, g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """``d_k g_ij - Gamma^l_ki g_lj - Gamma*^l_kj g_il`` as ``[B,k,i,j]``."""
    return (
        np.einsum("bijk->bkij", dg)
        - np.einsum("blki,blj->bkij", gam, g)
        - np.einsum("blkj,bil->bkij", star, g)
    )


def riemann_from(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    """Curvature ``R[B,l,i,j,k]`` from a connection jet; exactly antisymmetric in (i,j)."""
    t = np.einsum("bljki->blijk", dgam) + np.einsum("bmjk,blim->blijk", gam, gam)
    return t - np.swapaxes(t, 2, 3)


def riemann_at(geom: ChartGeometry, p, family: str = "primal") -> np.ndarray:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    mj = geom.metric_jets(pts)
    gam, dgam = geom.family(family).jet(pts, mj)
    r = riemann_from(gam, dgam)
    return r[0] if np.asarray(p).ndim == 1 else r


def covariant_derivative_tensor11(gam: np.ndarray, t: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """``(nabla_k T)^i_j = d_k T^i_j + Gamma^i_km T^m_j - Gamma^m_kj T^i_m`` as ``[B,k,i,j]``.

    ``t[B,i,j]`` and ``dt[B,i,j,k]``.
    """
    return (
        np.einsum("bijk->bkij", dt)
        + np.einsum("bikm,bmj->bkij", gam, t)
        - np.einsum("bmkj,bim->bkij", gam, t)
    )


def covariant_derivative_tensor11_at(geom: ChartGeometry, p, tensor_trees, family: str = "primal") -> np.ndarray:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    mj = geom.metric_jets(pts)
    gam, _ = geom.family(family).jet(pts, mj)
    t, dt, _ = array_jet(tensor_trees, pts)
    out = covariant_derivative_tensor11(gam, t, dt)
    return out[0] if np.asarray(p).ndim == 1 else out


def constant_curvature_model(g: np.ndarray) -> np.ndarray:
    """``delta^l_i g_jk - delta^l_j g_ik`` as ``[B,l,i,j,k]``."""
    n = g.shape[-1]
    eye = np.eye(n)
    return np.einsum("li,bjk->blijk", eye, g) - np.einsum("lj,bik->blijk", eye, g)


def least_squares_scale(target: np.ndarray, model: np.ndarray) -> tuple[float | None, np.ndarray]:
    """Best ``c`` with ``target ~ c * model``; returns ``(c, per-point max residual)``.

    ``c`` is ``None`` when the model vanishes identically.
    """
    denom = float(np.sum(model * model))
    if denom < 1e-300:
        return None, np.max(np.abs(target.reshape(target.shape[0], -1)), axis=1)
    c = float(np.sum(target * model) / denom)
    res = np.max(np.abs((target - c * model).reshape(target.shape[0], -1)), axis=1)
    return c, res


# ------------------------------------------------------------------ checks


def _family_data(geom: ChartGeometry, pts: np.ndarray, family: str):
    mj = geom.metric_jets(pts)
    gam, dgam = geom.family(family).jet(pts, mj)
    return mj, gam, dgam


def is_statistical_check(geom: ChartGeometry, plan: SamplePlan, tol: float = 1e-8, name="statistical") -> CheckReport:
    pts = plan.points(geom.box)
    mj, gam, _ = _family_data(geom, pts, "primal")
    torsion = gam - np.swapaxes(gam, 2, 3)
    c = nabla_g_from(gam, mj.g, mj.dg)
    codazzi = np.concatenate(
        [(c - np.einsum("bkij->bikj", c)).reshape(len(pts), -1), (c - np.einsum("bkij->bjik", c)).reshape(len(pts), -1)],
        axis=1,
    )
    return build_report(name, pts, {"torsion": torsion, "codazzi": codazzi}, tol)


def dual_involution_check(geom: ChartGeometry, plan: SamplePlan, tol: float = 1e-10, name="dual_involution") -> CheckReport:
    pts = plan.points(geom.box)
    mj = geom.metric_jets(pts)
    primal = geom.primal()
    gam, _ = primal.jet(pts, mj)
    back, _ = DualConnection(DualConnection(primal)).jet(pts, mj)
    star, _ = DualConnection(primal).jet(pts, mj)
    return build_report(
        name,
        pts,
        {"involution": back - gam, "duality": duality_residual(gam, star, mj.g, mj.dg)},
        tol,
    )


def mean_metric_check(geom: ChartGeometry, plan: SamplePlan, tol: float = 1e-9, name="mean_metric") -> CheckReport:
    pts = plan.points(geom.box)
    mj, gam, _ = _family_data(geom, pts, "mean")
    return build_report(name, pts, {"mean_nabla_g": nabla_g_from(gam, mj.g, mj.dg)}, tol)


def curvature_duality_residual(r: np.ndarray, rstar: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``g_lm R^m_ijk + g_km R*^m_ijl`` as ``[B,i,j,k,l]``."""
    a = np.einsum("blm,bmijk->bijkl", g, r)
    b = np.einsum("bkm,bmijl->bijkl", g, rstar)
    return a + b


def curvature_duality_check(
    geom: ChartGeometry, plan: SamplePlan, tol: float = 1e-8, name="curvature_duality", pair=("primal", "dual")
) -> CheckReport:
    pts = plan.points(geom.box)
    mj = geom.metric_jets(pts)
    r = riemann_from(*geom.family(pair[0]).jet(pts, mj))
    rs = riemann_from(*geom.family(pair[1]).jet(pts, mj))
    return build_report(name, pts, {"duality": curvature_duality_residual(r, rs, mj.g)}, tol)


def bianchi_residual(r: np.ndarray) -> np.ndarray:
    return r + np.einsum("bljki->blijk", r) + np.einsum("blkij->blijk", r)


@dataclass(frozen=True)
class CurvatureFit:
    c: float | None
    residual: float
    per_point: np.ndarray
    points: np.ndarray

    @property
    def indeterminate(self) -> bool:
        return self.c is None


def constant_curvature_fit(geom: ChartGeometry, plan: SamplePlan, family: str = "primal") -> CurvatureFit:
    if geom.dim < 2:
        raise ValueError("constant curvature needs dimension >= 2")
    pts = plan.points(geom.box)
    mj, gam, dgam = _family_data(geom, pts, family)
    r = riemann_from(gam, dgam)
    c, res = least_squares_scale(r, constant_curvature_model(mj.g))
    return CurvatureFit(c, float(np.max(res)), res, pts)


def constant_curvature_check(
    geom: ChartGeometry, plan: SamplePlan, tol: float = 1e-8, expected_c: float | None = None, name="constant_curvature"
) -> CheckReport:
    fits = {fam: constant_curvature_fit(geom, plan, fam) for fam in ("primal", "dual")}
    fit = fits["primal"]
    comps = {"fit_residual": fit.per_point}
    if expected_c is not None:
        comps["expected_c"] = abs((fit.c or 0.0) - expected_c)
    details = {"c": fit.c, "c_dual": fits["dual"].c, "residual_dual": fits["dual"].residual}
    return build_report(name, fit.points, comps, tol, details)
