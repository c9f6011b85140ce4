"""Immersed submanifolds: frames, induced dual geometry, F-blocks and the
identity checks built on them.

Everything is expressed in frame components at domain points ``u``:

* tangent vectors are components over the coordinate frame ``e_a = d x / d u^a``;
* normal vectors are components over the g-orthonormal normal frame ``nu_alpha``.

Per connection family (``primal``, ``dual``, ``mean``):

* ``gam[c,a,b]``: induced connection, ``nabla_{e_a} e_b = gam[c,a,b] e_c``
* ``sigma[al,a,b]``: second fundamental form
* ``A[al,c,a]``: shape operator, ``A_{nu_al} e_a = A[al,c,a] e_c``
* ``D[a,be,al]``: normal connection, ``D_{e_a} nu_al = D[a,be,al] nu_be``

Structure blocks: ``f[c,b]``, ``h[al,b]``, ``t[c,be]``, ``s[al,be]`` from
``F e_b = f e + h nu`` and ``F nu_be = t e + s nu``.  Derivatives along the
domain carry a trailing axis.  First derivatives of the normal frame are
exact (forward mode); derivatives of induced fields use a fourth-order central
stencil on exactly computed pointwise values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import array_jet
from .geometry import ChartGeometry, SamplePlan, riemann_from
from .report import CheckReport, build_report, skipped_report
from .structure import StructureField, derive_f_star_at, eq_o_residuals

STENCIL_H = 1e-3
FAMILIES = ("primal", "dual", "mean")
_STAR = {"primal": "dual", "dual": "primal"}


class ImmersionError(ValueError):
    pass


@dataclass(frozen=True)
class Immersion:
    coords: tuple[str, ...]
    map: tuple
    box: tuple[tuple[float, float], ...]
    normals: tuple | None = None

    @property
    def dim(self) -> int:
        return len(self.coords)


# ------------------------------------------------------------ first-order duals
# a dual array is (value[B,...], derivative[B,...,m])


def _ip(u, v, G, dG):
    uv, ud = u
    vv, vd = v
    val = np.einsum("bi,bij,bj->b", uv, G, vv)
    der = (
        np.einsum("bim,bij,bj->bm", ud, G, vv)
        + np.einsum("bi,bijm,bj->bm", uv, dG, vv)
        + np.einsum("bi,bij,bjm->bm", uv, G, vd)
    )
    return val, der


def _axpy(c, coef, e):
    """``c - coef * e``."""
    cv, cd = c
    kv, kd = coef
    ev, ed = e
    return cv - kv[:, None] * ev, cd - kd[:, None, :] * ev[:, :, None] - kv[:, None, None] * ed


def _normalize(c, G, dG):
    s, ds = _ip(c, c, G, dG)
    if np.any(s <= 1e-24):
        raise ImmersionError("normal candidate lies in the tangent space")
    nrm = np.sqrt(s)
    dn = ds / (2.0 * nrm[:, None])
    cv, cd = c
    return cv / nrm[:, None], cd / nrm[:, None, None] - cv[:, :, None] * (dn / (nrm * nrm)[:, None])[:, None, :]


# ------------------------------------------------------------------ frames


@dataclass
class Frames:
    u: np.ndarray
    x: np.ndarray
    J: np.ndarray  # [B,n,m]
    H: np.ndarray  # [B,n,m,m]
    G: np.ndarray
    dG: np.ndarray  # along domain, [B,n,n,m]
    Gind: np.ndarray
    Gind_inv: np.ndarray
    nu: np.ndarray  # [B,n,r]
    dnu: np.ndarray  # [B,n,r,m]
    mj: object

    def tan(self, W: np.ndarray) -> np.ndarray:
        """Tangent coefficients of ambient vectors ``W[B,n,...]`` via the metric projection."""
        lowered = np.einsum("bia,bij,bj...->ba...", self.J, self.G, W)
        return np.einsum("bca,ba...->bc...", self.Gind_inv, lowered)

    def nor(self, W: np.ndarray) -> np.ndarray:
        """Normal-frame components of ambient vectors ``W[B,n,...]``."""
        return np.einsum("bia,bij,bj...->ba...", self.nu, self.G, W)


class Submanifold:
    """An immersion into an ambient chart, with an optional structure field."""

    def __init__(self, ambient: ChartGeometry, imm: Immersion, structure: StructureField | None = None):
        self.ambient = ambient
        self.imm = imm
        self.structure = structure
        self.n = ambient.dim
        self.m = imm.dim
        if len(imm.map) != self.n:
            raise ImmersionError(f"immersion map has {len(imm.map)} components, ambient dimension is {self.n}")
        if self.m >= self.n:
            raise ImmersionError(f"no normal space: domain dimension {self.m} >= ambient dimension {self.n}")
        self.r = self.n - self.m
        if imm.normals is not None and len(imm.normals) != self.r:
            raise ImmersionError(f"expected {self.r} declared normals, got {len(imm.normals)}")
        centre = np.array([[0.5 * (lo + hi) for lo, hi in imm.box]])
        self._candidates = None
        self._signs = np.ones(self.r)
        self._probe = centre
        self._choose_candidates(centre)
        fr = self.frames(centre)
        # declared normals keep their orientation; derived ones get the sign rule
        for al in range(self.r if imm.normals is None else 0):
            v = fr.nu[0, :, al]
            nz = np.flatnonzero(np.abs(v) > 1e-12)
            if nz.size and v[nz[0]] < 0:
                self._signs[al] = -1.0

    def _choose_candidates(self, U):
        if self.imm.normals is not None:
            return
        J = array_jet(self.imm.map, U)[1][0]
        chosen = []
        basis = J.copy()
        for k in range(self.n):
            e = np.zeros((self.n, 1))
            e[k] = 1.0
            trial = np.concatenate([basis, e], axis=1)
            if np.linalg.matrix_rank(trial, tol=1e-8) > basis.shape[1]:
                chosen.append(k)
                basis = trial
            if len(chosen) == self.r:
                break
        self._candidates = chosen

    def frames(self, U) -> Frames:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        B = U.shape[0]
        x, J, H = array_jet(self.imm.map, U)
        svals = np.linalg.svd(J, compute_uv=False)
        if np.any(svals[:, -1] <= 1e-8):
            idx = int(np.argmin(svals[:, -1]))
            raise ImmersionError(
                "rank deficiency of the immersion Jacobian at u = (" + ", ".join(f"{v:.6g}" for v in U[idx]) + ")"
            )
        mj = self.ambient.metric_jets(x)
        G = mj.g
        dG = np.einsum("bijk,bka->bija", mj.dg, J)
        Gind = np.einsum("bia,bij,bjc->bac", J, G, J)
        Gind_inv = np.linalg.inv(Gind)
        # tangent vectors as duals; d_a e_b = H[:, :, b, a]
        tangents = [(J[:, :, a], H[:, :, a, :]) for a in range(self.m)]
        if self.imm.normals is not None:
            nv, nd, _ = array_jet(self.imm.normals, U)
            cands = [(nv[:, al, :], nd[:, al, :, :]) for al in range(self.r)]
            # declared normals must already be orthogonal to the tangent frame
            for al, c in enumerate(cands):
                for a, e in enumerate(tangents):
                    ip = np.einsum("bi,bij,bj->b", c[0], G, e[0])
                    scale = np.sqrt(np.einsum("bi,bij,bj->b", c[0], G, c[0]) * Gind[:, a, a])
                    if np.max(np.abs(ip) / scale) > 1e-9:
                        raise ImmersionError(f"declared normal {al + 1} is not orthogonal to tangent direction {a + 1}")
        else:
            cands = []
            for k in self._candidates:
                v = np.zeros((B, self.n))
                v[:, k] = 1.0
                cands.append((v, np.zeros((B, self.n, self.m))))
        ortho = []
        for e in tangents:
            c = e
            for q in ortho:
                c = _axpy(c, _ip(c, q, G, dG), q)
            ortho.append(_normalize(c, G, dG))
        normals = []
        for al, c in enumerate(cands):
            for q in ortho + normals:
                c = _axpy(c, _ip(c, q, G, dG), q)
            nv_, nd_ = _normalize(c, G, dG)
            sgn = self._signs[al]
            normals.append((sgn * nv_, sgn * nd_))
        nu = np.stack([v for v, _ in normals], axis=2)
        dnu = np.stack([d for _, d in normals], axis=2)
        return Frames(U, x, J, H, G, dG, Gind, Gind_inv, nu, dnu, mj)

    # ------------------------------------------------------------ pointwise

    def pointwise(self, U, families=FAMILIES) -> tuple[Frames, dict]:
        fr = self.frames(U)
        out = {}
        for fam in families:
            gam_amb, _ = self.ambient.family(fam).jet(fr.x, fr.mj)
            W = fr.H + np.einsum("bkij,bia,bjc->bkac", gam_amb, fr.J, fr.J)
            out[f"{fam}.gam"] = fr.tan(W)
            out[f"{fam}.sigma"] = fr.nor(W)
            Y = np.einsum("bial->bila", fr.dnu) + np.einsum("bkij,bia,bjl->bkal", gam_amb, fr.J, fr.nu)
            out[f"{fam}.A"] = -np.einsum("bcal->blca", fr.tan(Y))
            out[f"{fam}.D"] = np.einsum("bkal->bakl", fr.nor(Y))
        if self.structure is not None:
            F, _ = self.structure.jet(fr.x)
            for key, T in (("F", F), ("F_star", derive_f_star_at(fr.G, F))):
                TJ = T @ fr.J
                Tn = T @ fr.nu
                out[f"{key}.f"] = fr.tan(TJ)
                out[f"{key}.h"] = fr.nor(TJ)
                out[f"{key}.t"] = fr.tan(Tn)
                out[f"{key}.s"] = fr.nor(Tn)
        return fr, out

    def stencil(self, U, families=FAMILIES, h: float = STENCIL_H) -> dict:
        """Fourth-order central differences of every pointwise quantity."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        derivs = {}
        for a in range(self.m):
            step = np.zeros(self.m)
            step[a] = h
            vals = [self.pointwise(U + k * step, families)[1] for k in (-2, -1, 1, 2)]
            for key in vals[0]:
                d = (vals[0][key] - 8.0 * vals[1][key] + 8.0 * vals[2][key] - vals[3][key]) / (12.0 * h)
                derivs.setdefault(key, []).append(d)
        return {k: np.stack(v, axis=-1) for k, v in derivs.items()}

    def sample(self, U, families=FAMILIES, derivatives: bool = True) -> "SubData":
        fr, vals = self.pointwise(U, families)
        ders = self.stencil(U, families) if derivatives else {}
        fams = {}
        for fam in families:
            fams[fam] = FamilyData(
                **{q: vals[f"{fam}.{q}"] for q in ("gam", "sigma", "A", "D")},
                **{"d" + q: ders.get(f"{fam}.{q}") for q in ("gam", "sigma", "A", "D")},
            )
            mj = fr.mj
            gam_amb, dgam_amb = self.ambient.family(fam).jet(fr.x, mj)
            fams[fam].ambient_R = riemann_from(gam_amb, dgam_amb)
        blocks = {}
        if self.structure is not None:
            for key in ("F", "F_star"):
                blocks[key] = Blocks(
                    **{q: vals[f"{key}.{q}"] for q in ("f", "h", "t", "s")},
                    **{"d" + q: ders.get(f"{key}.{q}") for q in ("f", "h", "t", "s")},
                )
        return SubData(fr, fams, blocks)


@dataclass
class FamilyData:
    gam: np.ndarray
    sigma: np.ndarray
    A: np.ndarray
    D: np.ndarray
    dgam: np.ndarray | None = None
    dsigma: np.ndarray | None = None
    dA: np.ndarray | None = None
    dD: np.ndarray | None = None
    ambient_R: np.ndarray | None = None

    # derived quantities (require derivatives)
    def R(self) -> np.ndarray:
        return riemann_from(self.gam, self.dgam)

    def D_sigma(self) -> np.ndarray:
        """``(D_{e_a} sigma)(e_b, e_c)`` as ``[B,a,al,b,c]``."""
        return (
            np.einsum("bkxya->bakxy", self.dsigma)
            + np.einsum("bakl,blxy->bakxy", self.D, self.sigma)
            - np.einsum("bkdy,bdax->bakxy", self.sigma, self.gam)
            - np.einsum("bkxd,bday->bakxy", self.sigma, self.gam)
        )

    def nabla_A(self) -> np.ndarray:
        """``(nabla_{e_a} A)_{nu_be} e_b`` components ``[B,a,be,c,b]``."""
        return (
            np.einsum("bkcxa->bakcx", self.dA)
            + np.einsum("bcad,bkdx->bakcx", self.gam, self.A)
            - np.einsum("balk,blcx->bakcx", self.D, self.A)
            - np.einsum("bkcd,bdax->bakcx", self.A, self.gam)
        )

    def R_perp(self) -> np.ndarray:
        """``R_perp(e_a, e_b) nu_al`` component ``be`` as ``[B,a,b,be,al]``."""
        dD = self.dD  # [B,a,be,al,x]
        t = np.einsum("bykla->baykl", dD) + np.einsum("bakg,bygl->baykl", self.D, self.D)
        return t - np.swapaxes(t, 1, 2)


@dataclass
class Blocks:
    f: np.ndarray
    h: np.ndarray
    t: np.ndarray
    s: np.ndarray
    df: np.ndarray | None = None
    dh: np.ndarray | None = None
    dt: np.ndarray | None = None
    ds: np.ndarray | None = None


@dataclass
class SubData:
    frames: Frames
    families: dict[str, FamilyData]
    blocks: dict[str, Blocks] = field(default_factory=dict)

    @property
    def g(self) -> np.ndarray:
        return self.frames.Gind

    def ambient_curvature_on_frames(self, fam: str):
        """Tangent/normal splits of ``R~(e_a,e_b)e_c`` and ``R~(e_a,e_b)nu_al``.

        Returns ``(ZT[B,e,a,b,c], ZN[B,be,a,b,c], VT[B,e,a,b,al], VN[B,be,a,b,al], Zlow[B,d,a,b,c])``
        where ``Zlow`` is the full ambient pairing ``g~(R~(e_a,e_b)e_c, e_d)``.
        """
        fr = self.frames
        R = self.families[fam].ambient_R
        Z = np.einsum("blijk,bia,bjx,bkc->blaxc", R, fr.J, fr.J, fr.J)
        V = np.einsum("blijk,bia,bjx,bkc->blaxc", R, fr.J, fr.J, fr.nu)
        Zlow = np.einsum("bld,blm,bmaxc->bdaxc", fr.J, fr.G, Z)
        return fr.tan(Z), fr.nor(Z), fr.tan(V), fr.nor(V), Zlow


# -------------------------------------------------------------- utilities


def domain_points(imm: Immersion, plan: SamplePlan) -> np.ndarray:
    return plan.points(imm.box)


def _star(fam: str) -> str:
    return _STAR[fam]


def _blocks_for(fam: str) -> str:
    return "F" if fam == "primal" else "F_star"


# ------------------------------------------------------------------ checks


def frames_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-10, name="frames") -> CheckReport:
    U = domain_points(sub.imm, plan)
    fr = sub.frames(U)
    tn = np.einsum("bia,bij,bjl->bal", fr.J, fr.G, fr.nu)
    scale = np.sqrt(np.einsum("baa->ba", fr.Gind))[:, :, None]
    nn = np.einsum("bia,bij,bjl->bal", fr.nu, fr.G, fr.nu) - np.eye(sub.r)
    return build_report(name, U, {"tangent_normal": tn / scale, "normal_orthonormal": nn}, tol)


def induced_structure_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="induced_structure") -> CheckReport:
    """Symmetry of sigma, the sigma-shape pairing, self-adjointness of A, duality of
    the induced connections and of the normal connections, Weingarten split."""
    U = domain_points(sub.imm, plan)
    data = sub.sample(U, ("primal", "dual"), derivatives=True)
    g = data.g
    P, S = data.families["primal"], data.families["dual"]
    comps = {}
    for key, fam in (("", P), ("_star", S)):
        comps["sigma_symmetric" + key] = fam.sigma - np.swapaxes(fam.sigma, 2, 3)
        comps["induced_torsion" + key] = fam.gam - np.swapaxes(fam.gam, 2, 3)
        # g(A_V X, Y) = g(X, A_V Y)
        lowA = np.einsum("bdc,bkca->bkda", g, fam.A)
        comps["shape_self_adjoint" + key] = lowA - np.swapaxes(lowA, 2, 3)
    # g~(sigma(X,Y),V) = g(Y, A*_V X); g~(sigma*(X,Y),V) = g(Y, A_V X)
    comps["sigma_shape_pairing"] = P.sigma - np.einsum("bxc,bkca->bkax", g, S.A)
    comps["sigma_shape_pairing_star"] = S.sigma - np.einsum("bxc,bkca->bkax", g, P.A)
    # e_a g(e_x,e_c) = g(nabla_a e_x, e_c) + g(e_x, nabla*_a e_c)
    fr = data.frames
    H = fr.H
    dGind = (
        np.einsum("bixa,bij,bjc->bxca", H, fr.G, fr.J)
        + np.einsum("bix,bija,bjc->bxca", fr.J, fr.dG, fr.J)
        + np.einsum("bix,bij,bjca->bxca", fr.J, fr.G, H)
    )
    comps["induced_duality"] = (
        np.einsum("bxca->baxc", dGind)
        - np.einsum("bdax,bdc->baxc", P.gam, g)
        - np.einsum("bdac,bxd->baxc", S.gam, g)
    )
    # normal connections: 0 = g~(D_a nu_al, nu_be) + g~(nu_al, D*_a nu_be)
    comps["normal_duality"] = P.D + np.swapaxes(S.D, 2, 3)
    return build_report(name, U, comps, tol)


@dataclass
class InvarianceClass:
    verdict: str
    max_h: float
    max_f: float
    max_h_star: float
    max_f_star: float


def _max_abs(a) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def classify_invariance(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9) -> InvarianceClass:
    U = domain_points(sub.imm, plan)
    _, vals = sub.pointwise(U, families=())
    mh, mf = _max_abs(vals["F.h"]), _max_abs(vals["F.f"])
    verdict = "F-invariant" if mh < tol else ("F-anti-invariant" if mf < tol else "mixed")
    return InvarianceClass(verdict, mh, mf, _max_abs(vals["F_star.h"]), _max_abs(vals["F_star.f"]))


def fhts_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="fhts") -> CheckReport:
    """Block identities from F^2 = I and the g-pairings between starred and unstarred blocks."""
    U = domain_points(sub.imm, plan)
    fr, vals = sub.pointwise(U, families=())
    g = fr.Gind
    Im, Ir = np.eye(sub.m), np.eye(sub.r)
    comps = {}
    for key in ("F", "F_star"):
        f, h, t, s = (vals[f"{key}.{q}"] for q in "fhts")
        sfx = "" if key == "F" else "_star"
        comps["f2" + sfx] = f @ f - (Im - t @ h)
        comps["hf_sh" + sfx] = h @ f + s @ h
        comps["ft_ts" + sfx] = f @ t + t @ s
        comps["s2" + sfx] = s @ s - (Ir - h @ t)
    f, h, t, s = (vals[f"F.{q}"] for q in "fhts")
    fs, hs, ts, ss = (vals[f"F_star.{q}"] for q in "fhts")
    # g(fX,Y) = g(X,f*Y)
    comps["pair_f"] = np.swapaxes(f, 1, 2) @ g - g @ fs
    comps["pair_ff"] = np.swapaxes(f, 1, 2) @ g @ fs - (g - np.swapaxes(h, 1, 2) @ hs)
    # g~(hX,V) = g(X,t*V) ; g~(h*X,V) = g(X,tV)
    comps["pair_h_tstar"] = np.swapaxes(h, 1, 2) - g @ ts
    comps["pair_hstar_t"] = np.swapaxes(hs, 1, 2) - g @ t
    comps["pair_s"] = np.swapaxes(s, 1, 2) - ss
    comps["pair_ss"] = np.swapaxes(s, 1, 2) @ ss - (Ir - np.swapaxes(t, 1, 2) @ g @ ts)
    return build_report(name, U, comps, tol)


def invariance_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="invariance") -> CheckReport:
    """Classifies the submanifold and checks the four pointwise equivalences
    between F- and F*-block vanishing, plus the induced almost product-like
    axioms when the submanifold is F- or F*-invariant."""
    U = domain_points(sub.imm, plan)
    fr, vals = sub.pointwise(U, families=())
    f, h, t, s = (vals[f"F.{q}"] for q in "fhts")
    fs, hs, ts, ss = (vals[f"F_star.{q}"] for q in "fhts")

    def pmax(a):
        return np.max(np.abs(a.reshape(a.shape[0], -1)), axis=1) if a.size else np.zeros(a.shape[0])

    def equiv(a, b):
        # both vanish or both do not, pointwise
        za, zb = pmax(a) < tol, pmax(b) < tol
        return np.where(za == zb, 0.0, np.maximum(np.minimum(pmax(a), pmax(b)), tol))

    comps = {
        "tangent_invariant_vs_star_normal": equiv(h, ts),
        "anti_invariant_vs_star": equiv(f, fs),
        "normal_to_tangent_vs_star": equiv(s, ss),
        "normal_invariant_vs_star_tangent": equiv(t, hs),
    }
    cls = classify_invariance(sub, plan, tol)
    star_invariant = cls.max_h_star < tol
    if cls.verdict == "F-invariant" or star_invariant:
        g = fr.Gind
        Im = np.eye(sub.m)
        comps["induced_f_squared"] = f @ f - Im
        comps["induced_compatibility"] = np.swapaxes(f, 1, 2) @ g @ fs - g
    details = {
        "class": cls.verdict,
        "F_star_invariant": bool(star_invariant),
        "max_h": cls.max_h,
        "max_f": cls.max_f,
        "max_h_star": cls.max_h_star,
        "max_f_star": cls.max_f_star,
    }
    return build_report(name, U, comps, tol, details)


# ------------------------------------------- structure-derivative identities


def structure_derivative_terms(data: SubData, fam: str) -> dict[str, np.ndarray]:
    """The four structure-derivative identities for one family (all should vanish)."""
    P = data.families[fam]
    bl = data.blocks[_blocks_for(fam)]
    G, sig, A, D = P.gam, P.sigma, P.A, P.D
    f, h, t, s = bl.f, bl.h, bl.t, bl.s
    # (nabla_a f) e_b
    nf = (
        np.einsum("bcxa->bacx", bl.df)
        + np.einsum("bcad,bdx->bacx", G, f)
        - np.einsum("bcd,bdax->bacx", f, G)
    )
    i1 = nf - np.einsum("bkx,bkca->bacx", h, A) - np.einsum("bck,bkax->bacx", t, sig)
    # (Dbar_a h) e_b
    nh = (
        np.einsum("bkxa->bakx", bl.dh)
        + np.einsum("bakl,blx->bakx", D, h)
        - np.einsum("bkd,bdax->bakx", h, G)
    )
    i2 = nh + np.einsum("bkad,bdx->bakx", sig, f) - np.einsum("bkl,blax->bakx", s, sig)
    # (nabla-bar_a t) nu_be
    nt = (
        np.einsum("bcla->bacl", bl.dt)
        + np.einsum("bcad,bdl->bacl", G, t)
        - np.einsum("bck,bakl->bacl", t, D)
    )
    i3 = nt - np.einsum("bkl,bkca->bacl", s, A) + np.einsum("bcd,blda->bacl", f, A)
    # (D_a s) nu_be
    ns = (
        np.einsum("bkla->bakl", bl.ds)
        + np.einsum("bakg,bgl->bakl", D, s)
        - np.einsum("bkg,bagl->bakl", s, D)
    )
    i4 = ns + np.einsum("bkad,bdl->bakl", sig, t) + np.einsum("bkd,blda->bakl", h, A)
    return {"nabla_f": i1, "dbar_h": i2, "nablabar_t": i3, "d_s": i4, "_nf": nf}


def lemma7_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-8, name="lemma7") -> CheckReport:
    U = domain_points(sub.imm, plan)
    data = sub.sample(U, ("primal", "dual"))
    comps = {}
    for fam, sfx in (("primal", ""), ("dual", "_star")):
        for k, v in structure_derivative_terms(data, fam).items():
            if not k.startswith("_"):
                comps[k + sfx] = v
    return build_report(name, U, comps, tol)


def parallel_f_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-8, name="parallel_f") -> CheckReport:
    """f parallel for nabla iff f* parallel for nabla*, and the pairing
    g((nabla_Z f)X, Y) = g(X, (nabla*_Z f*)Y) behind it."""
    U = domain_points(sub.imm, plan)
    data = sub.sample(U, ("primal", "dual"))
    g = data.g
    nf = structure_derivative_terms(data, "primal")["_nf"]
    nfs = structure_derivative_terms(data, "dual")["_nf"]
    pairing = np.einsum("bacx,bcy->baxy", nf, g) - np.einsum("bxc,bacy->baxy", g, nfs)
    a = np.max(np.abs(nf.reshape(len(U), -1)))
    b = np.max(np.abs(nfs.reshape(len(U), -1)))
    equiv = 0.0 if (a < tol) == (b < tol) else max(min(a, b), tol)
    return build_report(
        name, U, {"pairing": pairing, "equivalence": np.full(len(U), equiv)}, tol, {"max_nabla_f": a, "max_nabla_star_f_star": b}
    )


# ------------------------------------------------- Gauss, Codazzi, Ricci


def gauss_codazzi_ricci_terms(data: SubData) -> dict[str, np.ndarray]:
    g = data.g
    out = {}
    for fam, sfx in (("primal", ""), ("dual", "_star")):
        P = data.families[fam]
        Q = data.families[_star(fam)]
        ZT, ZN, VT, VN, Zlow = data.ambient_curvature_on_frames(fam)
        R = P.R()
        Rlow = np.einsum("bdw,bwxyc->bdxyc", g, R)  # g(R(e_x,e_y)e_c, e_d) as [B,d,x,y,c]
        # g~(R~(X,Y)Z,W) = g(R(X,Y)Z,W) - g~(s(Y,Z),s*(X,W)) + g~(s(X,Z),s*(Y,W))
        gauss_rhs = (
            Rlow
            - np.einsum("bkyc,bkxd->bdxyc", P.sigma, Q.sigma)
            + np.einsum("bkxc,bkyd->bdxyc", P.sigma, Q.sigma)
        )
        out["gauss" + sfx] = Zlow - gauss_rhs
        Ds = P.D_sigma()  # [B,a,k,b,c]
        out["codazzi" + sfx] = ZN - (np.einsum("bxkyc->bkxyc", Ds) - np.einsum("bykxc->bkxyc", Ds))
        # g~(R~(X,Y)V,U) = g~(Rperp(X,Y)V,U) + g([A*_U, A_V]X, Y)
        Rp = P.R_perp()  # [B,a,b,be,al]
        comm = np.einsum("bkde,blea->bklda", Q.A, P.A) - np.einsum("blde,bkea->bklda", P.A, Q.A)  # [B,U=k,V=l,d,a]
        g_comm = np.einsum("bdy,bklda->bkaly", g, comm)  # [B,k,a,l,y]
        ricci_rhs = np.einsum("bxykl->bkxyl", Rp) + np.einsum("bkxly->bkxyl", g_comm)
        out["ricci" + sfx] = VN - ricci_rhs
        # full Weingarten curvature split (tangent part)
        nA = P.nabla_A()  # [B,a,be,c,b]
        out["weingarten_tangent" + sfx] = VT - (
            -np.einsum("bxlcy->bcxyl", nA) + np.einsum("bylcx->bcxyl", nA)
        )
    return out


def gauss_codazzi_ricci_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-7, name="gauss_codazzi_ricci") -> CheckReport:
    U = domain_points(sub.imm, plan)
    data = sub.sample(U, ("primal", "dual"))
    return build_report(name, U, gauss_codazzi_ricci_terms(data), tol)


# --------------------------------------------- structure-curvature family


def _apply_A(P: FamilyData, normal: np.ndarray) -> np.ndarray:
    """``A_{V}`` for normal components ``V[B,k,...]`` giving ``[B,c,a,...]``."""
    return np.einsum("bkca,bk...->bca...", P.A, normal)


def structure_curvature_terms(data: SubData, fam: str) -> dict[str, np.ndarray]:
    """Residuals (LHS - RHS) of the four curvature/structure identities.

    Indices: X=e_x, Y=e_y, Z=e_z, V=nu_v.  Tangent results ``[B,c,x,y,z]``,
    normal results ``[B,k,x,y,z]``.
    """
    P = data.families[fam]
    bl = data.blocks[_blocks_for(fam)]
    f, h, t, s = bl.f, bl.h, bl.t, bl.s
    R = P.R()  # [B,c,x,y,z]
    Ds = P.D_sigma()  # [B,a,k,b,c]
    nA = P.nabla_A()  # [B,a,k,c,b]
    Rp = P.R_perp()  # [B,x,y,k,l]
    sig, A = P.sigma, P.A

    codazzi = np.einsum("bxkyz->bkxyz", Ds) - np.einsum("bykxz->bkxyz", Ds)  # (D_X s)(Y,Z) - (D_Y s)(X,Z)
    # A_{s(Y,Z)} X and A_{s(X,Z)} Y as [B,c,x,y,z]
    A_sYZ_X = np.einsum("bkcx,bkyz->bcxyz", A, sig)
    A_sXZ_Y = np.einsum("bkcy,bkxz->bcxyz", A, sig)
    gauss_t = R - A_sYZ_X + A_sXZ_Y  # tangent part of R~(X,Y)Z

    # --- identity 1 (tangent), Z -> fZ on the left
    R_fZ = np.einsum("bcxyd,bdz->bcxyz", R, f)
    sig_fZ = np.einsum("bkyd,bdz->bkyz", sig, f)  # s(Y,fZ) as [B,k,y,z]
    lhs1 = (
        R_fZ
        - np.einsum("bkcx,bkyz->bcxyz", A, sig_fZ)
        + np.einsum("bkcy,bkxz->bcxyz", A, sig_fZ)
        - np.einsum("bkz,bxkcy->bcxyz", h, nA)
        + np.einsum("bkz,bykcx->bcxyz", h, nA)
    )
    rhs1 = np.einsum("bcd,bdxyz->bcxyz", f, gauss_t) + np.einsum("bck,bkxyz->bcxyz", t, codazzi)
    # --- identity 2 (normal)
    hZ = h  # [B,k,z]
    Rp_hZ = np.einsum("bxykl,blz->bkxyz", Rp, hZ)
    A_hZ = np.einsum("blcy,blz->bcyz", A, hZ)  # A_{hZ} e_y as [B,c,y,z]
    lhs2 = (
        Rp_hZ
        - np.einsum("bkxc,bcyz->bkxyz", sig, A_hZ)
        + np.einsum("bkyc,bcxz->bkxyz", sig, A_hZ)
        + np.einsum("bxkyd,bdz->bkxyz", Ds, f)
        - np.einsum("bykxd,bdz->bkxyz", Ds, f)
    )
    rhs2 = np.einsum("bkd,bdxyz->bkxyz", h, gauss_t) + np.einsum("bkl,blxyz->bkxyz", s, codazzi)
    # --- identity 3 (tangent), V normal
    tV = t  # [B,d,v]
    R_tV = np.einsum("bcxyd,bdv->bcxyv", R, tV)
    sig_tV = np.einsum("bkyd,bdv->bkyv", sig, tV)
    nA_XV_Y = np.einsum("bxvcy->bcxyv", nA)  # (nabla_X A)_V Y
    nA_YV_X = np.einsum("byvcx->bcxyv", nA)
    sAV = np.einsum("bkxc,bvcy->bkxyv", sig, A)  # s(X, A_V Y)
    sAVr = np.einsum("bkyc,bvcx->bkxyv", sig, A)  # s(Y, A_V X)
    Rp_V = np.einsum("bxykv->bkxyv", Rp)
    lhs3 = (
        R_tV
        - np.einsum("bkcx,bkyv->bcxyv", A, sig_tV)
        + np.einsum("bkcy,bkxv->bcxyv", A, sig_tV)
        - np.einsum("bkv,bxkcy->bcxyv", s, nA)
        + np.einsum("bkv,bykcx->bcxyv", s, nA)
    )
    rhs3 = (
        -np.einsum("bcd,bdxyv->bcxyv", f, nA_XV_Y)
        + np.einsum("bcd,bdxyv->bcxyv", f, nA_YV_X)
        + np.einsum("bck,bkxyv->bcxyv", t, Rp_V - sAV + sAVr)
    )
    # --- identity 4 (normal)
    A_sV = np.einsum("blcy,blv->bcyv", A, s)  # A_{sV} e_y
    lhs4 = (
        np.einsum("bxykl,blv->bkxyv", Rp, s)
        - np.einsum("bkxc,bcyv->bkxyv", sig, A_sV)
        + np.einsum("bkyc,bcxv->bkxyv", sig, A_sV)
        + np.einsum("bxkyd,bdv->bkxyv", Ds, tV)
        - np.einsum("bykxd,bdv->bkxyv", Ds, tV)
    )
    rhs4 = (
        np.einsum("bkl,blxyv->bkxyv", s, Rp_V - sAV + sAVr)
        - np.einsum("bkd,bdxyv->bkxyv", h, nA_XV_Y)
        + np.einsum("bkd,bdxyv->bkxyv", h, nA_YV_X)
    )
    return {"tangent_fZ": lhs1 - rhs1, "normal_hZ": lhs2 - rhs2, "tangent_tV": lhs3 - rhs3, "normal_sV": lhs4 - rhs4}


def structure_curvature_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-7, name="structure_curvature") -> CheckReport:
    U = domain_points(sub.imm, plan)
    data = sub.sample(U, ("primal", "dual"))
    comps = {}
    for fam, sfx in (("primal", ""), ("dual", "_star")):
        for k, v in structure_curvature_terms(data, fam).items():
            comps[k + sfx] = v
    return build_report(name, U, comps, tol)


# --------------------------------------------------------- umbilicity


@dataclass
class UmbilicityReport:
    rho: dict[str, np.ndarray]  # family -> [B, r]
    umbilic_residual: dict[str, np.ndarray]
    geodesic_residual: dict[str, np.ndarray]
    trace: dict[str, np.ndarray]


def umbilicity_minimality_report(sub: Submanifold, U) -> UmbilicityReport:
    fr, vals = sub.pointwise(U, FAMILIES)
    m = sub.m
    out = UmbilicityReport({}, {}, {}, {})
    Im = np.eye(m)
    for fam in FAMILIES:
        A = vals[f"{fam}.A"]  # [B,k,c,a]
        tr = np.einsum("bkaa->bk", A)
        rho = tr / m
        out.trace[fam] = tr
        out.rho[fam] = rho
        out.umbilic_residual[fam] = np.max(np.abs(A - rho[:, :, None, None] * Im).reshape(len(A), A.shape[1], -1), axis=2)
        out.geodesic_residual[fam] = np.max(np.abs(A).reshape(len(A), A.shape[1], -1), axis=2)
    return out


def totally_geodesic_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="totally_geodesic") -> CheckReport:
    U = domain_points(sub.imm, plan)
    _, vals = sub.pointwise(U, ("primal", "dual"))
    comps = {
        "sigma": vals["primal.sigma"],
        "sigma_star": vals["dual.sigma"],
        "A": vals["primal.A"],
        "A_star": vals["dual.A"],
    }
    return build_report(name, U, comps, tol)


def umbilicity_check(
    sub: Submanifold, plan: SamplePlan, tol: float = 1e-7, expected_rho: float | None = None, name="umbilicity"
) -> CheckReport:
    """Totally umbilical with respect to the mean connection; rho reported for all families."""
    U = domain_points(sub.imm, plan)
    rep = umbilicity_minimality_report(sub, U)
    comps = {"umbilic_mean": rep.umbilic_residual["mean"]}
    if expected_rho is not None:
        comps["rho_mean"] = rep.rho["mean"] - expected_rho
    details = {}
    for fam in FAMILIES:
        details[f"rho_{fam}"] = [float(v) for v in np.mean(rep.rho[fam], axis=0)]
        details[f"trace_{fam}"] = [float(v) for v in rep.trace[fam][0]]
        details[f"umbilic_residual_{fam}"] = float(np.max(rep.umbilic_residual[fam]))
        details[f"geodesic_residual_{fam}"] = float(np.max(rep.geodesic_residual[fam]))
    details["minimal_mean"] = bool(np.max(np.abs(rep.trace["mean"])) < tol)
    return build_report(name, U, comps, tol, details)


# ------------------------------------------------- model-curvature consequences


def eq_o_submanifold_terms(data: SubData, c: float, fam: str = "primal") -> dict[str, np.ndarray]:
    P = data.families[fam]
    bl = data.blocks[_blocks_for(fam)]
    f, h, t, s = bl.f, bl.h, bl.t, bl.s
    g = data.g
    R = P.R()
    Ds = P.D_sigma()
    nA = P.nabla_A()
    Rp = P.R_perp()
    sig, A = P.sigma, P.A
    gf = g @ f  # gf[y,z] = g(e_y, f e_z)
    skew = np.swapaxes(gf, 1, 2) - gf  # skew[x,y] = g(fX,Y) - g(X,fY)
    eye = np.eye(g.shape[-1])
    # display 1: intrinsic curvature
    model_t = (
        np.einsum("byz,cx->bcxyz", g, eye)
        - np.einsum("bxz,cy->bcxyz", g, eye)
        + np.einsum("byz,bcx->bcxyz", gf, f)
        - np.einsum("bxz,bcy->bcxyz", gf, f)
        + np.einsum("bxy,bcz->bcxyz", skew, f)
    )
    d1 = R - (c * model_t + np.einsum("bkcx,bkyz->bcxyz", A, sig) - np.einsum("bkcy,bkxz->bcxyz", A, sig))
    # display 2: Codazzi part
    codazzi = np.einsum("bxkyz->bkxyz", Ds) - np.einsum("bykxz->bkxyz", Ds)
    model_n = (
        np.einsum("byz,bkx->bkxyz", gf, h) - np.einsum("bxz,bky->bkxyz", gf, h) + np.einsum("bxy,bkz->bkxyz", skew, h)
    )
    d2 = codazzi - c * model_n
    # display 3: (nabla_X A)_V Y - (nabla_Y A)_V X
    gt = g @ t  # gt[y,v] = g(e_y, t nu_v)
    lhs3 = np.einsum("bxvcy->bcxyv", nA) - np.einsum("byvcx->bcxyv", nA)
    model3 = (
        -np.einsum("byv,bcx->bcxyv", gt, f) + np.einsum("bxv,bcy->bcxyv", gt, f) - np.einsum("bxy,bcv->bcxyv", skew, t)
    )
    d3 = lhs3 - c * model3
    # display 4: Rperp(X,Y)V - s(X,A_V Y) + s(Y,A_V X)
    lhs4 = (
        np.einsum("bxykv->bkxyv", Rp)
        - np.einsum("bkxc,bvcy->bkxyv", sig, A)
        + np.einsum("bkyc,bvcx->bkxyv", sig, A)
    )
    model4 = (
        np.einsum("byv,bkx->bkxyv", gt, h) - np.einsum("bxv,bky->bkxyv", gt, h) + np.einsum("bxy,bkv->bkxyv", skew, s)
    )
    d4 = lhs4 - c * model4
    return {"intrinsic": d1, "codazzi": d2, "shape_derivative": d3, "normal_curvature": d4, "_Ds": Ds}


def eq_o_submanifold_check(
    sub: Submanifold, c: float, plan: SamplePlan, tol: float = 1e-7, name="eq_o_submanifold"
) -> CheckReport:
    """The four model-curvature consequences along the submanifold, and the
    trichotomy diagnosis when sigma is D-parallel."""
    amb_pts = np.asarray(sub.frames(domain_points(sub.imm, plan)).x)
    pre, _, _ = eq_o_residuals(sub.ambient, sub.structure, amb_pts, c)
    pre_res = max(float(np.max(np.abs(v))) for v in pre.values())
    if pre_res >= tol:
        return skipped_report(
            name, tol, f"ambient does not satisfy the model curvature with c = {c:g} (residual {pre_res:.3g})",
            {"precondition_residual": pre_res},
        )
    U = domain_points(sub.imm, plan)
    data = sub.sample(U, ("primal", "dual"))
    terms = eq_o_submanifold_terms(data, c, "primal")
    Ds = terms.pop("_Ds")
    comps = dict(terms)
    details = {"c": c, "precondition_residual": pre_res}
    max_Ds = float(np.max(np.abs(Ds)))
    details["max_D_sigma"] = max_Ds
    if max_Ds < tol:
        max_h = float(np.max(np.abs(data.blocks["F"].h)))
        max_f = float(np.max(np.abs(data.blocks["F"].f)))
        cands = {1: abs(c) if abs(c) < 1e-8 else np.inf, 2: max_h if max_h < tol else np.inf,
                 3: max_f if max_f < tol else np.inf}
        branch = next((b for b in (1, 2, 3) if np.isfinite(cands[b])), None)
        details["trichotomy_branch"] = branch
        comps["trichotomy"] = np.full(len(U), min(abs(c), max_h, max_f) if branch is None else 0.0)
        max_sigma = float(np.max(np.abs(data.families["primal"].sigma)))
        details["totally_geodesic"] = max_sigma < tol
        if branch == 3 and max_sigma < tol:
            # anti-invariant and totally geodesic: constant curvature c
            g = data.g
            eye = np.eye(sub.m)
            model = np.einsum("byz,cx->bcxyz", g, eye) - np.einsum("bxz,cy->bcxyz", g, eye)
            comps["induced_constant_curvature"] = data.families["primal"].R() - c * model
    return build_report(name, U, comps, tol, details)
