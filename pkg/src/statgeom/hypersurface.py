"""Codimension-one specialisation: unit normal N, the FN decomposition and
the tangential-hypersurface identity suites.

With a single normal ``N = nu_1`` the submanifold blocks give

* ``xi = t N`` and ``xi* = t* N`` (tangent parts of FN, F*N), ``mu = s = s*``;
* ``phi = f``, ``phi* = f*``;
* ``eta*(X) = g~(FX, N)`` (the ``h`` block) and ``eta(X) = g~(F*X, N)`` (``h*``);
* ``kappa(X) = g~(nabla~_X N, N)``, ``A_N``, ``A*_N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SamplePlan
from .report import CheckReport, build_report, skipped_report
from .structure import eq_o_residuals
from .submanifold import Submanifold, SubData, domain_points, structure_derivative_terms


class CodimensionError(ValueError):
    pass


def _require_hypersurface(sub: Submanifold):
    if sub.r != 1:
        raise CodimensionError(f"hypersurface checks need codimension 1, got {sub.r}")
    if sub.structure is None:
        raise CodimensionError("hypersurface checks need a structure field")


@dataclass
class XiData:
    xi: np.ndarray
    xi_star: np.ndarray
    mu: np.ndarray
    mu_star: np.ndarray


@dataclass
class PhiData:
    phi: np.ndarray
    phi_star: np.ndarray
    eta: np.ndarray
    eta_star: np.ndarray


@dataclass
class HyperData:
    """Hypersurface quantities at a batch of domain points."""

    data: SubData
    xi: np.ndarray  # [B,c]
    xi_star: np.ndarray
    mu: np.ndarray  # [B]
    mu_star: np.ndarray
    phi: np.ndarray  # [B,c,b]
    phi_star: np.ndarray
    eta: np.ndarray  # [B,b]
    eta_star: np.ndarray
    kappa: np.ndarray  # [B,a]
    kappa_star: np.ndarray
    A_N: np.ndarray  # [B,c,a]
    A_N_star: np.ndarray
    sigma_N: np.ndarray  # 'sigma [B,a,b]
    sigma_N_star: np.ndarray

    @property
    def g(self) -> np.ndarray:
        return self.data.g


def hyper_data(sub: Submanifold, U, derivatives: bool = True) -> HyperData:
    _require_hypersurface(sub)
    data = sub.sample(U, ("primal", "dual"), derivatives=derivatives)
    P, S = data.families["primal"], data.families["dual"]
    bF, bS = data.blocks["F"], data.blocks["F_star"]
    return HyperData(
        data,
        bF.t[:, :, 0],
        bS.t[:, :, 0],
        bF.s[:, 0, 0],
        bS.s[:, 0, 0],
        bF.f,
        bS.f,
        bS.h[:, 0, :],
        bF.h[:, 0, :],
        P.D[:, :, 0, 0],
        S.D[:, :, 0, 0],
        P.A[:, 0],
        S.A[:, 0],
        P.sigma[:, 0],
        S.sigma[:, 0],
    )


def xi_mu_at(sub: Submanifold, u) -> XiData:
    hd = hyper_data(sub, np.atleast_2d(u), derivatives=False)
    return XiData(hd.xi[0], hd.xi_star[0], float(hd.mu[0]), float(hd.mu_star[0]))


def phi_eta_at(sub: Submanifold, u, tol: float = 1e-9) -> PhiData:
    hd = hyper_data(sub, np.atleast_2d(u), derivatives=False)
    if abs(hd.mu[0]) >= tol:
        raise ValueError(f"point is not tangential: mu = {hd.mu[0]:.3g}")
    return PhiData(hd.phi[0], hd.phi_star[0], hd.eta[0], hd.eta_star[0])


def kappa_at(sub: Submanifold, u) -> tuple[np.ndarray, np.ndarray]:
    hd = hyper_data(sub, np.atleast_2d(u), derivatives=False)
    return hd.kappa[0], hd.kappa_star[0]


# ---------------------------------------------------------------- helpers


def _ip(g, X, Y):
    """``g(X, Y)`` for tangent component arrays ``X[B,c,...]``, ``Y[B,d,...]`` sharing trailing layout."""
    return np.einsum("bcd,bc...,bd...->b...", g, X, Y)


def _nabla_xi(hd: HyperData, fam: str) -> np.ndarray:
    """``nabla_{e_a} xi`` (or ``nabla*_{e_a} xi*``) as ``[B,a,c]``."""
    d = hd.data
    P = d.families[fam]
    key = "F" if fam == "primal" else "F_star"
    xi = d.blocks[key].t[:, :, 0]
    dxi = d.blocks[key].dt[:, :, 0, :]  # [B,c,a]
    return np.einsum("bca->bac", dxi) + np.einsum("bcad,bd->bac", P.gam, xi)


def _nbarA(hd: HyperData, fam: str) -> np.ndarray:
    """``(nabla-bar_{e_x} A)_N e_y`` as ``[B,x,c,y]``."""
    return hd.data.families[fam].nabla_A()[:, :, 0]


def _dkappa(hd: HyperData) -> np.ndarray:
    """``(d kappa)(e_x, e_y) = e_x kappa(e_y) - e_y kappa(e_x)`` as ``[B,x,y]`` (coordinate frames commute)."""
    dk = hd.data.families["primal"].dD[:, :, 0, 0, :]  # [B,b,a] = d_a kappa_b
    return np.einsum("byx->bxy", dk) - dk


def _commutator_pairing(hd: HyperData) -> np.ndarray:
    """``g([A_N, A*_N] e_x, e_y)`` as ``[B,x,y]``."""
    A, As = hd.A_N, hd.A_N_star
    comm = A @ As - As @ A  # [B,d,x]
    return np.einsum("bdy,bdx->bxy", hd.g, comm)


def _tangential_guard(name, sub, U, hd: HyperData, tol):
    worst = int(np.argmax(np.abs(hd.mu)))
    mu = float(np.abs(hd.mu[worst]))
    mu_s = float(np.max(np.abs(hd.mu_star)))
    if max(mu, mu_s) >= tol:
        pt = ", ".join(f"{v:.6g}" for v in U[worst])
        return skipped_report(
            name,
            tol,
            f"not a tangential hypersurface: |mu| = {mu:.3g} at u = ({pt}); tangential suite skipped",
            {"worst_point": [float(v) for v in U[worst]], "max_abs_mu": mu},
        )
    return None


# ----------------------------------------------------------------- checks


def tangential_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="tangential") -> CheckReport:
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U, derivatives=False)
    s_blocks = hd.data.blocks
    return build_report(
        name, U, {"mu": hd.mu, "s": s_blocks["F"].s, "s_star": s_blocks["F_star"].s}, tol,
        {"max_abs_mu": float(np.max(np.abs(hd.mu)))},
    )


def xi_mu_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="xi_mu") -> CheckReport:
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U, derivatives=False)
    g = hd.g
    gxx = _ip(g, hd.xi, hd.xi_star)
    comps = {"mu_consistency": hd.mu - hd.mu_star, "one_minus_mu2": 1.0 - hd.mu**2 - gxx}
    # mu = 1 forces xi and xi* orthogonal
    at_one = np.abs(hd.mu - 1.0) < 1e-10
    comps["orthogonal_at_mu_one"] = np.where(at_one, np.abs(gxx), 0.0)
    at_zero = np.abs(hd.mu) < 1e-10
    comps["unit_pairing_at_mu_zero"] = np.where(at_zero, np.abs(gxx - 1.0), 0.0)
    return build_report(name, U, comps, tol)


def _phi_identities(hd: HyperData) -> dict[str, np.ndarray]:
    g = hd.g
    m = g.shape[-1]
    Im = np.eye(m)
    phi, phs, xi, xis, eta, etas = hd.phi, hd.phi_star, hd.xi, hd.xi_star, hd.eta, hd.eta_star
    return {
        "phi_squared": phi @ phi - (Im - np.einsum("bc,bx->bcx", xi, etas)),
        "eta_star_phi": np.einsum("bc,bcx->bx", etas, phi),
        "phi_star_squared": phs @ phs - (Im - np.einsum("bc,bx->bcx", xis, eta)),
        "eta_phi_star": np.einsum("bc,bcx->bx", eta, phs),
        "phi_xi": np.einsum("bcd,bd->bc", phi, xi),
        "phi_star_xi_star": np.einsum("bcd,bd->bc", phs, xis),
        "eta_xi_star": np.einsum("bc,bc->b", eta, xis) - 1.0,
        "eta_star_xi": np.einsum("bc,bc->b", etas, xi) - 1.0,
    }


def phi_eta_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="phi_eta") -> CheckReport:
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U, derivatives=False)
    skip = _tangential_guard(name, sub, U, hd, tol)
    if skip:
        return skip
    g = hd.g
    comps = _phi_identities(hd)
    comps["eta_star_def"] = hd.eta_star - np.einsum("bxc,bc->bx", g, hd.xi_star)
    comps["eta_def"] = hd.eta - np.einsum("bxc,bc->bx", g, hd.xi)
    comps["phi_adjoint"] = np.swapaxes(hd.phi, 1, 2) @ g - g @ hd.phi_star
    comps["phi_metric"] = np.swapaxes(hd.phi, 1, 2) @ g @ hd.phi_star - (g - np.einsum("bx,by->bxy", hd.eta_star, hd.eta))
    return build_report(name, U, comps, tol)


def para_contact_like_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="para_contact_like") -> CheckReport:
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U, derivatives=False)
    skip = _tangential_guard(name, sub, U, hd, tol)
    if skip:
        return skip
    comps = _phi_identities(hd)
    g = hd.g
    comps["metric"] = np.swapaxes(hd.phi, 1, 2) @ g @ hd.phi_star - (g - np.einsum("bx,by->bxy", hd.eta_star, hd.eta))
    return build_report(name, U, comps, tol)


def kappa_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-9, name="kappa") -> CheckReport:
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U, derivatives=False)
    g = hd.g
    comps = {
        "kappa_sum": hd.kappa + hd.kappa_star,
        # 'sigma(X,Y) = g(A*_N X, Y), 'sigma*(X,Y) = g(A_N X, Y)
        "sigma_N": hd.sigma_N - np.einsum("bcx,bcy->bxy", hd.A_N_star, g),
        "sigma_N_star": hd.sigma_N_star - np.einsum("bcx,bcy->bxy", hd.A_N, g),
    }
    # full Weingarten system: nabla~_a N = -A_N e_a + kappa(e_a) N, rebuilt in ambient components
    fr = hd.data.frames
    amb = sub.ambient.family("primal").jet(fr.x, fr.mj)[0]
    dN = fr.dnu[:, :, 0, :] + np.einsum("bkij,bia,bj->bka", amb, fr.J, fr.nu[:, :, 0])
    rebuilt = -np.einsum("bkc,bca->bka", fr.J, hd.A_N) + np.einsum("ba,bk->bka", hd.kappa, fr.nu[:, :, 0])
    comps["weingarten"] = dN - rebuilt
    return build_report(name, U, comps, tol)


def prop5a_terms(hd: HyperData) -> dict[str, np.ndarray]:
    nxi = _nabla_xi(hd, "primal")
    nxis = _nabla_xi(hd, "dual")
    phiA = np.einsum("bcd,bda->bac", hd.phi, hd.A_N)  # phi(A_N e_a)
    phisAs = np.einsum("bcd,bda->bac", hd.phi_star, hd.A_N_star)
    return {
        "nabla_xi": nxi - (-phiA + np.einsum("ba,bc->bac", hd.kappa, hd.xi)),
        "nabla_star_xi_star": nxis - (-phisAs - np.einsum("ba,bc->bac", hd.kappa, hd.xi_star)),
        "eta_pairing": np.einsum("bc,bca->ba", hd.eta, hd.A_N_star) + np.einsum("bc,bca->ba", hd.eta_star, hd.A_N),
        "shape_xi": np.einsum("bca,ba->bc", hd.A_N, hd.xi_star) + np.einsum("bca,ba->bc", hd.A_N_star, hd.xi),
        "kappa_eta_star": hd.kappa - np.einsum("bc,bac->ba", hd.eta_star, nxi),
        "kappa_eta": hd.kappa + np.einsum("bc,bac->ba", hd.eta, nxis),
    }


def prop8a_terms(hd: HyperData) -> dict[str, np.ndarray]:
    g = hd.g
    nphi = structure_derivative_terms(hd.data, "primal")["_nf"]  # [B,a,c,b] = ((nabla_a phi) e_b)^c
    nphis = structure_derivative_terms(hd.data, "dual")["_nf"]
    gAs = np.einsum("bda,bdy->bay", hd.A_N_star, g)  # g(A*_N e_a, e_y)
    gA = np.einsum("bda,bdy->bay", hd.A_N, g)
    rhs = np.einsum("bay,bc->bacy", gAs, hd.xi) + np.einsum("by,bca->bacy", hd.eta_star, hd.A_N)
    rhs_s = np.einsum("bay,bc->bacy", gA, hd.xi_star) + np.einsum("by,bca->bacy", hd.eta, hd.A_N_star)
    return {"nabla_phi": nphi - rhs, "nabla_star_phi_star": nphis - rhs_s}


def _suite(name, sub, plan, tol, builder) -> CheckReport:
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U)
    skip = _tangential_guard(name, sub, U, hd, tol)
    if skip:
        return skip
    return build_report(name, U, builder(hd), tol)


def prop5a_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-7, name="prop5a") -> CheckReport:
    return _suite(name, sub, plan, tol, prop5a_terms)


def prop8a_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-7, name="prop8a") -> CheckReport:
    return _suite(name, sub, plan, tol, prop8a_terms)


def curvature_xi_terms(hd: HyperData) -> dict[str, np.ndarray]:
    d = hd.data
    g = hd.g
    P, S = d.families["primal"], d.families["dual"]
    R, Rs = P.R(), S.R()  # [B,c,x,y,z]
    nb, nbs = _nbarA(hd, "primal"), _nbarA(hd, "dual")  # [B,x,c,y]
    A, As = hd.A_N, hd.A_N_star
    phi, phis = hd.phi, hd.phi_star
    K = _commutator_pairing(hd) - _dkappa(hd)  # g([A,A*]X,Y) - dkappa(X,Y), [B,x,y]
    out = {}

    def phi_of(ph, v):  # v[B,x,c,y] -> [B,c,x,y]
        return np.einsum("bcd,bxdy->bcxy", ph, v)

    def eta_of(e, M):  # e(M e_x) for M[B,c,x]
        return np.einsum("bc,bcx->bx", e, M)

    R_xi = np.einsum("bcxyd,bd->bcxy", R, hd.xi)
    rhs = (
        -phi_of(phi, nb)
        + np.einsum("bcyx->bcxy", phi_of(phi, nb))
        - np.einsum("by,bcx->bcxy", eta_of(hd.eta_star, A), A)
        + np.einsum("bx,bcy->bcxy", eta_of(hd.eta_star, A), A)
        - np.einsum("bxy,bc->bcxy", K, hd.xi)
    )
    out["R_xi"] = R_xi - rhs
    Rs_xis = np.einsum("bcxyd,bd->bcxy", Rs, hd.xi_star)
    rhs_s = (
        -phi_of(phis, nbs)
        + np.einsum("bcyx->bcxy", phi_of(phis, nbs))
        - np.einsum("by,bcx->bcxy", eta_of(hd.eta, As), As)
        + np.einsum("bx,bcy->bcxy", eta_of(hd.eta, As), As)
        + np.einsum("bxy,bc->bcxy", K, hd.xi_star)
    )
    out["R_star_xi_star"] = Rs_xis - rhs_s

    # ambient curvature decompositions
    gAsZ = np.einsum("bdy,bdz->byz", As, g)  # g(A*_N e_y, e_z)
    gAZ = np.einsum("bdy,bdz->byz", A, g)
    nb_low = np.einsum("bxcy,bcz->bxyz", nb, g)  # g((nbar_X A)_N Y, Z)
    nbs_low = np.einsum("bxcy,bcz->bxyz", nbs, g)
    for fam, sfx in (("primal", ""), ("dual", "_star")):
        ZT, ZN, VT, VN, _ = d.ambient_curvature_on_frames(fam)
        if fam == "primal":
            Rf, Af, gOther, nbn, nbv, sign = R, A, gAsZ, nbs_low, nb, -1.0
        else:
            Rf, Af, gOther, nbn, nbv, sign = Rs, As, gAZ, nb_low, nbs, 1.0
        tan = Rf - np.einsum("byz,bcx->bcxyz", gOther, Af) + np.einsum("bxz,bcy->bcxyz", gOther, Af)
        out["ambient_Z_tangent" + sfx] = ZT - tan
        out["ambient_Z_normal" + sfx] = ZN[:, 0] - (nbn - np.einsum("byxz->bxyz", nbn))
        out["ambient_N_tangent" + sfx] = VT[..., 0] - (-np.einsum("bxcy->bcxy", nbv) + np.einsum("bycx->bcxy", nbv))
        out["ambient_N_normal" + sfx] = VN[:, 0, :, :, 0] - sign * K
    # eta((nbar* A*)(X,Y)) - eta((nbar* A*)(Y,X)) = -eta*((nbar A)(X,Y)) + eta*((nbar A)(Y,X))
    e1 = np.einsum("bc,bxcy->bxy", hd.eta, nbs)
    e2 = np.einsum("bc,bxcy->bxy", hd.eta_star, nb)
    out["mixed_eta"] = (e1 - np.swapaxes(e1, 1, 2)) + (e2 - np.swapaxes(e2, 1, 2))
    # curvature/structure commutation along the hypersurface
    R_phiZ = np.einsum("bcxyd,bdz->bcxyz", R, phi)
    gAs_phiZ = np.einsum("bdx,bde,bez->bxz", As, g, phi)  # g(A*_N X, phi Z)
    lhs = (
        R_phiZ
        + np.einsum("bxz,bcy->bcxyz", gAs_phiZ, A)
        - np.einsum("byz,bcx->bcxyz", gAs_phiZ, A)
        - np.einsum("bz,bcxy->bcxyz", hd.eta_star, np.einsum("bxcy->bcxy", nb) - np.einsum("bycx->bcxy", nb))
    )
    phiA = np.einsum("bcd,bdx->bcx", phi, A)
    rhs = (
        np.einsum("bcd,bdxyz->bcxyz", phi, R)
        - np.einsum("byz,bcx->bcxyz", gAsZ, phiA)
        + np.einsum("bxz,bcy->bcxyz", gAsZ, phiA)
        + np.einsum("bxyz,bc->bcxyz", nbs_low - np.einsum("byxz->bxyz", nbs_low), hd.xi)
    )
    out["commutation"] = lhs - rhs
    Rs_phiZ = np.einsum("bcxyd,bdz->bcxyz", Rs, phis)
    gA_phisZ = np.einsum("bdx,bde,bez->bxz", A, g, phis)
    lhs_s = (
        Rs_phiZ
        + np.einsum("bxz,bcy->bcxyz", gA_phisZ, As)
        - np.einsum("byz,bcx->bcxyz", gA_phisZ, As)
        - np.einsum("bz,bcxy->bcxyz", hd.eta, np.einsum("bxcy->bcxy", nbs) - np.einsum("bycx->bcxy", nbs))
    )
    phisAs = np.einsum("bcd,bdx->bcx", phis, As)
    rhs_s = (
        np.einsum("bcd,bdxyz->bcxyz", phis, Rs)
        + np.einsum("bxyz,bc->bcxyz", nb_low - np.einsum("byxz->bxyz", nb_low), hd.xi_star)
        - np.einsum("byz,bcx->bcxyz", gAZ, phisAs)
        + np.einsum("bxz,bcy->bcxyz", gAZ, phisAs)
    )
    out["commutation_star"] = lhs_s - rhs_s
    return out


def curvature_xi_check(sub: Submanifold, plan: SamplePlan, tol: float = 1e-6, name="curvature_xi") -> CheckReport:
    return _suite(name, sub, plan, tol, curvature_xi_terms)


def tk_terms(hd: HyperData, c: float) -> dict[str, np.ndarray]:
    """Model-curvature identities on a tangential hypersurface.

    The first identity is evaluated with ``R(X,Y)Z`` on the left: this is the
    tangent part of the model curvature restricted to the hypersurface.
    """
    g = hd.g
    P = hd.data.families["primal"]
    R = P.R()
    A, As, phi = hd.A_N, hd.A_N_star, hd.phi
    eye = np.eye(g.shape[-1])
    gphi = g @ phi  # g(e_y, phi e_z)
    skew = np.swapaxes(gphi, 1, 2) - gphi  # g(phi X, Y) - g(X, phi Y)
    gAsZ = np.einsum("bdy,bdz->byz", As, g)
    model1 = (
        np.einsum("byz,cx->bcxyz", g, eye)
        - np.einsum("bxz,cy->bcxyz", g, eye)
        + np.einsum("byz,bcx->bcxyz", gphi, phi)
        - np.einsum("bxz,bcy->bcxyz", gphi, phi)
        + np.einsum("bxy,bcz->bcxyz", skew, phi)
    )
    tk1 = R - (c * model1 + np.einsum("byz,bcx->bcxyz", gAsZ, A) - np.einsum("bxz,bcy->bcxyz", gAsZ, A))
    nb, nbs = _nbarA(hd, "primal"), _nbarA(hd, "dual")
    nbs_low = np.einsum("bxcy,bcz->bxyz", nbs, g)
    es = hd.eta_star
    model2 = (
        np.einsum("bx,byz->bxyz", es, gphi) - np.einsum("by,bxz->bxyz", es, gphi) + np.einsum("bz,bxy->bxyz", es, skew)
    )
    tk2 = nbs_low - np.einsum("byxz->bxyz", nbs_low) - c * model2
    e = hd.eta
    model3 = (
        np.einsum("bx,bcy->bcxy", e, phi) - np.einsum("by,bcx->bcxy", e, phi) - np.einsum("bxy,bc->bcxy", skew, hd.xi)
    )
    tk3 = np.einsum("bxcy->bcxy", nb) - np.einsum("bycx->bcxy", nb) - c * model3
    tk4 = _commutator_pairing(hd) - _dkappa(hd) - c * (np.einsum("bx,by->bxy", e, es) - np.einsum("by,bx->bxy", e, es))
    return {"tk1": tk1, "tk2": tk2, "tk3": tk3, "tk4": tk4}


def tk_check(sub: Submanifold, c: float, plan: SamplePlan, tol: float = 1e-7, name="tk_identities") -> CheckReport:
    """Model-curvature identities plus the flatness diagnosis.

    If the hypersurface is totally geodesic for the primal connection the
    model constant must vanish; a nonzero ``c`` makes the check fail with the
    diagnosis (``|c|`` is reported as the residual).
    """
    U = domain_points(sub.imm, plan)
    hd = hyper_data(sub, U)
    skip = _tangential_guard(name, sub, U, hd, tol)
    if skip:
        return skip
    pre, _, _ = eq_o_residuals(sub.ambient, sub.structure, hd.data.frames.x, c)
    pre_res = max(float(np.max(np.abs(v))) for v in pre.values())
    geodesic = float(np.max(np.abs(hd.sigma_N)))
    details = {"c": c, "precondition_residual": pre_res, "max_sigma_N": geodesic}
    if geodesic < tol:
        details["flatness_diagnosis"] = abs(c) >= 1e-8
        reason = None
        if abs(c) >= 1e-8:
            reason = (
                f"flatness diagnosis: totally geodesic tangential hypersurface but model constant c = {c:g} != 0 "
                f"(model curvature residual of the ambient {pre_res:.3g})"
            )
        return build_report(name, U, {"flatness": np.full(len(U), abs(c) if abs(c) >= 1e-8 else 0.0)}, 1e-8,
                            details, reason)
    if pre_res >= tol:
        return skipped_report(name, tol, f"ambient does not satisfy the model curvature with c = {c:g} "
                                         f"(residual {pre_res:.3g})", details)
    return build_report(name, U, tk_terms(hd, c), tol, details)
