"""Check catalog: stable names, one-line descriptions, anchors and default tolerances."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CheckInfo:
    name: str
    level: str  # ambient | structure | submanifold | hypersurface | scenario
    tolerance: float
    description: str
    anchor: str


CATALOG: tuple[CheckInfo, ...] = (
    CheckInfo("statistical", "ambient", 1e-8,
              "torsion of the connection and total symmetry of nabla g",
              "statistical manifold: torsion-free connection with totally symmetric nabla g"),
    CheckInfo("dual_involution", "ambient", 1e-10,
              "dual of the dual connection reproduces the connection",
              "dual connection: Z g(X,Y) = g(nabla_Z X, Y) + g(X, nabla*_Z Y)"),
    CheckInfo("mean_metric", "ambient", 1e-9,
              "the mean connection (nabla + nabla*)/2 is metric",
              "mean of a dual pair is metric"),
    CheckInfo("curvature_duality", "ambient", 1e-8,
              "g(R(X,Y)Z,W) = -g(Z,R*(X,Y)W)",
              "curvature duality between R and R*"),
    CheckInfo("constant_curvature", "ambient", 1e-6,
              "least-squares constant-curvature fit of R and R*",
              "space of constant curvature: R(X,Y)Z = c{g(Y,Z)X - g(X,Z)Y}"),
    CheckInfo("product_flatness", "structure", 1e-8,
              "no nonzero constant-curvature fit for a nontrivial parallel structure",
              "constant curvature plus parallel nontrivial product-like structure forces flatness"),
    CheckInfo("almost_product_like", "structure", 1e-10,
              "F^2 = I, (F*)^2 = I, g(FX,F*Y) = g(X,Y), F != +-I",
              "almost product-like Riemannian manifold: F^2 = I, g(FX,Y) = g(X,F*Y)"),
    CheckInfo("expected_f_star", "structure", 1e-10,
              "derived conjugate structure F* equals the declared expected matrix",
              "conjugate structure F* = g^-1 F^T g"),
    CheckInfo("nabla_F", "structure", 1e-8,
              "nabla F = 0 and nabla* F* = 0 with the adjoint pairing",
              "locally product-like statistical manifold: nabla F = 0 iff nabla* F* = 0"),
    CheckInfo("eq_o", "structure", 1e-8,
              "R and R* against the model curvature built from (g, F, c) and (g, F*, c)",
              "model curvature c[g(Y,Z)X - g(X,Z)Y + g(Y,FZ)FX - g(X,FZ)FY + {g(FX,Y) - g(X,FY)}FZ]"),
    CheckInfo("assertions", "scenario", 1e-9,
              "scenario expression assertions evaluated at sampled points",
              "worked-example tables encoded as assertions"),
    CheckInfo("parameter_independence", "scenario", 1e-9,
              "assertions still hold after shifting every scenario parameter",
              "slice immersions with free ambient constants"),
    CheckInfo("frames", "submanifold", 1e-10,
              "tangent/normal frame orthonormality and unit normals",
              "tangent and normal vector fields along the immersion"),
    CheckInfo("induced_structure", "submanifold", 1e-8,
              "sigma symmetry, torsion, sigma-shape pairing, self-adjoint A, induced and normal duality",
              "Gauss and Weingarten formulas; g~(sigma(X,Y),V) = g(Y, A*_V X)"),
    CheckInfo("fhts", "submanifold", 1e-9,
              "f, h, t, s block identities, starred duals and g-pairings",
              "tangent and normal parts of FX and FV"),
    CheckInfo("invariance", "submanifold", 1e-9,
              "F-invariance class, F vs F* block equivalences, induced structure axioms",
              "F-invariant submanifolds inherit an almost product-like structure"),
    CheckInfo("parallel_f", "submanifold", 1e-7,
              "nabla f = 0 iff nabla* f* = 0",
              "parallel induced structure f iff parallel f*"),
    CheckInfo("lemma7", "submanifold", 1e-8,
              "four structure-derivative identities and their starred versions",
              "derivatives of f, h, t, s along the submanifold"),
    CheckInfo("gauss_codazzi_ricci", "submanifold", 1e-7,
              "Gauss, Codazzi, Ricci equations and the Weingarten cross-check for both families",
              "equations of Gauss, Codazzi and Ricci for statistical submanifolds"),
    CheckInfo("structure_curvature", "submanifold", 1e-7,
              "four curvature/structure identities and their starred corollary",
              "curvature applied to fZ, hZ, tV, sV"),
    CheckInfo("totally_geodesic", "submanifold", 1e-9,
              "sigma = sigma* = 0 and A = A* = 0",
              "totally geodesic submanifolds"),
    CheckInfo("umbilicity", "submanifold", 1e-7,
              "umbilicity and minimality report per normal and family",
              "totally umbilical (A = rho I) and minimal (trace A = 0) for the mean connection"),
    CheckInfo("eq_o_submanifold", "submanifold", 1e-7,
              "submanifold consequences of the model curvature and the trichotomy",
              "model-curvature consequences on submanifolds; D-parallel sigma forces c = 0, invariant or anti-invariant"),
    CheckInfo("tangential", "hypersurface", 1e-9,
              "mu = 0 (FN and F*N tangent)",
              "tangential hypersurface: FN and F*N tangent"),
    CheckInfo("xi_mu", "hypersurface", 1e-9,
              "1 - mu^2 = g(xi, xi*) and mu consistency",
              "FN = xi + mu N, F*N = xi* + mu N, 1 - mu^2 = g(xi, xi*)"),
    CheckInfo("phi_eta", "hypersurface", 1e-9,
              "phi, phi*, eta, eta* identities of a tangential hypersurface",
              "induced (phi, xi, eta) data of a tangential hypersurface"),
    CheckInfo("kappa", "hypersurface", 1e-9,
              "kappa + kappa* = 0, 'sigma pairings and the full Weingarten system",
              "Weingarten formula nabla~_X N = -A_N X + kappa(X) N"),
    CheckInfo("prop5a", "hypersurface", 1e-7,
              "nabla xi, nabla* xi* and the eta/kappa relations",
              "nabla_X xi = -phi(A_N X) + kappa(X) xi and its dual"),
    CheckInfo("prop8a", "hypersurface", 1e-7,
              "(nabla phi) and (nabla* phi*) formulas",
              "(nabla_X phi)Y = g(A*_N X,Y) xi + eta*(Y) A_N X and its dual"),
    CheckInfo("curvature_xi", "hypersurface", 1e-6,
              "R(X,Y)xi, R*(X,Y)xi*, ambient curvature decompositions, mixed eta, curvature commutation",
              "curvature along xi and ambient curvature decompositions on tangential hypersurfaces"),
    CheckInfo("tk_identities", "hypersurface", 1e-7,
              "four model-curvature identities; flatness diagnosis when 'sigma = 0 "
              "(d kappa on coordinate frames, brackets vanish)",
              "model curvature on tangential hypersurfaces; totally geodesic forces flatness"),
    CheckInfo("para_contact_like", "hypersurface", 1e-9,
              "almost para contact-like axioms and the para contact-like metric relation",
              "tangential hypersurfaces are para contact-like metric manifolds"),
)

CHECKS: dict[str, CheckInfo] = {c.name: c for c in CATALOG}


def catalog_text() -> str:
    lines = []
    for c in CATALOG:
        lines.append(f"{c.name:24s} {c.description}  [{c.anchor}]")
    return "\n".join(lines) + "\n"
