"""Expression assertions: named scalar quantities compared with expected
expressions at sampled points.

Target syntax is ``quantity(args)[component]``:

* tangent arguments are domain coordinate names (ambient names when the
  scenario has no immersion);
* normal arguments are ``d_<coord>`` (the ambient coordinate field, which must
  be normal along the immersion) or ``N`` / ``N<k>`` (the k-th unit normal);
* the component is a coordinate name: ambient names for ambient- and
  normal-valued quantities, domain names for tangent-valued ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .expr import array_value
from .structure import derive_f_star_at

_TARGET = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^()]*)\))?\s*(?:\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\])?\s*$")


class TargetError(ValueError):
    """Malformed assertion target."""


@dataclass(frozen=True)
class Quantity:
    level: str  # ambient | submanifold | hypersurface
    args: str  # sequence of T (tangent) / V (normal)
    value: str  # scalar | ambient | tangent | normal


QUANTITIES: dict[str, Quantity] = {
    "metric": Quantity("ambient", "TT", "scalar"),
    "F": Quantity("ambient", "T", "ambient"),
    "F_star": Quantity("ambient", "T", "ambient"),
    "nabla": Quantity("ambient", "TT", "ambient"),
    "nabla_star": Quantity("ambient", "TT", "ambient"),
    "induced_metric": Quantity("submanifold", "TT", "scalar"),
    "induced_nabla": Quantity("submanifold", "TT", "tangent"),
    "induced_nabla_star": Quantity("submanifold", "TT", "tangent"),
    "sigma": Quantity("submanifold", "TT", "normal"),
    "sigma_star": Quantity("submanifold", "TT", "normal"),
    "A": Quantity("submanifold", "VT", "tangent"),
    "A_star": Quantity("submanifold", "VT", "tangent"),
    "D": Quantity("submanifold", "TV", "normal"),
    "D_star": Quantity("submanifold", "TV", "normal"),
    "f": Quantity("submanifold", "T", "tangent"),
    "f_star": Quantity("submanifold", "T", "tangent"),
    "h": Quantity("submanifold", "T", "normal"),
    "h_star": Quantity("submanifold", "T", "normal"),
    "t": Quantity("submanifold", "V", "tangent"),
    "t_star": Quantity("submanifold", "V", "tangent"),
    "s": Quantity("submanifold", "V", "normal"),
    "s_star": Quantity("submanifold", "V", "normal"),
    "mu": Quantity("hypersurface", "", "scalar"),
    "xi": Quantity("hypersurface", "", "tangent"),
    "xi_star": Quantity("hypersurface", "", "tangent"),
    "eta": Quantity("hypersurface", "T", "scalar"),
    "eta_star": Quantity("hypersurface", "T", "scalar"),
    "phi": Quantity("hypersurface", "T", "tangent"),
    "phi_star": Quantity("hypersurface", "T", "tangent"),
    "kappa": Quantity("hypersurface", "T", "scalar"),
    "kappa_star": Quantity("hypersurface", "T", "scalar"),
    "A_N": Quantity("hypersurface", "T", "tangent"),
    "A_N_star": Quantity("hypersurface", "T", "tangent"),
    "nabla_xi": Quantity("hypersurface", "T", "tangent"),
    "nabla_star_xi_star": Quantity("hypersurface", "T", "tangent"),
    "nabla_phi": Quantity("hypersurface", "TT", "tangent"),
    "nabla_star_phi_star": Quantity("hypersurface", "TT", "tangent"),
}

_DERIVATIVE_QUANTITIES = {"nabla_xi", "nabla_star_xi_star", "nabla_phi", "nabla_star_phi_star"}


@dataclass(frozen=True)
class Target:
    quantity: str
    args: tuple  # ("T", index) or ("coord", index) or ("N", index)
    component: int | None
    source: str


def parse_target(src: str, ambient_coords, domain_coords=None) -> Target:
    """Resolve a target string against the scenario's coordinate names."""
    m = _TARGET.match(src)
    if not m:
        raise TargetError(f"malformed assertion target {src!r}")
    qname, argstr, comp = m.group(1), m.group(2), m.group(3)
    if qname not in QUANTITIES:
        raise TargetError(f"unknown quantity {qname!r} in target {src!r}")
    q = QUANTITIES[qname]
    if q.level != "ambient" and domain_coords is None:
        raise TargetError(f"quantity {qname!r} needs an immersion")
    tangent_names = list(domain_coords if (domain_coords is not None and q.level != "ambient") else ambient_coords)
    args = [a.strip() for a in argstr.split(",")] if argstr and argstr.strip() else []
    if len(args) != len(q.args):
        raise TargetError(f"{qname} takes {len(q.args)} argument(s), got {len(args)} in {src!r}")
    resolved = []
    for kind, a in zip(q.args, args):
        if kind == "T":
            if a not in tangent_names:
                raise TargetError(f"unknown tangent argument {a!r} in {src!r}")
            resolved.append(("T", tangent_names.index(a)))
        else:
            if a.startswith("d_") and a[2:] in ambient_coords:
                resolved.append(("coord", list(ambient_coords).index(a[2:])))
            elif re.fullmatch(r"N[0-9]*", a):
                k = int(a[1:]) - 1 if len(a) > 1 else 0
                resolved.append(("N", k))
            else:
                raise TargetError(f"unknown normal argument {a!r} in {src!r}")
    comp_idx = None
    if q.value == "scalar":
        if comp is not None:
            raise TargetError(f"{qname} is scalar-valued; no component allowed in {src!r}")
    else:
        if comp is None:
            raise TargetError(f"{qname} is vector-valued; a component is required in {src!r}")
        names = list(domain_coords) if q.value == "tangent" else list(ambient_coords)
        if comp not in names:
            raise TargetError(f"unknown component {comp!r} in {src!r}")
        comp_idx = names.index(comp)
    return Target(qname, tuple(resolved), comp_idx, src)


class TargetEvaluator:
    """Evaluates targets at a fixed batch of points, caching shared data."""

    def __init__(self, ambient, structure=None, sub=None, points=None):
        self.ambient = ambient
        self.structure = structure
        self.sub = sub
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self._cache = {}

    # cached pieces
    def _frames_vals(self):
        if "pw" not in self._cache:
            fams = ("primal", "dual")
            self._cache["pw"] = self.sub.pointwise(self.points, fams)
        return self._cache["pw"]

    def _hyper(self, derivatives: bool):
        from .hypersurface import hyper_data

        key = "hd_d" if derivatives else "hd"
        if key not in self._cache:
            if derivatives or "hd_d" not in self._cache:
                self._cache[key] = hyper_data(self.sub, self.points, derivatives=derivatives)
            else:
                return self._cache["hd_d"]
        return self._cache[key]

    def _ambient_points(self):
        if self.sub is None:
            return self.points
        return self._frames_vals()[0].x

    def _normal_vec(self, fr, arg):
        """Ambient components ``[B,n]`` of a normal argument, validated to be normal."""
        kind, k = arg
        if kind == "N":
            if k >= fr.nu.shape[2]:
                raise TargetError(f"normal index {k + 1} out of range")
            return fr.nu[:, :, k]
        v = np.zeros(fr.x.shape)
        v[:, k] = 1.0
        tan = fr.tan(v)
        if np.max(np.abs(tan)) > 1e-9:
            raise TargetError(f"coordinate field d_{k + 1} is not normal to the immersion")
        return v

    def value(self, t: Target) -> np.ndarray:
        q = QUANTITIES[t.quantity]
        name = t.quantity
        if q.level == "ambient":
            return self._ambient_value(t)
        if q.level == "hypersurface":
            return self._hyper_value(t)
        fr, vals = self._frames_vals()
        fam = "dual" if name.endswith("_star") else "primal"
        base = name[: -len("_star")] if name.endswith("_star") else name
        ai = [i for kind, i in t.args if kind == "T"]
        if base == "induced_metric":
            return fr.Gind[:, ai[0], ai[1]]
        if base == "induced_nabla":
            return vals[f"{fam}.gam"][:, t.component, ai[0], ai[1]]
        if base == "sigma":
            vec = np.einsum("bkl,bl->bk", fr.nu, vals[f"{fam}.sigma"][:, :, ai[0], ai[1]])
            return vec[:, t.component]
        if base in ("A", "D"):
            varg = next(a for a in t.args if a[0] != "T")
            a = ai[0]
            if varg[0] == "N":
                k = varg[1]
                if base == "A":
                    return vals[f"{fam}.A"][:, k, t.component, a]
                vec = np.einsum("bkl,bl->bk", fr.nu, vals[f"{fam}.D"][:, a, :, k])
                return vec[:, t.component]
            V = self._normal_vec(fr, varg)
            gam, _ = self.ambient.family(fam).jet(fr.x, fr.mj)
            # nabla~_{e_a} V for a constant coordinate field V
            W = np.einsum("bkij,bi,bj->bk", gam, fr.J[:, :, a], V)
            if base == "A":
                return -fr.tan(W)[:, t.component]
            return np.einsum("bkl,bl->bk", fr.nu, fr.nor(W))[:, t.component]
        # structure blocks
        F = self._structure_at(fr.x, fr.G, fam)
        if base in ("f", "h"):
            W = F @ fr.J[:, :, ai[0]][:, :, None]
            W = W[:, :, 0]
        else:
            V = self._normal_vec(fr, t.args[0])
            W = np.einsum("bij,bj->bi", F, V)
        if base in ("f", "t"):
            return fr.tan(W)[:, t.component]
        return np.einsum("bkl,bl->bk", fr.nu, fr.nor(W))[:, t.component]

    def _structure_at(self, x, g, fam):
        if self.structure is None:
            raise TargetError("scenario has no structure field")
        F, _ = self.structure.jet(x)
        return F if fam == "primal" else derive_f_star_at(g, F)

    def _ambient_value(self, t: Target) -> np.ndarray:
        x = self._ambient_points()
        mj = self.ambient.metric_jets(x)
        ai = [i for _, i in t.args]
        name = t.quantity
        if name == "metric":
            return mj.g[:, ai[0], ai[1]]
        if name in ("F", "F_star"):
            F = self._structure_at(x, mj.g, "primal" if name == "F" else "dual")
            return F[:, t.component, ai[0]]
        fam = "primal" if name == "nabla" else "dual"
        gam, _ = self.ambient.family(fam).jet(x, mj)
        return gam[:, t.component, ai[0], ai[1]]

    def _hyper_value(self, t: Target) -> np.ndarray:
        from .hypersurface import _nabla_xi
        from .submanifold import structure_derivative_terms

        name = t.quantity
        hd = self._hyper(derivatives=name in _DERIVATIVE_QUANTITIES)
        ai = [i for _, i in t.args]
        if name in ("mu",):
            return hd.mu
        if name in ("xi", "xi_star"):
            return getattr(hd, name)[:, t.component]
        if name in ("eta", "eta_star", "kappa", "kappa_star"):
            return getattr(hd, name)[:, ai[0]]
        if name in ("phi", "phi_star", "A_N", "A_N_star"):
            return getattr(hd, name)[:, t.component, ai[0]]
        if name == "nabla_xi":
            return _nabla_xi(hd, "primal")[:, ai[0], t.component]
        if name == "nabla_star_xi_star":
            return _nabla_xi(hd, "dual")[:, ai[0], t.component]
        fam = "primal" if name == "nabla_phi" else "dual"
        nf = structure_derivative_terms(hd.data, fam)["_nf"]  # [B,a,c,b]
        return nf[:, ai[0], t.component, ai[1]]


def evaluate_expected(tree, points) -> np.ndarray:
    return np.broadcast_to(np.asarray(array_value((tree,), points), dtype=float)[:, 0], (len(points),))
