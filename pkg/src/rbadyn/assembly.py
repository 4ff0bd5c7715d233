"""Linear programs for a fixed growth rate.

Variables are ordered ``(Y, nu)`` for the prokaryotic and turnover problems
and ``(Y, nu, f)`` for the compartmentalized one.  Row order is stable:

* equalities   -- metabolite balance (metabolites in declaration order),
  then saturated densities, then fraction normalization;
* inequalities -- process capacity, forward capacity, backward capacity,
  density caps, fraction bounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Mapping, Optional, Tuple

import numpy as np

from .lp import LinearProgram
from .model import (DanglingReferenceError, InvariantViolation, MetabolicModel, ModelParseError,
                    RawModelSpec, read_document)

CYTOSOL = "cytosol"


# ---------------------------------------------------------------------------
# turnover
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TurnoverSpec:
    """Degradation rates (1/h) and proteolysis stoichiometry.

    ``release[i, j]`` counts molecules of metabolite ``i`` returned when one
    unit of machine ``j`` is degraded; ``atp_cost[i, j]`` counts molecules of
    metabolite ``i`` consumed by the same event.  Only fixed metabolites carry
    a concentration, so ``gamma_s`` acts through ``b_fixed`` alone.
    """
    gamma_s: np.ndarray
    gamma_y: np.ndarray
    gamma_pg: np.ndarray
    release: np.ndarray
    atp_cost: np.ndarray

    def __post_init__(self):
        for k in ("gamma_s", "gamma_y", "gamma_pg", "release", "atp_cost"):
            a = np.array(getattr(self, k), dtype=float)
            if (a < 0).any() or np.isnan(a).any():
                raise InvariantViolation(f"{k} >= 0")
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    @classmethod
    def zeros(cls, model: MetabolicModel) -> "TurnoverSpec":
        d = model.dims
        return cls(np.zeros(d.n_s), np.zeros(d.n_y), np.zeros(d.n_g),
                   np.zeros((d.n_s, d.n_y)), np.zeros((d.n_s, d.n_y)))

    def scaled(self, c: float) -> "TurnoverSpec":
        """Same proteolysis stoichiometry, all rates multiplied by ``c``."""
        return TurnoverSpec(c * self.gamma_s, c * self.gamma_y, c * self.gamma_pg, self.release, self.atp_cost)


@dataclass(frozen=True, eq=False)
class TurnoverMatrices:
    gamma_s_y: np.ndarray
    gamma_s_b: np.ndarray
    gamma_s_pg: np.ndarray
    gamma_m_y: np.ndarray
    gamma_m_pg: np.ndarray


def _check_turnover_shapes(model: MetabolicModel, t: TurnoverSpec) -> None:
    d = model.dims
    expected = {"gamma_s": (d.n_s,), "gamma_y": (d.n_y,), "gamma_pg": (d.n_g,),
                "release": (d.n_s, d.n_y), "atp_cost": (d.n_s, d.n_y)}
    for k, shape in expected.items():
        if getattr(t, k).shape != shape:
            raise ValueError(f"turnover {k} has shape {getattr(t, k).shape}, expected {shape}")


def build_turnover_matrices(model: MetabolicModel, t: TurnoverSpec) -> TurnoverMatrices:
    """Linear turnover demands entering the balance and process constraints.

    Degrading machine ``j`` at rate ``g_j`` requires resynthesis (``C_Y^S``
    scaled by ``g_j``), returns residues (``release``) and consumes energy
    (``atp_cost``).  Process demand scales the residue lengths:
    ``gamma_m_y[i, j] = g_j * c_m_y[i, j]``.
    """
    _check_turnover_shapes(model, t)
    fixed_idx = [model.metabolite_names.index(n) for n in model.fixed_names] if model.fixed_names else \
        list(range(model.dims.n_b))
    gamma_b = t.gamma_s[fixed_idx] if fixed_idx else np.zeros(0)
    gy = t.gamma_y[None, :]
    return TurnoverMatrices(
        gamma_s_y=(model.c_s_y + t.release - t.atp_cost) * gy,
        gamma_s_b=model.c_s_b * gamma_b[None, :],
        gamma_s_pg=model.c_s_g * t.gamma_pg[None, :],
        gamma_m_y=model.c_m_y * gy,
        gamma_m_pg=model.c_m_g * t.gamma_pg[None, :],
    )


def turnover_from_dict(doc: Mapping[str, Any], model: MetabolicModel) -> TurnoverSpec:
    """Turnover document: ``metabolites``, ``machines``, ``proteins_g`` map names to
    rates; ``degradation_release`` / ``degradation_atp_cost`` map machine names to
    ``{metabolite: count}``.  A machine name that was split into ``E_1, E_2, ..``
    by duplication applies to every copy.
    """
    d = model.dims
    mets = {n: i for i, n in enumerate(model.metabolite_names)}
    prots = {n: i for i, n in enumerate(model.protein_names)}

    def machine_cols(name: str) -> List[int]:
        cols = [j for j, n in enumerate(model.machine_names) if n == name]
        if not cols:
            cols = [j for j, o in enumerate(model.machine_origins) if o == name]
        if not cols:
            raise DanglingReferenceError(f"turnover references unknown machine {name!r}")
        return cols

    def rates(key):
        v = doc.get(key) or {}
        if not isinstance(v, Mapping):
            raise ModelParseError("expected a mapping", field=key)
        return v

    gamma_s = np.zeros(d.n_s)
    for n, g in rates("metabolites").items():
        if n not in mets:
            raise DanglingReferenceError(f"turnover references unknown metabolite {n!r}")
        gamma_s[mets[n]] = float(g)
    gamma_y = np.zeros(d.n_y)
    for n, g in rates("machines").items():
        gamma_y[machine_cols(n)] = float(g)
    gamma_pg = np.zeros(d.n_g)
    for n, g in rates("proteins_g").items():
        if n not in prots:
            raise DanglingReferenceError(f"turnover references unknown protein {n!r}")
        gamma_pg[prots[n]] = float(g)
    mats = {}
    for key in ("degradation_release", "degradation_atp_cost"):
        mat = np.zeros((d.n_s, d.n_y))
        for n, comp in rates(key).items():
            if not isinstance(comp, Mapping):
                raise ModelParseError("expected {metabolite: count}", field=f"{key}.{n}")
            for met, count in comp.items():
                if met not in mets:
                    raise DanglingReferenceError(f"{key}.{n} references unknown metabolite {met!r}")
                mat[mets[met], machine_cols(n)] = float(count)
        mats[key] = mat
    return TurnoverSpec(gamma_s, gamma_y, gamma_pg, mats["degradation_release"], mats["degradation_atp_cost"])


def load_turnover(path, model: MetabolicModel) -> TurnoverSpec:
    return turnover_from_dict(read_document(path), model)


# ---------------------------------------------------------------------------
# prokaryotic / turnover problems
# ---------------------------------------------------------------------------

def _names(model: MetabolicModel):
    d = model.dims
    mach = model.machine_names or tuple(f"y{j}" for j in range(d.n_y))
    reac = model.reaction_names or tuple(f"r{j}" for j in range(d.n_m))
    mets = model.metabolite_names or tuple(f"s{i}" for i in range(d.n_s))
    procs = model.process_names or tuple(f"p{i}" for i in range(d.n_p))
    comps = model.compartment_names or tuple(f"c{i}" for i in range(d.n_c))
    return mach, reac, mets, procs, comps


def _blocks(model: MetabolicModel, mu: float, tm: Optional[TurnoverMatrices]):
    """Coefficient blocks over (Y, nu) shared by all three problem families."""
    if mu < 0:
        raise ValueError("growth rate must be >= 0")
    d = model.dims
    n_y, n_m = d.n_y, d.n_m

    # I: Omega nu + mu (C_Y Y + C_B B + C_G P_G) [+ Gamma terms] = 0
    eq_y = mu * model.c_s_y
    eq_rhs = -(mu * (model.c_s_b @ model.b_fixed + model.c_s_g @ model.p_g))
    # II: mu (C_Y^M Y + C_G^M P_G) [+ Gamma terms] - K_T M <= 0
    kt = np.zeros((d.n_p, n_y))
    kt[:, n_m:] = np.diag(model.k_t)
    cap_y = mu * model.c_m_y
    cap_rhs = -(mu * (model.c_m_g @ model.p_g))
    if tm is not None:
        eq_y = eq_y + tm.gamma_s_y
        eq_rhs = eq_rhs - (tm.gamma_s_b @ model.b_fixed + tm.gamma_s_pg @ model.p_g)
        cap_y = cap_y + tm.gamma_m_y
        cap_rhs = cap_rhs - tm.gamma_m_pg @ model.p_g
    a_eq = np.hstack([eq_y, model.omega])
    a_cap = np.hstack([cap_y - kt, np.zeros((d.n_p, n_m))])

    # III: nu <= K_E E and -nu <= K_E^0 E
    ke = np.zeros((n_m, n_y))
    ke[:, :n_m] = np.diag(model.k_e)
    ke0 = np.zeros((n_m, n_y))
    ke0[:, :n_m] = np.diag(model.k_e_reverse)
    a_fwd = np.hstack([-ke, np.eye(n_m)])
    a_bwd = np.hstack([-ke0, -np.eye(n_m)])

    # IV: C_Y^D Y <= D - C_G^D P_G
    a_den = np.hstack([model.c_d_y, np.zeros((d.n_c, n_m))])
    den_rhs = model.d_bar - model.c_d_g @ model.p_g
    return (a_eq, eq_rhs, a_cap, cap_rhs, a_fwd, a_bwd, a_den, den_rhs)


def _prokaryotic_lp(model: MetabolicModel, mu: float, tm: Optional[TurnoverMatrices]) -> LinearProgram:
    d = model.dims
    a_eq, eq_rhs, a_cap, cap_rhs, a_fwd, a_bwd, a_den, den_rhs = _blocks(model, mu, tm)
    mach, reac, mets, procs, comps = _names(model)
    a_ineq = np.vstack([a_cap, a_fwd, a_bwd, a_den])
    b_ineq = np.concatenate([cap_rhs, np.zeros(2 * d.n_m), den_rhs])
    lower = np.concatenate([np.zeros(d.n_y), np.full(d.n_m, -np.inf)])
    upper = np.full(d.n_y + d.n_m, np.inf)
    return LinearProgram(
        a_eq, eq_rhs, a_ineq, b_ineq, lower, upper,
        variable_names=[f"Y:{n}" for n in mach] + [f"nu:{n}" for n in reac],
        eq_names=[f"I:{n}" for n in mets],
        ineq_names=([f"II:{n}" for n in procs] + [f"III+:{n}" for n in reac]
                    + [f"III-:{n}" for n in reac] + [f"IV:{n}" for n in comps]),
    )


def assemble_prokaryotic(model: MetabolicModel, mu: float) -> LinearProgram:
    """Steady-state growth problem at growth rate ``mu`` (constraints I-IV)."""
    return _prokaryotic_lp(model, mu, None)


def assemble_turnover(model: MetabolicModel, t: TurnoverSpec, mu: float) -> LinearProgram:
    """As :func:`assemble_prokaryotic` with degradation demands added to I and II."""
    return _prokaryotic_lp(model, mu, build_turnover_matrices(model, t))


# ---------------------------------------------------------------------------
# compartmentalized (eukaryotic) problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EukaryoticExtension:
    """Compartment fractions ``f = (f_V, f_A)`` and the blocks coupling them.

    ``f_V`` has one entry per volume (cytosol first, then ``n_com``
    organelle compartments); ``f_A`` one entry per interface.
    """
    n_com: int
    interfaces: Tuple[Tuple[int, int], ...]
    c_s_f: np.ndarray
    b_hat: np.ndarray
    c_d_iq_y: np.ndarray
    c_d_iq_g: np.ndarray
    c_d_iq_f: np.ndarray
    c_d_eq_y: np.ndarray
    c_d_eq_g: np.ndarray
    c_d_eq_f: np.ndarray
    c_f_f: np.ndarray
    c_bar: np.ndarray
    f_lower: np.ndarray
    f_upper: np.ndarray
    fraction_names: Tuple[str, ...] = ()
    iq_names: Tuple[str, ...] = ()
    eq_names: Tuple[str, ...] = ()

    def __post_init__(self):
        for k in ("c_s_f", "b_hat", "c_d_iq_y", "c_d_iq_g", "c_d_iq_f", "c_d_eq_y", "c_d_eq_g",
                  "c_d_eq_f", "c_f_f", "c_bar", "f_lower", "f_upper"):
            a = np.array(getattr(self, k), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, k, a)
        object.__setattr__(self, "interfaces", tuple(tuple(p) for p in self.interfaces))
        if self.n_com < 2:
            raise InvariantViolation("n_com >= 2")
        for k, (a, b) in enumerate(self.interfaces):
            if a == b or not (0 <= a <= self.n_com and 0 <= b <= self.n_com):
                raise InvariantViolation("interface joins two distinct declared compartments", k)
        n_frac = self.n_frac
        if self.c_f_f.ndim != 2 or self.c_f_f.shape[0] < 1 or self.c_f_f.shape[1] != n_frac:
            raise InvariantViolation("c_f_f has at least one row and n_frac columns")
        if self.c_bar.shape != (self.c_f_f.shape[0],):
            raise InvariantViolation("c_bar matches c_f_f rows")
        nv = self.n_com + 1
        if self.f_lower.shape != (nv,) or self.f_upper.shape != (nv,):
            raise InvariantViolation("fraction bounds have one entry per volume")
        if (self.f_lower > self.f_upper).any():
            raise InvariantViolation("f_lower <= f_upper", int(np.argmax(self.f_lower > self.f_upper)))
        if self.b_hat.shape != (n_frac,) or self.c_s_f.shape[1:] != (n_frac,):
            raise InvariantViolation("c_s_f / b_hat have n_frac columns")
        for y, g, f, tag in ((self.c_d_iq_y, self.c_d_iq_g, self.c_d_iq_f, "iq"),
                             (self.c_d_eq_y, self.c_d_eq_g, self.c_d_eq_f, "eq")):
            if not (y.shape[0] == g.shape[0] == f.shape[0]) or f.shape[1:] != (n_frac,):
                raise InvariantViolation(f"density {tag} blocks have matching rows")

    @property
    def n_frac(self) -> int:
        return self.n_com + 1 + len(self.interfaces)

    @property
    def i_v(self) -> np.ndarray:
        """Selector with ``f_V = I_V f``."""
        nv = self.n_com + 1
        sel = np.zeros((nv, self.n_frac))
        sel[:, :nv] = np.eye(nv)
        return sel


def extension_from_dict(section: Mapping[str, Any], model: MetabolicModel,
                        machine_density: Optional[Mapping[str, Mapping[str, float]]] = None,
                        protein_density: Optional[Mapping[str, Mapping[str, float]]] = None,
                        ) -> EukaryoticExtension:
    """Build the compartment extension from a model's ``eukaryote`` section.

    Density rows sum the ``density_contribution`` of every machine/protein
    located in the row's compartment or interface and compare it with
    ``capacity`` times that entity's fraction.  ``machine_density`` and
    ``protein_density`` map entity names to ``{location: contribution}``.
    """
    comps = section.get("compartments")
    if not isinstance(comps, list):
        raise ModelParseError("expected a list of compartment names", field="eukaryote.compartments")
    comps = [str(c) for c in comps if str(c) != CYTOSOL]
    volumes = [CYTOSOL] + comps
    vi = {c: i for i, c in enumerate(volumes)}
    if len(vi) != len(volumes):
        raise ModelParseError("duplicate compartment", field="eukaryote.compartments")
    pairs: List[Tuple[int, int]] = []
    inames: List[str] = []
    for k, it in enumerate(section.get("interfaces") or []):
        if isinstance(it, Mapping):
            between = it.get("between")
            name = it.get("name")
        else:
            between, name = it, None
        if not isinstance(between, (list, tuple)) or len(between) != 2:
            raise ModelParseError("interface needs two compartments", field=f"eukaryote.interfaces[{k}]")
        for c in between:
            if c not in vi:
                raise DanglingReferenceError(f"interface {k} references undeclared compartment {c!r}")
        pairs.append((vi[between[0]], vi[between[1]]))
        inames.append(str(name) if name else f"{between[0]}<->{between[1]}")
    fractions = volumes + inames
    fi = {n: i for i, n in enumerate(fractions)}
    n_frac = len(fractions)
    mets = {n: i for i, n in enumerate(model.metabolite_names)}

    def frac(name, where):
        if name not in fi:
            raise DanglingReferenceError(f"{where} references unknown compartment/interface {name!r}")
        return fi[name]

    # fixed composition coupled to fractions
    c_s_f = np.zeros((model.dims.n_s, n_frac))
    b_hat = np.zeros(n_frac)
    for k, it in enumerate(section.get("b_hat") or []):
        j = frac(it.get("fraction"), f"eukaryote.b_hat[{k}]")
        b_hat[j] = float(it.get("amount", 1.0))
        for met, cost in (it.get("composition") or {}).items():
            if met not in mets:
                raise DanglingReferenceError(f"eukaryote.b_hat[{k}] references unknown metabolite {met!r}")
            c_s_f[mets[met], j] = -float(cost)

    machine_density = machine_density or {}
    protein_density = protein_density or {}
    machines = {j: machine_density[n] for j, n in enumerate(model.machine_names) if n in machine_density}
    proteins = {j: protein_density[n] for j, n in enumerate(model.protein_names) if n in protein_density}

    def density_rows(key):
        rows = section.get(key) or []
        ny, ng = model.dims.n_y, model.dims.n_g
        cy, cg, cf = np.zeros((len(rows), ny)), np.zeros((len(rows), ng)), np.zeros((len(rows), n_frac))
        names = []
        for k, it in enumerate(rows):
            where = f"eukaryote.{key}[{k}]"
            comp = it.get("compartment")
            j = frac(comp, where)
            cf[k, j] = float(it.get("capacity", 1.0))
            for col, contrib in machines.items():
                cy[k, col] = contrib.get(comp, 0.0)
            for col, contrib in proteins.items():
                cg[k, col] = contrib.get(comp, 0.0)
            names.append(str(comp))
        return cy, cg, cf, names

    iq_y, iq_g, iq_f, iq_names = density_rows("density_iq")
    eq_y, eq_g, eq_f, eq_names = density_rows("density_eq")

    norm = section.get("normalization")
    if not norm:
        c_f_f = np.zeros((1, n_frac))
        c_f_f[0, :len(volumes)] = 1.0
        c_bar = np.ones(1)
    else:
        c_f_f = np.zeros((len(norm), n_frac))
        c_bar = np.zeros(len(norm))
        for k, row in enumerate(norm):
            for name, c in (row.get("coefficients") or {}).items():
                c_f_f[k, frac(name, f"eukaryote.normalization[{k}]")] = float(c)
            c_bar[k] = float(row.get("value", 1.0))

    lo = np.zeros(len(volumes))
    hi = np.ones(len(volumes))
    for name, (a, b) in (section.get("fraction_bounds") or {}).items():
        j = frac(name, "eukaryote.fraction_bounds")
        if j >= len(volumes):
            raise ModelParseError("bounds apply to volume fractions only", field=f"eukaryote.fraction_bounds.{name}")
        lo[j], hi[j] = float(a), float(b)

    return EukaryoticExtension(
        n_com=len(comps), interfaces=tuple(pairs), c_s_f=c_s_f, b_hat=b_hat,
        c_d_iq_y=iq_y, c_d_iq_g=iq_g, c_d_iq_f=iq_f, c_d_eq_y=eq_y, c_d_eq_g=eq_g, c_d_eq_f=eq_f,
        c_f_f=c_f_f, c_bar=c_bar, f_lower=lo, f_upper=hi, fraction_names=tuple(fractions),
        iq_names=tuple(iq_names), eq_names=tuple(eq_names),
    )


def build_extension(spec: RawModelSpec, model: MetabolicModel) -> EukaryoticExtension:
    if spec.eukaryote is None:
        raise ModelParseError("model has no 'eukaryote' section", field="eukaryote")
    return extension_from_dict(
        spec.eukaryote, model,
        machine_density={m.name: m.density_contribution for m in spec.machines},
        protein_density={p.name: p.density_contribution for p in spec.proteins_g},
    )


def assemble_eukaryotic(model: MetabolicModel, ext: EukaryoticExtension, mu: float,
                        turnover: Optional[TurnoverSpec] = None) -> LinearProgram:
    """Compartmentalized problem over ``(Y, nu, f)``.

    The fixed-composition term couples metabolites to fractions through
    ``c_s_f`` with column ``j`` scaled by ``b_hat[j]``.  Model-level
    ``density_limits`` are kept as absolute caps ahead of the
    fraction-coupled density rows.  ``turnover`` composes the same way as in
    :func:`assemble_turnover`; combining the two is an extension of the
    plain compartmentalized problem.
    """
    d = model.dims
    if ext.c_s_f.shape[0] != d.n_s or ext.c_d_iq_y.shape[1:] != (d.n_y,) or ext.c_d_eq_y.shape[1:] != (d.n_y,) \
            or ext.c_d_iq_g.shape[1:] != (d.n_g,) or ext.c_d_eq_g.shape[1:] != (d.n_g,):
        raise ValueError("eukaryotic extension does not match model dimensions")
    tm = build_turnover_matrices(model, turnover) if turnover is not None else None
    a_eq, eq_rhs, a_cap, cap_rhs, a_fwd, a_bwd, a_den, den_rhs = _blocks(model, mu, tm)
    nf = ext.n_frac
    nm = d.n_m
    zf = lambda rows: np.zeros((rows, nf))
    zn = lambda rows: np.zeros((rows, nm))

    a_I = np.hstack([a_eq, mu * ext.c_s_f * ext.b_hat[None, :]])
    a_V = np.hstack([ext.c_d_eq_y, zn(ext.c_d_eq_y.shape[0]), -ext.c_d_eq_f])
    b_V = -(ext.c_d_eq_g @ model.p_g)
    a_VI = np.hstack([np.zeros((ext.c_f_f.shape[0], d.n_y + nm)), ext.c_f_f])
    a_eq_all = np.vstack([a_I, a_V, a_VI])
    b_eq_all = np.concatenate([eq_rhs, b_V, ext.c_bar])

    a_IV = np.hstack([ext.c_d_iq_y, zn(ext.c_d_iq_y.shape[0]), -ext.c_d_iq_f])
    b_IV = -(ext.c_d_iq_g @ model.p_g)
    iv = ext.i_v
    nv = iv.shape[0]
    a_VII = np.vstack([np.hstack([np.zeros((nv, d.n_y + nm)), iv]),
                       np.hstack([np.zeros((nv, d.n_y + nm)), -iv])])
    b_VII = np.concatenate([ext.f_upper, -ext.f_lower])
    a_ineq = np.vstack([np.hstack([a_cap, zf(d.n_p)]), np.hstack([a_fwd, zf(nm)]),
                        np.hstack([a_bwd, zf(nm)]), np.hstack([a_den, zf(d.n_c)]), a_IV, a_VII])
    b_ineq = np.concatenate([cap_rhs, np.zeros(2 * nm), den_rhs, b_IV, b_VII])

    lower = np.concatenate([np.zeros(d.n_y), np.full(nm, -np.inf), np.zeros(nf)])
    upper = np.full(d.n_y + nm + nf, np.inf)
    mach, reac, mets, procs, comps = _names(model)
    fnames = ext.fraction_names or tuple(f"f{j}" for j in range(nf))
    vnames = fnames[:nv]
    return LinearProgram(
        a_eq_all, b_eq_all, a_ineq, b_ineq, lower, upper,
        variable_names=[f"Y:{n}" for n in mach] + [f"nu:{n}" for n in reac] + [f"f:{n}" for n in fnames],
        eq_names=([f"I:{n}" for n in mets] + [f"V:{n}" for n in (ext.eq_names or range(a_V.shape[0]))]
                  + [f"VI:{k}" for k in range(ext.c_f_f.shape[0])]),
        ineq_names=([f"II:{n}" for n in procs] + [f"III+:{n}" for n in reac] + [f"III-:{n}" for n in reac]
                    + [f"IV:{n}" for n in comps] + [f"IV:{n}" for n in (ext.iq_names or range(a_IV.shape[0]))]
                    + [f"VII+:{n}" for n in vnames] + [f"VII-:{n}" for n in vnames]),
    )
