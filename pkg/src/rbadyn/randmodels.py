"""Seeded random small models for property tests and oracle comparisons.

Generation parameters (all draws from ``numpy.random.default_rng(seed)``):

* 2-5 metabolites; metabolite 0 is taken up by a transporter, every other
  metabolite ``i`` is made by a reaction consuming one unit of an earlier
  metabolite; 0-2 extra reactions with random stoichiometry in [-2, 2].
* one enzyme per reaction; with probability 0.3 one reaction gets an
  isoenzyme and with probability 0.3 one enzyme also catalyzes a second
  reaction (exercising the duplication conventions).
* 1-2 processes; process 0 demands every machine and protein
  (residues 10-60, process machines 40-80), efficiency 5-15 per hour.
* 1-2 unspecific proteins (0.05-0.3) and 0-1 fixed metabolite (0.05-0.5), so
  the basal composition is never empty.
* 1-2 density compartments; caps are 2-5 times the basal density unless
  ``admissible=False``, in which case one cap is set below it.

Random turnover (:func:`random_turnover`): machine and protein rates in
[0, 0.02] per hour (a fraction of the process rate bound), fixed-metabolite
rates in [0, 0.01]; each degraded machine
returns at most its own synthesis cost of each metabolite, so the net
turnover term is a demand and scaling the rates up never helps growth.  A
released metabolite with no consuming reaction can still make the turnover
problem infeasible at mu = 0 (seed 119 of the first 200).
"""
from __future__ import annotations

from typing import Any, Dict

import numpy as np

from .assembly import TurnoverSpec
from .model import MetabolicModel, RawModelSpec, build_model, spec_from_dict


def random_model_document(seed: int, admissible: bool = True, max_metabolites: int = 5) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    r = lambda a, b: float(np.round(rng.uniform(a, b), 3))
    n_s = int(rng.integers(2, max_metabolites + 1))
    n_b = int(rng.integers(0, 2))
    n_p = int(rng.integers(1, 3))
    n_g = int(rng.integers(1, 3))
    n_c = int(rng.integers(1, 3))
    mets = [f"m{i}" for i in range(n_s)]
    comps = [f"c{i}" for i in range(n_c)]

    metabolites = []
    for i, m in enumerate(mets):
        entry: Dict[str, Any] = {"name": m}
        if i >= n_s - n_b:
            entry["fixed_concentration"] = r(0.05, 0.5)
        metabolites.append(entry)

    reactions = [{"name": "uptake", "stoichiometry": {mets[0]: 1.0}, "catalysts": ["e_uptake"],
                  "k_forward": r(50, 300), "k_backward": 0.0}]
    for i in range(1, n_s):
        parent = mets[int(rng.integers(0, i))]
        reactions.append({"name": f"make_{mets[i]}", "stoichiometry": {parent: -1.0, mets[i]: r(0.5, 2.0)},
                          "catalysts": [f"e_{mets[i]}"], "k_forward": r(50, 300)})
        if rng.random() < 0.5:
            reactions[-1]["k_backward"] = 0.0
    for k in range(int(rng.integers(0, 3))):
        stoich = {}
        for m in rng.choice(mets, size=min(2, n_s), replace=False):
            c = float(rng.integers(-2, 3))
            if c:
                stoich[str(m)] = c
        reactions.append({"name": f"extra{k}", "stoichiometry": stoich or {mets[0]: -1.0},
                          "catalysts": [f"e_extra{k}"], "k_forward": r(50, 300), "k_backward": 0.0})
    enzymes = [rx["catalysts"][0] for rx in reactions]
    if rng.random() < 0.3 and len(reactions) > 1:
        rx = reactions[int(rng.integers(1, len(reactions)))]
        rx["catalysts"].append("e_iso")
        rx["k_forward"] = {rx["catalysts"][0]: rx["k_forward"], "e_iso": r(50, 300)}
        if "k_backward" in rx:
            rx["k_backward"] = {c: 0.0 for c in rx["catalysts"]}
        enzymes.append("e_iso")
    if rng.random() < 0.3 and len(reactions) > 2:
        a, b = rng.choice(np.arange(1, len(reactions)), size=2, replace=False)
        ra, rb = reactions[int(a)], reactions[int(b)]
        if len(rb["catalysts"]) == 1:
            # the enzyme of ``ra`` also serves ``rb`` as an alternative catalyst
            shared = ra["catalysts"][0]
            rb["catalysts"].append(shared)
            kf = rb["k_forward"]
            rb["k_forward"] = {rb["catalysts"][0]: kf, shared: r(50, 300)}
            if "k_backward" in rb:
                rb["k_backward"] = {c: 0.0 for c in rb["catalysts"]}

    processes = [{"name": f"p{i}", "efficiency": r(5, 15), "machine": f"pm{i}"} for i in range(n_p)]

    def entity(name, kind=None, heavy=False):
        length = r(40, 80) if heavy else r(10, 60)
        demand = {"p0": length}
        if n_p > 1 and rng.random() < 0.5:
            demand["p1"] = r(5, 20)
        cost = {}
        for m in rng.choice(mets, size=int(rng.integers(1, n_s + 1)), replace=False):
            cost[str(m)] = r(0.2, 1.0) * length
        comp = comps[int(rng.integers(0, n_c))]
        e = {"name": name, "synthesis_cost": cost, "process_demand": demand,
             "compartment": comp, "density_contribution": length}
        if kind:
            e["kind"] = kind
        return e

    machines = [entity(e, "enzyme") for e in enzymes]
    machines += [entity(f"pm{i}", "process-machine", heavy=True) for i in range(n_p)]
    proteins = []
    for i in range(n_g):
        p = entity(f"g{i}")
        p["concentration"] = r(0.05, 0.3)
        proteins.append(p)

    basal = {c: 0.0 for c in comps}
    for p in proteins:
        basal[p["compartment"]] += p["density_contribution"] * p["concentration"]
    limits = {c: float(np.round(max(basal[c], 1.0) * rng.uniform(2.0, 5.0), 3)) for c in comps}
    if not admissible:
        c = max(basal, key=basal.get)
        limits[c] = float(np.round(0.5 * basal[c], 6))

    return {"metabolites": metabolites, "reactions": reactions, "processes": processes,
            "machines": machines, "proteins_g": proteins, "density_limits": limits}


def random_spec(seed: int, admissible: bool = True, max_metabolites: int = 5) -> RawModelSpec:
    return spec_from_dict(random_model_document(seed, admissible, max_metabolites))


def random_model(seed: int, admissible: bool = True, max_metabolites: int = 5) -> MetabolicModel:
    return build_model(random_spec(seed, admissible, max_metabolites))


def process_rate_bound(model: MetabolicModel) -> float:
    """Upper bound on any feasible growth rate from the process constraints.

    Process ``i`` must at least rebuild its own machine:
    ``mu * c_m_y[i, M_i] * M_i <= k_t[i] * M_i``.  If ``M_i`` were zero, every
    machine and protein it processes would have to vanish too, which a
    nonempty basal composition forbids.
    """
    n_m = model.dims.n_m
    bounds = [model.k_t[i] / model.c_m_y[i, n_m + i] for i in range(model.dims.n_p)
              if model.c_m_y[i, n_m + i] > 0 and (model.c_m_g[i] > 0).any()]
    return float(min(bounds)) if bounds else np.inf


def random_turnover(model: MetabolicModel, seed: int) -> TurnoverSpec:
    rng = np.random.default_rng(seed)
    d = model.dims
    gamma_s = np.zeros(d.n_s)
    fixed = [model.metabolite_names.index(n) for n in model.fixed_names]
    gamma_s[fixed] = rng.uniform(0.0, 0.01, len(fixed))
    cost = -model.c_s_y
    release = cost * rng.uniform(0.0, 1.0, cost.shape)
    atp_cost = np.where(rng.random(cost.shape) < 0.3, rng.uniform(0.0, 5.0, cost.shape), 0.0)
    return TurnoverSpec(gamma_s, rng.uniform(0.0, 0.02, d.n_y), rng.uniform(0.0, 0.02, d.n_g), release, atp_cost)
