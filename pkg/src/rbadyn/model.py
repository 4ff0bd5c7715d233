"""Model documents: loading, isoenzyme/multifunctional-enzyme expansion, compilation.

A model document is a TOML, YAML or JSON mapping with the top-level keys
``metabolites``, ``reactions``, ``processes``, ``machines``, ``proteins_g``,
``density_limits`` and optionally ``eukaryote``.  See README for the schema.

Sign convention: ``synthesis_cost`` maps count consumed molecules as
positive numbers.  Compiled matrices follow the balance convention
``Omega nu + mu * C Y = 0``, i.e. ``C = -synthesis_cost``.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
import yaml

ENZYME = "enzyme"
PROCESS_MACHINE = "process-machine"

PathLike = Union[str, Path]


class ModelError(ValueError):
    """Base class for model document problems."""


class ModelParseError(ModelError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class DuplicateNameError(ModelError):
    pass


class DanglingReferenceError(ModelError):
    pass


class InvariantViolation(ModelError):
    def __init__(self, invariant: str, index=None, detail: str = ""):
        self.invariant = invariant
        self.index = index
        msg = f"invariant violated: {invariant}"
        if index is not None:
            msg += f" at index {index}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# name-keyed specification
# ---------------------------------------------------------------------------

@dataclass
class Metabolite:
    name: str
    fixed_concentration: Optional[float] = None
    synthesis_cost: Dict[str, float] = field(default_factory=dict)


@dataclass
class Reaction:
    name: str
    stoichiometry: Dict[str, float]
    catalysts: List[str]
    k_forward: List[float]                   # aligned with catalysts
    k_backward: Optional[List[float]] = None
    origin: Optional[str] = None


@dataclass
class Process:
    name: str
    efficiency: float
    machine: Optional[str] = None


@dataclass
class Machine:
    name: str
    kind: str
    synthesis_cost: Dict[str, float] = field(default_factory=dict)
    process_demand: Dict[str, float] = field(default_factory=dict)
    compartment: Optional[str] = None
    density_contribution: Dict[str, float] = field(default_factory=dict)
    process: Optional[str] = None
    origin: Optional[str] = None


@dataclass
class ProteinG:
    name: str
    concentration: float
    synthesis_cost: Dict[str, float] = field(default_factory=dict)
    process_demand: Dict[str, float] = field(default_factory=dict)
    compartment: Optional[str] = None
    density_contribution: Dict[str, float] = field(default_factory=dict)


@dataclass
class RawModelSpec:
    metabolites: List[Metabolite]
    reactions: List[Reaction]
    processes: List[Process]
    machines: List[Machine]
    proteins_g: List[ProteinG] = field(default_factory=list)
    density_limits: Dict[str, float] = field(default_factory=dict)
    eukaryote: Optional[Dict[str, Any]] = None

    def machine(self, name: str) -> Machine:
        for m in self.machines:
            if m.name == name:
                return m
        raise KeyError(name)

    @property
    def is_one_to_one(self) -> bool:
        uses: Dict[str, int] = {}
        for r in self.reactions:
            if len(r.catalysts) != 1:
                return False
            uses[r.catalysts[0]] = uses.get(r.catalysts[0], 0) + 1
        return all(v == 1 for v in uses.values())


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_document(text: str, fmt: str = "toml") -> Dict[str, Any]:
    """Parse ``text`` as toml / yaml / json, reporting the line of a syntax error."""
    fmt = fmt.lower().lstrip(".")
    try:
        if fmt == "toml":
            doc = tomllib.loads(text)
        elif fmt in ("yaml", "yml"):
            doc = yaml.safe_load(text)
        elif fmt == "json":
            doc = json.loads(text)
        else:
            raise ModelParseError(f"unknown document format {fmt!r}")
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc)
        line = None
        if "line " in msg:
            try:
                line = int(msg.split("line ")[1].split(",")[0].split(")")[0])
            except ValueError:
                pass
        raise ModelParseError(f"TOML syntax error: {msg}", line=line) from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ModelParseError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                              line=mark.line + 1 if mark is not None else None) from exc
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"JSON syntax error: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ModelParseError("document root must be a mapping")
    return doc


def read_document(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    fmt = path.suffix.lstrip(".") or "toml"
    return parse_document(path.read_text(), fmt)


def _number(value, where: str, allow_none=False) -> Optional[float]:
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelParseError(f"expected a number, got {value!r}", field=where)
    return float(value)


def _number_map(value, where: str) -> Dict[str, float]:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ModelParseError(f"expected a mapping, got {type(value).__name__}", field=where)
    return {str(k): _number(v, f"{where}.{k}") for k, v in value.items()}


def _entries(doc: Mapping, key: str, required: bool = True) -> List[Mapping]:
    if key not in doc:
        if required:
            raise ModelParseError(f"missing top-level key {key!r}", field=key)
        return []
    items = doc[key]
    if items is None:
        return []
    if not isinstance(items, list):
        raise ModelParseError("expected a list", field=key)
    for i, it in enumerate(items):
        if not isinstance(it, Mapping):
            raise ModelParseError("expected a mapping", field=f"{key}[{i}]")
        if "name" not in it:
            raise ModelParseError("missing 'name'", field=f"{key}[{i}]")
    return items


def _density(entry: Mapping, where: str) -> Tuple[Optional[str], Dict[str, float]]:
    comp = entry.get("compartment")
    dc = entry.get("density_contribution")
    if comp is not None and not isinstance(comp, str):
        raise ModelParseError("compartment must be a string", field=f"{where}.compartment")
    if dc is None:
        return comp, {}
    if isinstance(dc, Mapping):
        return comp, _number_map(dc, f"{where}.density_contribution")
    value = _number(dc, f"{where}.density_contribution")
    if comp is None:
        if value != 0.0:
            raise ModelParseError("density_contribution without compartment", field=where)
        return None, {}
    return comp, {comp: value}


def _per_catalyst(value, catalysts: Sequence[str], where: str) -> List[float]:
    if isinstance(value, Mapping):
        out = []
        for c in catalysts:
            if c not in value:
                raise ModelParseError(f"no efficiency for catalyst {c!r}", field=where)
            out.append(_number(value[c], f"{where}.{c}"))
        extra = set(value) - set(catalysts)
        if extra:
            raise DanglingReferenceError(f"{where}: efficiency given for non-catalyst {sorted(extra)}")
        return out
    return [_number(value, where)] * len(catalysts)


def spec_from_dict(doc: Mapping[str, Any]) -> RawModelSpec:
    """Build a :class:`RawModelSpec` from a parsed document; checks names only."""
    metabolites = []
    for i, e in enumerate(_entries(doc, "metabolites")):
        metabolites.append(Metabolite(
            str(e["name"]),
            _number(e.get("fixed_concentration"), f"metabolites[{i}].fixed_concentration", allow_none=True),
            _number_map(e.get("synthesis_cost"), f"metabolites[{i}].synthesis_cost"),
        ))
    reactions = []
    for i, e in enumerate(_entries(doc, "reactions")):
        where = f"reactions[{i}]"
        cats = e.get("catalysts")
        if not isinstance(cats, list) or not cats:
            raise ModelParseError("every reaction needs a non-empty 'catalysts' list", field=f"{where}.catalysts")
        cats = [str(c) for c in cats]
        if len(set(cats)) != len(cats):
            raise DuplicateNameError(f"{where}: repeated catalyst")
        if "k_forward" not in e:
            raise ModelParseError("missing 'k_forward'", field=where)
        kf = _per_catalyst(e["k_forward"], cats, f"{where}.k_forward")
        kb = _per_catalyst(e["k_backward"], cats, f"{where}.k_backward") if e.get("k_backward") is not None else None
        reactions.append(Reaction(str(e["name"]), _number_map(e.get("stoichiometry"), f"{where}.stoichiometry"),
                                  cats, kf, kb))
    processes = []
    for i, e in enumerate(_entries(doc, "processes")):
        if "efficiency" not in e:
            raise ModelParseError("missing 'efficiency'", field=f"processes[{i}]")
        processes.append(Process(str(e["name"]), _number(e["efficiency"], f"processes[{i}].efficiency"),
                                 e.get("machine")))
    machines = []
    for i, e in enumerate(_entries(doc, "machines")):
        where = f"machines[{i}]"
        kind = e.get("kind")
        if kind not in (ENZYME, PROCESS_MACHINE):
            raise ModelParseError(f"kind must be {ENZYME!r} or {PROCESS_MACHINE!r}, got {kind!r}", field=f"{where}.kind")
        comp, dens = _density(e, where)
        machines.append(Machine(str(e["name"]), kind,
                                _number_map(e.get("synthesis_cost"), f"{where}.synthesis_cost"),
                                _number_map(e.get("process_demand"), f"{where}.process_demand"),
                                comp, dens,
                                process=str(e["process"]) if e.get("process") is not None else None))
    proteins = []
    for i, e in enumerate(_entries(doc, "proteins_g", required=False)):
        where = f"proteins_g[{i}]"
        comp, dens = _density(e, where)
        proteins.append(ProteinG(str(e["name"]), _number(e.get("concentration", 0.0), f"{where}.concentration"),
                                 _number_map(e.get("synthesis_cost"), f"{where}.synthesis_cost"),
                                 _number_map(e.get("process_demand"), f"{where}.process_demand"),
                                 comp, dens))
    limits = _number_map(doc.get("density_limits"), "density_limits")
    euk = doc.get("eukaryote")
    if euk is not None and not isinstance(euk, Mapping):
        raise ModelParseError("expected a mapping", field="eukaryote")
    spec = RawModelSpec(metabolites, reactions, processes, machines, proteins, limits,
                        copy.deepcopy(dict(euk)) if euk is not None else None)
    _check_references(spec)
    return spec


def _unique(names: Sequence[str], what: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateNameError(f"duplicate {what} name {n!r}")
        seen.add(n)


def _check_references(spec: RawModelSpec) -> None:
    mets = [m.name for m in spec.metabolites]
    _unique(mets, "metabolite")
    _unique([r.name for r in spec.reactions], "reaction")
    _unique([p.name for p in spec.processes], "process")
    _unique([m.name for m in spec.machines] + [p.name for p in spec.proteins_g], "machine/protein")
    metset, procset = set(mets), {p.name for p in spec.processes}
    kinds = {m.name: m.kind for m in spec.machines}

    def known(keys, pool, where):
        for k in keys:
            if k not in pool:
                raise DanglingReferenceError(f"{where} references undeclared {k!r}")

    for m in spec.metabolites:
        known(m.synthesis_cost, metset, f"metabolite {m.name!r} synthesis_cost")
    for r in spec.reactions:
        known(r.stoichiometry, metset, f"reaction {r.name!r} stoichiometry")
        for c in r.catalysts:
            if c not in kinds:
                raise DanglingReferenceError(f"reaction {r.name!r} references undeclared enzyme {c!r}")
            if kinds[c] != ENZYME:
                raise DanglingReferenceError(f"reaction {r.name!r} catalyst {c!r} is not an enzyme")
    for ent in list(spec.machines) + list(spec.proteins_g):
        known(ent.synthesis_cost, metset, f"{ent.name!r} synthesis_cost")
        known(ent.process_demand, procset, f"{ent.name!r} process_demand")
    for p in spec.processes:
        if p.machine is not None:
            if kinds.get(p.machine) != PROCESS_MACHINE:
                raise DanglingReferenceError(f"process {p.name!r} references unknown process-machine {p.machine!r}")
    for m in spec.machines:
        if m.process is not None and m.process not in procset:
            raise DanglingReferenceError(f"machine {m.name!r} references undeclared process {m.process!r}")


def load_model(text: str, fmt: str = "toml") -> RawModelSpec:
    """Parse a model document into a name-keyed :class:`RawModelSpec`."""
    return spec_from_dict(parse_document(text, fmt))


def load_model_file(path: PathLike) -> RawModelSpec:
    return spec_from_dict(read_document(path))


# ---------------------------------------------------------------------------
# duplication conventions
# ---------------------------------------------------------------------------

def expand_duplications(spec: RawModelSpec) -> RawModelSpec:
    """Return an equivalent spec in which reactions and enzymes pair one-to-one.

    An enzyme catalyzing k > 1 reactions becomes ``E_1 .. E_k`` (one per
    reaction, in reaction declaration order), each keeping the original
    composition.  A reaction with k > 1 catalysts becomes ``r_1 .. r_k``
    with identical stoichiometry, one per catalyst in list order.
    """
    if spec.is_one_to_one:
        return spec
    spec = copy.deepcopy(spec)

    users: Dict[str, List[int]] = {}
    for i, r in enumerate(spec.reactions):
        for c in r.catalysts:
            users.setdefault(c, []).append(i)

    machines: List[Machine] = []
    for m in spec.machines:
        idx = users.get(m.name, [])
        if m.kind != ENZYME or len(idx) <= 1:
            machines.append(m)
            continue
        for k, ri in enumerate(idx, start=1):
            dup = copy.deepcopy(m)
            dup.name = f"{m.name}_{k}"
            dup.origin = m.origin or m.name
            machines.append(dup)
            r = spec.reactions[ri]
            r.catalysts = [dup.name if c == m.name else c for c in r.catalysts]
    spec.machines = machines

    reactions: List[Reaction] = []
    for r in spec.reactions:
        if len(r.catalysts) == 1:
            reactions.append(r)
            continue
        for k, cat in enumerate(r.catalysts, start=1):
            reactions.append(Reaction(
                name=f"{r.name}_{k}",
                stoichiometry=dict(r.stoichiometry),
                catalysts=[cat],
                k_forward=[r.k_forward[k - 1]],
                k_backward=[r.k_backward[k - 1]] if r.k_backward is not None else None,
                origin=r.origin or r.name,
            ))
    spec.reactions = reactions
    _check_references(spec)
    return spec


# ---------------------------------------------------------------------------
# compiled model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dimensions:
    n_s: int
    n_m: int
    n_p: int
    n_g: int
    n_b: int
    n_c: int

    def __post_init__(self):
        for k in ("n_s", "n_m", "n_p", "n_g", "n_b", "n_c"):
            if getattr(self, k) < 0:
                raise InvariantViolation(f"{k} >= 0")
        if self.n_b > self.n_s:
            raise InvariantViolation("n_b <= n_s")

    @property
    def n_y(self) -> int:
        return self.n_m + self.n_p


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetabolicModel:
    """Dense matrices of the steady-state growth problem.

    Machines are ordered enzymes first (aligned with reactions) then process
    machines (aligned with processes).  Matrices are read-only.
    """
    dims: Dimensions
    omega: np.ndarray
    c_s_y: np.ndarray
    c_s_b: np.ndarray
    c_s_g: np.ndarray
    c_m_y: np.ndarray
    c_m_g: np.ndarray
    k_t: np.ndarray
    k_e: np.ndarray
    c_d_y: np.ndarray
    c_d_g: np.ndarray
    d_bar: np.ndarray
    b_fixed: np.ndarray
    p_g: np.ndarray
    k_e_backward: Optional[np.ndarray] = None
    metabolite_names: Tuple[str, ...] = ()
    reaction_names: Tuple[str, ...] = ()
    machine_names: Tuple[str, ...] = ()
    process_names: Tuple[str, ...] = ()
    protein_names: Tuple[str, ...] = ()
    fixed_names: Tuple[str, ...] = ()
    compartment_names: Tuple[str, ...] = ()
    machine_compartments: Tuple[Optional[str], ...] = ()
    protein_compartments: Tuple[Optional[str], ...] = ()
    machine_origins: Tuple[str, ...] = ()

    def __post_init__(self):
        for k in ("omega", "c_s_y", "c_s_b", "c_s_g", "c_m_y", "c_m_g", "k_t", "k_e",
                  "c_d_y", "c_d_g", "d_bar", "b_fixed", "p_g"):
            object.__setattr__(self, k, _frozen(getattr(self, k)))
        if self.k_e_backward is not None:
            object.__setattr__(self, "k_e_backward", _frozen(self.k_e_backward))
        validate_model(self)

    @property
    def k_e_reverse(self) -> np.ndarray:
        """Backward capacity per enzyme; defaults to the forward efficiency."""
        return self.k_e if self.k_e_backward is None else self.k_e_backward

    def replace(self, **changes) -> "MetabolicModel":
        import dataclasses
        return dataclasses.replace(self, **changes)


def validate_model(model: MetabolicModel) -> None:
    d = model.dims
    shapes = {
        "omega": (d.n_s, d.n_m), "c_s_y": (d.n_s, d.n_y), "c_s_b": (d.n_s, d.n_b),
        "c_s_g": (d.n_s, d.n_g), "c_m_y": (d.n_p, d.n_y), "c_m_g": (d.n_p, d.n_g),
        "k_t": (d.n_p,), "k_e": (d.n_m,), "c_d_y": (d.n_c, d.n_y), "c_d_g": (d.n_c, d.n_g),
        "d_bar": (d.n_c,), "b_fixed": (d.n_b,), "p_g": (d.n_g,),
    }
    for name, shape in shapes.items():
        if getattr(model, name).shape != shape:
            raise InvariantViolation(f"shape of {name} is {shape}", detail=f"got {getattr(model, name).shape}")
    if model.k_e_backward is not None and model.k_e_backward.shape != (d.n_m,):
        raise InvariantViolation(f"shape of k_e_backward is {(d.n_m,)}")
    bad = np.flatnonzero(~(model.k_t > 0))
    if bad.size:
        raise InvariantViolation("k_t > 0", int(bad[0]), _label(model.process_names, bad[0]))
    for name in ("k_e", "k_e_backward"):
        v = getattr(model, name)
        if v is not None and (v < 0).any():
            i = int(np.argmax(v < 0))
            raise InvariantViolation(f"{name} >= 0", i, _label(model.reaction_names, i))
    for name in ("c_m_y", "c_m_g", "c_d_y", "c_d_g", "d_bar", "b_fixed", "p_g"):
        v = getattr(model, name)
        if (v < 0).any():
            idx = np.unravel_index(int(np.argmax(v < 0)), v.shape)
            raise InvariantViolation(f"{name} >= 0", tuple(int(i) for i in idx))
    for name in ("c_d_y", "c_d_g"):
        v = getattr(model, name)
        counts = np.count_nonzero(v, axis=0)
        if (counts > 1).any():
            j = int(np.argmax(counts > 1))
            names = model.machine_names if name == "c_d_y" else model.protein_names
            raise InvariantViolation(f"unique compartment per column of {name}", j, _label(names, j))


def _label(names, i) -> str:
    try:
        return str(names[int(i)])
    except (IndexError, TypeError):
        return ""


def compile_model(spec: RawModelSpec) -> MetabolicModel:
    """Assemble dense matrices in declaration order.

    ``spec`` must already be one-to-one (see :func:`expand_duplications`).
    """
    if not spec.is_one_to_one:
        raise InvariantViolation("one-to-one reaction/catalyst map", detail="apply expand_duplications first")
    mets = [m.name for m in spec.metabolites]
    mi = {n: i for i, n in enumerate(mets)}
    reactions = spec.reactions
    procs = spec.processes
    pi = {p.name: i for i, p in enumerate(procs)}
    by_name = {m.name: m for m in spec.machines}

    enzymes = [by_name[r.catalysts[0]] for r in reactions]
    catalysing = {e.name for e in enzymes}
    for m in spec.machines:
        if m.kind == ENZYME and m.name not in catalysing:
            raise InvariantViolation("every enzyme catalyzes a reaction", detail=m.name)

    pms = [m for m in spec.machines if m.kind == PROCESS_MACHINE]
    if len(pms) != len(procs):
        raise InvariantViolation("one process-machine per process",
                                 detail=f"{len(pms)} process-machines for {len(procs)} processes")
    assigned: Dict[str, Machine] = {}
    for p in procs:
        if p.machine is not None:
            assigned[p.name] = by_name[p.machine]
    for m in pms:
        if m.process is not None:
            if m.process in assigned and assigned[m.process] is not m:
                raise InvariantViolation("one process-machine per process", detail=m.process)
            assigned[m.process] = m
    free = [m for m in pms if m not in assigned.values()]
    for p in procs:
        if p.name not in assigned:
            assigned[p.name] = free.pop(0)
    proc_machines = [assigned[p.name] for p in procs]
    if len({id(m) for m in proc_machines}) != len(proc_machines):
        raise InvariantViolation("one process-machine per process", detail="machine shared between processes")

    machines = enzymes + proc_machines
    proteins = spec.proteins_g
    fixed = [m for m in spec.metabolites if m.fixed_concentration is not None]
    comps = list(spec.density_limits)
    ci = {c: i for i, c in enumerate(comps)}
    n_s, n_m, n_p, n_g, n_b, n_c = len(mets), len(reactions), len(procs), len(proteins), len(fixed), len(comps)
    n_y = n_m + n_p

    omega = np.zeros((n_s, n_m))
    k_e = np.zeros(n_m)
    k_b = np.zeros(n_m)
    any_backward = False
    for j, r in enumerate(reactions):
        for met, coef in r.stoichiometry.items():
            omega[mi[met], j] = coef
        k_e[j] = r.k_forward[0]
        if r.k_backward is not None:
            any_backward = True
            k_b[j] = r.k_backward[0]
        else:
            k_b[j] = r.k_forward[0]

    def composition(entities, ncol):
        cs = np.zeros((n_s, ncol))
        cm = np.zeros((n_p, ncol))
        cd = np.zeros((n_c, ncol))
        for j, ent in enumerate(entities):
            for met, cost in ent.synthesis_cost.items():
                cs[mi[met], j] = -cost
            for proc, res in ent.process_demand.items():
                cm[pi[proc], j] = res
            for comp, val in ent.density_contribution.items():
                if comp in ci:
                    cd[ci[comp], j] = val
        return cs, cm, cd

    c_s_y, c_m_y, c_d_y = composition(machines, n_y)
    c_s_g, c_m_g, c_d_g = composition(proteins, n_g)

    c_s_b = np.zeros((n_s, n_b))
    for j, m in enumerate(fixed):
        cost = m.synthesis_cost or {m.name: 1.0}
        for met, c in cost.items():
            c_s_b[mi[met], j] = -c

    return MetabolicModel(
        dims=Dimensions(n_s, n_m, n_p, n_g, n_b, n_c),
        omega=omega, c_s_y=c_s_y, c_s_b=c_s_b, c_s_g=c_s_g, c_m_y=c_m_y, c_m_g=c_m_g,
        k_t=np.array([p.efficiency for p in procs]), k_e=k_e,
        c_d_y=c_d_y, c_d_g=c_d_g,
        d_bar=np.array([spec.density_limits[c] for c in comps]),
        b_fixed=np.array([m.fixed_concentration for m in fixed]),
        p_g=np.array([p.concentration for p in proteins]),
        k_e_backward=k_b if any_backward else None,
        metabolite_names=tuple(mets),
        reaction_names=tuple(r.name for r in reactions),
        machine_names=tuple(m.name for m in machines),
        process_names=tuple(p.name for p in procs),
        protein_names=tuple(p.name for p in proteins),
        fixed_names=tuple(m.name for m in fixed),
        compartment_names=tuple(comps),
        machine_compartments=tuple(m.compartment for m in machines),
        protein_compartments=tuple(p.compartment for p in proteins),
        machine_origins=tuple(m.origin or m.name for m in machines),
    )


def build_model(spec: RawModelSpec) -> MetabolicModel:
    return compile_model(expand_duplications(spec))
