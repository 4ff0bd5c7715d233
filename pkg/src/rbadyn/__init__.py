"""Resource-allocation growth models: feasibility LPs, maximal growth rates,
and an optimal-control toy model of enzyme/machinery allocation."""
from __future__ import annotations

from pathlib import Path

from .lp import LinearProgram, SolveResult, check_point, solve
from .model import MetabolicModel, RawModelSpec, build_model, load_model, load_model_file
from .assembly import (EukaryoticExtension, TurnoverSpec, assemble_eukaryotic, assemble_prokaryotic,
                       assemble_turnover, build_extension, build_turnover_matrices, load_turnover)
from .growth import GrowthSearchResult, feasibility_profile, mu_max
from .dynamics import (ControlSignal, ToyParams, ToyProblem, ToyState, Trajectory, cost, growth_rate,
                       integrate, load_toy_problem)
from .pmp import AdjointState, SweepResult, backward_integrate, envelope_check, hamiltonian, sweep, switching

__version__ = "0.1.0"

DATA_DIR = Path(__file__).resolve().parent / "data"


def data_file(name: str) -> Path:
    """Path of a shipped data file, by file name or bare stem (``toy_prokaryote``)."""
    p = DATA_DIR / name
    if p.is_file():
        return p
    for suffix in (".toml", ".yaml", ".json"):
        q = DATA_DIR / f"{name}{suffix}"
        if q.is_file():
            return q
    raise FileNotFoundError(f"no shipped data file named {name!r} in {DATA_DIR}")


def resolve_path(name_or_path) -> Path:
    """An existing path as given, otherwise a shipped data file of that name."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    if p.parent == Path(".") or str(p.parent) == "":
        try:
            return data_file(str(p))
        except FileNotFoundError:
            pass
    raise FileNotFoundError(f"no such file: {name_or_path}")
