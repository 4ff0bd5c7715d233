"""Maximal growth rate by doubling + bisection over a family of feasibility LPs.

Feasibility is monotone in the growth rate (a feasible point at ``mu`` can be
rescaled to any smaller rate), so the feasible set is an interval starting
at zero and bisection on its right end is sound.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .lp import LinearProgram, SolveResult, solve

Builder = Callable[[float], LinearProgram]

BASAL_INADMISSIBLE = "basal-composition-inadmissible"
OK = "ok"
DOUBLING_CAP = 60


class NoFiniteBracketError(RuntimeError):
    """Feasibility persisted up to the doubling cap."""


@dataclass
class GrowthSearchResult:
    mu_max: float
    bracket: Tuple[float, float]
    iterations: int
    witness_at_mu_max: Optional[np.ndarray]
    status: str = OK

    @property
    def basal_inadmissible(self) -> bool:
        return self.status == BASAL_INADMISSIBLE


def mu_max(builder: Builder, tol: float = 1e-8, mu_hi_init: float = 1.0,
           solver: Callable[[LinearProgram], SolveResult] = solve) -> GrowthSearchResult:
    """Largest feasible growth rate to within ``tol`` (inner approximation).

    Returns the feasible end of the final bracket together with the witness
    found there.  Whether the supremum itself is feasible is not decided.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if mu_hi_init <= 0:
        raise ValueError("mu_hi_init must be positive")
    iterations = 1
    r0 = solver(builder(0.0))
    if not r0.feasible:
        return GrowthSearchResult(0.0, (0.0, 0.0), iterations, None, BASAL_INADMISSIBLE)
    lo, lo_witness = 0.0, r0.witness

    hi = mu_hi_init
    cap = mu_hi_init * 2.0 ** DOUBLING_CAP
    while True:
        iterations += 1
        r = solver(builder(hi))
        if not r.feasible:
            break
        lo, lo_witness = hi, r.witness
        if hi >= cap:
            raise NoFiniteBracketError(
                f"no finite infeasible bracket found up to mu = {cap:g}; "
                "check that synthesis demands and basal composition are nonzero")
        hi *= 2.0

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        r = solver(builder(mid))
        if r.feasible:
            lo, lo_witness = mid, r.witness
        else:
            hi = mid
    return GrowthSearchResult(lo, (lo, hi), iterations, lo_witness, OK)


@dataclass
class FeasibilityProfile:
    mus: List[float]
    statuses: List[str]
    first_violation: Optional[int]

    def __iter__(self):
        return iter(self.statuses)

    def __len__(self):
        return len(self.statuses)

    @property
    def monotone(self) -> bool:
        return self.first_violation is None


def feasibility_profile(builder: Builder, mus: Sequence[float], workers: int = 1,
                        solver: Callable[[LinearProgram], SolveResult] = solve) -> FeasibilityProfile:
    """Solver status at each growth rate in ascending ``mus``.

    ``first_violation`` is the index of the first feasible entry that follows
    an infeasible one (a break of the feasible...infeasible pattern), or None.
    """
    mus = [float(m) for m in mus]
    if any(b < a for a, b in zip(mus, mus[1:])):
        raise ValueError("mus must be sorted ascending")

    def status(mu):
        return solver(builder(mu)).status

    if workers > 1 and len(mus) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            statuses = list(pool.map(status, mus))
    else:
        statuses = [status(mu) for mu in mus]
    first_violation = None
    seen_infeasible = False
    for i, s in enumerate(statuses):
        if s == "infeasible":
            seen_infeasible = True
        elif seen_infeasible:
            first_violation = i
            break
    return FeasibilityProfile(mus, statuses, first_violation)
