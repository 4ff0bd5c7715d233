"""Dense bounded-variable simplex for small linear feasibility problems.

Problems are stated as::

    a_eq   x  = b_eq
    a_ineq x <= b_ineq
    lower <= x <= upper          (entries may be -inf / +inf)

and optionally ``maximize objective @ x``.  Phase 1 minimizes a sum of
artificial variables to decide feasibility; phase 2 (only when the objective
is nonzero) maximizes the objective from the phase-1 basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded-objective"

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10
BLAND_AFTER = 1000


class DimensionMismatchError(ValueError):
    pass


class IterationLimitError(RuntimeError):
    pass


def _as_matrix(a, ncols: int, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        # [] and (0, 0) are shorthand for "no rows"; an explicit column count must match
        if a.ndim == 2 and a.shape[1] not in (0, ncols):
            raise DimensionMismatchError(f"{name} has shape {a.shape}, expected (*, {ncols})")
        return np.zeros((0, ncols))
    if a.ndim != 2 or a.shape[1] != ncols:
        raise DimensionMismatchError(f"{name} has shape {a.shape}, expected (*, {ncols})")
    return a


def _as_vector(v, n: int, name: str, fill: float = 0.0) -> np.ndarray:
    if v is None:
        return np.full(n, fill)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise DimensionMismatchError(f"{name} has length {v.shape[0]}, expected {n}")
    return v


@dataclass(frozen=True, eq=False)
class LinearProgram:
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ineq: np.ndarray
    b_ineq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective: Optional[np.ndarray] = None
    variable_names: Optional[Sequence[str]] = None
    eq_names: Optional[Sequence[str]] = None
    ineq_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        n = lower.shape[0]
        a_eq = _as_matrix(self.a_eq, n, "a_eq")
        a_ineq = _as_matrix(self.a_ineq, n, "a_ineq")
        b_eq = _as_vector(self.b_eq, a_eq.shape[0], "b_eq")
        b_ineq = _as_vector(self.b_ineq, a_ineq.shape[0], "b_ineq")
        upper = _as_vector(self.upper, n, "upper")
        objective = _as_vector(self.objective, n, "objective")
        if np.any(lower > upper):
            j = int(np.argmax(lower > upper))
            raise ValueError(f"lower > upper for variable {j}")
        if np.isnan(a_eq).any() or np.isnan(a_ineq).any():
            raise ValueError("constraint matrix contains NaN")
        names = list(self.variable_names) if self.variable_names is not None else [f"x{j}" for j in range(n)]
        if len(names) != n:
            raise DimensionMismatchError(f"{len(names)} variable names for {n} variables")
        for attr, val in (("a_eq", a_eq), ("b_eq", b_eq), ("a_ineq", a_ineq), ("b_ineq", b_ineq),
                          ("lower", lower), ("upper", upper), ("objective", objective)):
            val = val.copy()
            val.setflags(write=False)
            object.__setattr__(self, attr, val)
        object.__setattr__(self, "variable_names", tuple(names))

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def m_eq(self) -> int:
        return self.a_eq.shape[0]

    @property
    def m_ineq(self) -> int:
        return self.a_ineq.shape[0]

    def with_objective(self, objective) -> "LinearProgram":
        return LinearProgram(self.a_eq, self.b_eq, self.a_ineq, self.b_ineq, self.lower, self.upper,
                             objective, self.variable_names, self.eq_names, self.ineq_names)


@dataclass
class ResidualReport:
    eq: float
    ineq: float
    lower: float
    upper: float
    tol_eq: float
    tol_ineq: float
    tol_bounds: float

    @property
    def passed(self) -> bool:
        return (self.eq <= self.tol_eq and self.ineq <= self.tol_ineq
                and self.lower <= self.tol_bounds and self.upper <= self.tol_bounds)

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class SolveResult:
    status: str
    witness: Optional[np.ndarray]
    max_residual_eq: float = np.nan
    max_residual_ineq: float = np.nan
    iterations: int = 0
    objective_value: float = np.nan
    degenerate: bool = False

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


def _residuals(lp: LinearProgram, x: np.ndarray):
    req = float(np.max(np.abs(lp.a_eq @ x - lp.b_eq))) if lp.m_eq else 0.0
    riq = float(np.max(np.maximum(lp.a_ineq @ x - lp.b_ineq, 0.0))) if lp.m_ineq else 0.0
    rlo = float(np.max(np.maximum(lp.lower - x, 0.0), initial=0.0))
    rhi = float(np.max(np.maximum(x - lp.upper, 0.0), initial=0.0))
    return req, riq, rlo, rhi


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def check_point(lp: LinearProgram, x, tol: float = FEAS_TOL, relative: bool = True) -> ResidualReport:
    """Maximal violation of each constraint block at ``x``.

    With ``relative`` the equality and inequality thresholds are
    ``tol * (1 + ||b||_inf)`` of the corresponding block, matching the
    acceptance rule used by :func:`solve`.  Bound violations are always absolute.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != lp.n:
        raise DimensionMismatchError(f"point has length {x.shape[0]}, LP has {lp.n} variables")
    req, riq, rlo, rhi = _residuals(lp, x)
    if relative:
        teq = tol * (1.0 + _inf_norm(lp.b_eq))
        tiq = tol * (1.0 + _inf_norm(lp.b_ineq))
    else:
        teq = tiq = tol
    return ResidualReport(req, riq, rlo, rhi, teq, tiq, tol)


class _Simplex:
    """Bounded revised simplex on ``A z = b, lo <= z <= hi`` (minimization).

    The basis is refactorized every iteration; instances here have at most a
    few hundred rows, so this is cheap and avoids drift in the basic values.
    """

    def __init__(self, A, b, lo, hi, z, basis, max_iter, bland_after=BLAND_AFTER):
        self.A, self.b, self.lo, self.hi = A, b, lo, hi
        self.z = z
        self.basis = list(basis)
        self.max_iter = max_iter
        self.bland_after = bland_after
        self.iterations = 0
        self.degenerate_pivots = 0
        self.free = np.isinf(lo) & np.isinf(hi)

    def _factor(self):
        B = self.A[:, self.basis]
        return scipy.linalg.lu_factor(B, check_finite=False)

    def _basic_values(self, lu):
        nb = np.ones(self.A.shape[1], dtype=bool)
        nb[self.basis] = False
        rhs = self.b - self.A[:, nb] @ self.z[nb]
        self.z[self.basis] = scipy.linalg.lu_solve(lu, rhs, check_finite=False)

    def run(self, c) -> str:
        A, lo, hi = self.A, self.lo, self.hi
        N = A.shape[1]
        while True:
            lu = self._factor()
            self._basic_values(lu)
            y = scipy.linalg.lu_solve(lu, c[self.basis], trans=1, check_finite=False)
            d = c - A.T @ y
            d[self.basis] = 0.0
            dtol = 1e-9 * (1.0 + np.max(np.abs(c)))

            nonbasic = np.ones(N, dtype=bool)
            nonbasic[self.basis] = False
            z = self.z
            at_lo = nonbasic & ~self.free & (z <= lo) & (hi > lo)
            at_hi = nonbasic & ~self.free & (z >= hi) & (hi > lo)
            up = (at_lo & (d < -dtol)) | (self.free & nonbasic & (d < -dtol))
            down = (at_hi & (d > dtol)) | (self.free & nonbasic & (d > dtol))
            eligible = np.flatnonzero(up | down)
            if eligible.size == 0:
                return "optimal"
            if self.iterations >= self.max_iter:
                raise IterationLimitError(f"simplex exceeded {self.max_iter} iterations")
            self.iterations += 1

            if self.degenerate_pivots >= self.bland_after:
                j = int(eligible[0])
            else:
                j = int(eligible[np.argmax(np.abs(d[eligible]))])
            direction = 1.0 if up[j] else -1.0

            w = scipy.linalg.lu_solve(lu, A[:, j], check_finite=False)
            dz = -direction * w
            step = hi[j] - lo[j]
            leave = -1
            leave_to = 0.0
            xb = z[self.basis]
            lob = lo[self.basis]
            hib = hi[self.basis]
            ratios = np.full(len(self.basis), np.inf)
            dec = (dz < -PIVOT_TOL) & np.isfinite(lob)
            inc = (dz > PIVOT_TOL) & np.isfinite(hib)
            ratios[dec] = np.maximum(xb[dec] - lob[dec], 0.0) / -dz[dec]
            ratios[inc] = np.maximum(hib[inc] - xb[inc], 0.0) / dz[inc]
            rmin = ratios.min() if ratios.size else np.inf
            if rmin < step:
                ties = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + rmin))
                if self.degenerate_pivots >= self.bland_after:
                    r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(dz[ties]))])
                leave = r
                step = ratios[r]
                leave_to = lob[r] if dz[r] < 0 else hib[r]
            if not np.isfinite(step):
                return "unbounded"

            if step <= 1e-12:
                self.degenerate_pivots += 1
            z[j] = z[j] + direction * step
            if leave < 0:
                # bound flip, basis unchanged
                z[j] = hi[j] if direction > 0 else lo[j]
                continue
            out = self.basis[leave]
            self.basis[leave] = j
            z[out] = leave_to


def _initial_nonbasic_value(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    z = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    return z


def solve(lp: LinearProgram, max_iter: Optional[int] = None, feas_tol: float = FEAS_TOL,
          bland_after: int = BLAND_AFTER) -> SolveResult:
    """Decide feasibility of ``lp`` and, if it has a nonzero objective, maximize it."""
    n, me, mi = lp.n, lp.m_eq, lp.m_ineq
    m = me + mi
    if max_iter is None:
        max_iter = 50 * (n + me + mi)

    # structural columns | slacks | artificials (added per row as needed)
    A = np.zeros((m, n + mi))
    A[:me, :n] = lp.a_eq
    A[me:, :n] = lp.a_ineq
    A[me:, n:] = np.eye(mi)
    b = np.concatenate([lp.b_eq, lp.b_ineq])
    lo = np.concatenate([lp.lower, np.zeros(mi)])
    hi = np.concatenate([lp.upper, np.full(mi, np.inf)])
    z = _initial_nonbasic_value(lo, hi)
    z[n:] = 0.0
    r = b - A @ z

    basis = []
    art_cols = []
    for i in range(m):
        if i >= me and r[i] >= 0.0:
            basis.append(n + (i - me))
            continue
        col = np.zeros(m)
        col[i] = 1.0 if r[i] >= 0 else -1.0
        art_cols.append(col)
        basis.append(n + mi + len(art_cols) - 1)
    n_art = len(art_cols)
    if n_art:
        A = np.hstack([A, np.column_stack(art_cols)])
    lo = np.concatenate([lo, np.zeros(n_art)])
    hi = np.concatenate([hi, np.full(n_art, np.inf)])
    z = np.concatenate([z, np.zeros(n_art)])

    if m == 0:
        x = z[:n].copy()
        return _finish(lp, x, 0, feas_tol, bland_after, max_iter)

    sx = _Simplex(A, b, lo, hi, z, basis, max_iter, bland_after)
    if n_art:
        c1 = np.zeros(A.shape[1])
        c1[n + mi:] = 1.0
        sx.run(c1)
        x = np.clip(sx.z[:n], lp.lower, lp.upper)
        req, riq, _, _ = _residuals(lp, x)
        if req > feas_tol * (1.0 + _inf_norm(lp.b_eq)) or riq > feas_tol * (1.0 + _inf_norm(lp.b_ineq)):
            return SolveResult(INFEASIBLE, None, req, riq, sx.iterations)
        # artificials are pinned to zero for phase 2
        sx.hi[n + mi:] = 0.0
        nb_art = [k for k in range(n + mi, A.shape[1]) if k not in set(sx.basis)]
        sx.z[nb_art] = 0.0

    if not np.any(lp.objective):
        x = np.clip(sx.z[:n], lp.lower, lp.upper)
        req, riq, _, _ = _residuals(lp, x)
        return SolveResult(FEASIBLE, x, req, riq, sx.iterations, 0.0, False)

    c2 = np.zeros(A.shape[1])
    c2[:n] = -lp.objective
    outcome = sx.run(c2)
    x = np.clip(sx.z[:n], lp.lower, lp.upper)
    req, riq, _, _ = _residuals(lp, x)
    if outcome == "unbounded":
        return SolveResult(UNBOUNDED, x, req, riq, sx.iterations, np.inf, False)
    degenerate = _has_zero_reduced_cost(sx, c2, n + mi)
    return SolveResult(FEASIBLE, x, req, riq, sx.iterations, float(lp.objective @ x), degenerate)


def _finish(lp, x, iterations, feas_tol, bland_after, max_iter) -> SolveResult:
    # no constraint rows: only the box matters
    if np.any(lp.objective):
        obj = lp.objective
        bound = np.where(obj > 0, lp.upper, np.where(obj < 0, lp.lower, x))
        if np.any(~np.isfinite(bound[obj != 0])):
            return SolveResult(UNBOUNDED, x, 0.0, 0.0, 0, np.inf)
        x = np.where(obj != 0, bound, x)
    return SolveResult(FEASIBLE, x, 0.0, 0.0, iterations, float(lp.objective @ x))


def _has_zero_reduced_cost(sx: _Simplex, c: np.ndarray, n_real: int) -> bool:
    lu = sx._factor()
    y = scipy.linalg.lu_solve(lu, c[sx.basis], trans=1, check_finite=False)
    d = c - sx.A.T @ y
    mask = np.ones(sx.A.shape[1], dtype=bool)
    mask[sx.basis] = False
    mask[n_real:] = False
    mask &= sx.hi > sx.lo
    return bool(np.any(np.abs(d[mask]) <= 1e-9 * (1.0 + np.max(np.abs(c)))))


def format_tableau(lp: LinearProgram, precision: int = 6) -> str:
    """Plain-text dump of the constraint system, one row per constraint."""
    names = list(lp.variable_names)
    width = max([len(s) for s in names] + [precision + 7])
    fmt = f"{{:>{width}.{precision}g}}"
    head = " ".join(f"{s:>{width}}" for s in names)
    lines = [f"{'row':<16} {head} {'rel':>3} {'rhs':>{width}}"]

    def emit(label, row, rel, rhs):
        cells = " ".join(fmt.format(v) for v in row)
        lines.append(f"{label:<16} {cells} {rel:>3} {fmt.format(rhs)}")

    eqn = lp.eq_names or [f"eq{i}" for i in range(lp.m_eq)]
    iqn = lp.ineq_names or [f"iq{i}" for i in range(lp.m_ineq)]
    for i in range(lp.m_eq):
        emit(eqn[i][:16], lp.a_eq[i], "=", lp.b_eq[i])
    for i in range(lp.m_ineq):
        emit(iqn[i][:16], lp.a_ineq[i], "<=", lp.b_ineq[i])
    emit("lower", lp.lower, "", np.nan)
    emit("upper", lp.upper, "", np.nan)
    if np.any(lp.objective):
        emit("maximize", lp.objective, "", np.nan)
    return "\n".join(lines) + "\n"
