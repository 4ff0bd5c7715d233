"""Two-pool enzyme/machinery toy model: growth law, controlled dynamics, cost.

State (e, m); control alpha in [0, 1] is the share of synthesis flux sent to
enzymes.  Growth is min(kappa_e e, kappa_m m), or its log-sum-exp soft-min
when ``smoothing > 0``.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

CONSTANT = "constant"
MACHINE_PROPORTIONAL = "machine-proportional"
FLUX_MODES = (CONSTANT, MACHINE_PROPORTIONAL)

NEGATIVITY_TOL = 1e-9
TRAJECTORY_HEADER = ("t", "E", "M", "alpha", "mu", "J_cum")


class NegativityGuardError(RuntimeError):
    """A state went below -1e-9 during integration; reduce dt_max."""


@dataclass(frozen=True)
class ToyParams:
    kappa_e: float = 1.0
    kappa_m: float = 1.0
    gamma_e: float = 0.0
    gamma_m: float = 0.0
    flux_mode: str = CONSTANT
    nu_e_const: float = 1.0
    nu_m_const: float = 1.0
    flux_coupling: float = 1.0
    smoothing: float = 0.0

    def __post_init__(self):
        if not (self.kappa_e > 0 and self.kappa_m > 0):
            raise ValueError("kappa_e and kappa_m must be positive")
        for name in ("gamma_e", "gamma_m", "nu_e_const", "nu_m_const", "flux_coupling", "smoothing"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
        if self.flux_mode not in FLUX_MODES:
            raise ValueError(f"flux_mode must be one of {FLUX_MODES}, got {self.flux_mode!r}")

    def fluxes(self, m: float) -> Tuple[float, float]:
        if self.flux_mode == CONSTANT:
            return self.nu_e_const, self.nu_m_const
        nu = self.flux_coupling * m
        return nu, nu

    def flux_slopes(self) -> Tuple[float, float]:
        """d(nu_E)/dM and d(nu_M)/dM."""
        if self.flux_mode == CONSTANT:
            return 0.0, 0.0
        return self.flux_coupling, self.flux_coupling

    def rate_scale(self) -> float:
        return max(self.kappa_e, self.kappa_m, self.gamma_e, self.gamma_m,
                   self.nu_e_const, self.nu_m_const, self.flux_coupling, 1e-300)

    @property
    def symmetric(self) -> bool:
        return (self.kappa_e == self.kappa_m and self.gamma_e == self.gamma_m
                and (self.flux_mode != CONSTANT or self.nu_e_const == self.nu_m_const))

    def to_dict(self) -> Dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def params_from_dict(doc: Dict[str, Any]) -> ToyParams:
    known = set(ToyParams.__dataclass_fields__)
    section = doc.get("params", doc)
    extra = set(section) - known
    if extra:
        raise ValueError(f"unknown toy parameter(s): {sorted(extra)}")
    return ToyParams(**{k: (v if k == "flux_mode" else float(v)) for k, v in section.items()})


@dataclass(frozen=True)
class ToyState:
    e: float
    m: float

    def __post_init__(self):
        if not (self.e >= 0 and self.m >= 0):
            raise ValueError(f"state must be nonnegative, got ({self.e}, {self.m})")


def _softmin(a: float, b: float, eps: float) -> float:
    if eps == 0.0:
        return a if a < b else b
    lo = a if a < b else b
    return lo - eps * math.log1p(math.exp(-abs(a - b) / eps))


def _softmin_weight(a: float, b: float, eps: float) -> float:
    """d softmin / da; the weight on the second argument is 1 minus this."""
    z = (b - a) / eps
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def growth_rate(s: ToyState, p: ToyParams) -> float:
    return _softmin(p.kappa_e * s.e, p.kappa_m * s.m, p.smoothing)


def growth_partials(s: ToyState, p: ToyParams) -> Tuple[float, float]:
    """(d mu/dE, d mu/dM).  For the exact min the kink itself is excluded by callers."""
    a, b = p.kappa_e * s.e, p.kappa_m * s.m
    if p.smoothing == 0.0:
        return (p.kappa_e, 0.0) if a < b else (0.0, p.kappa_m)
    w = _softmin_weight(a, b, p.smoothing)
    return p.kappa_e * w, p.kappa_m * (1.0 - w)


def rhs(s: ToyState, alpha: float, p: ToyParams) -> Tuple[float, float]:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mu = growth_rate(s, p)
    nu_e, nu_m = p.fluxes(s.m)
    return (alpha * nu_e - (mu + p.gamma_e) * s.e,
            (1.0 - alpha) * nu_m - (mu + p.gamma_m) * s.m)


def _field(p: ToyParams):
    """Fast scalar right-hand side returning (de, dm, mu)."""
    ke, km, ge, gm, eps = p.kappa_e, p.kappa_m, p.gamma_e, p.gamma_m, p.smoothing
    const = p.flux_mode == CONSTANT
    ne0, nm0, c = p.nu_e_const, p.nu_m_const, p.flux_coupling
    log1p, exp = math.log1p, math.exp

    def f(e, m, alpha):
        a, b = ke * e, km * m
        if a < b:
            mu = a if eps == 0.0 else a - eps * log1p(exp((a - b) / eps))
        else:
            mu = b if eps == 0.0 else b - eps * log1p(exp((b - a) / eps))
        if const:
            ne, nm = ne0, nm0
        else:
            ne = nm = c * m
        return alpha * ne - (mu + ge) * e, (1.0 - alpha) * nm - (mu + gm) * m, mu

    return f


@dataclass(frozen=True)
class ControlSignal:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        v = np.array(self.values, dtype=float).reshape(-1)
        if g.ndim != 1 or g.size < 2:
            raise ValueError("control grid needs at least two points")
        if not np.all(np.diff(g) > 0):
            raise ValueError("control grid must be strictly increasing")
        if v.size != g.size - 1:
            raise ValueError(f"{g.size - 1} intervals but {v.size} values")
        if not np.all((v >= 0) & (v <= 1)):
            raise ValueError("control values must lie in [0, 1]")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, alpha: float, t_end: float, n: int = 1) -> "ControlSignal":
        return cls(np.linspace(0.0, t_end, n + 1), np.full(n, float(alpha)))

    @classmethod
    def uniform(cls, values: Sequence[float], t_end: float) -> "ControlSignal":
        values = np.asarray(values, dtype=float)
        return cls(np.linspace(0.0, t_end, values.size + 1), values)

    @property
    def t_end(self) -> float:
        return float(self.grid[-1])

    @property
    def n(self) -> int:
        return self.values.size

    def __call__(self, t: float) -> float:
        k = bisect.bisect_right(self.grid, t) - 1
        return float(self.values[min(max(k, 0), self.n - 1)])

    def replace_values(self, values) -> "ControlSignal":
        return ControlSignal(self.grid, values)


def control_from_dict(doc: Dict[str, Any], t_end: Optional[float] = None) -> ControlSignal:
    """Control file: ``constant = a`` (with ``t_end``), or ``grid`` + ``values``."""
    section = doc.get("control", doc)
    if "constant" in section:
        t = float(section.get("t_end", t_end if t_end is not None else float("nan")))
        if not math.isfinite(t) or t <= 0:
            raise ValueError("a constant control needs a positive t_end")
        return ControlSignal.constant(float(section["constant"]), t, int(section.get("n", 1)))
    if "grid" not in section or "values" not in section:
        raise ValueError("control needs either 'constant' or both 'grid' and 'values'")
    return ControlSignal(section["grid"], section["values"])


@dataclass
class Trajectory:
    times: np.ndarray
    e: np.ndarray
    m: np.ndarray
    controls: np.ndarray
    mu_values: np.ndarray
    cost_running: np.ndarray
    segment: np.ndarray
    volumes: Optional[np.ndarray] = None
    params: Optional[ToyParams] = None
    control: Optional[ControlSignal] = None

    def __len__(self):
        return self.times.size

    @property
    def states(self) -> List[ToyState]:
        return [ToyState(float(a), float(b)) for a, b in zip(self.e, self.m)]

    @property
    def final_state(self) -> ToyState:
        return ToyState(float(self.e[-1]), float(self.m[-1]))

    def to_csv(self, stream=None) -> str:
        buf = stream if stream is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for row in zip(self.times, self.e, self.m, self.controls, self.mu_values, self.cost_running):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue() if stream is None else ""


def _rk4(f, e, m, J, V, alpha, h):
    d1e, d1m, mu1 = f(e, m, alpha)
    d2e, d2m, mu2 = f(e + 0.5 * h * d1e, m + 0.5 * h * d1m, alpha)
    d3e, d3m, mu3 = f(e + 0.5 * h * d2e, m + 0.5 * h * d2m, alpha)
    d4e, d4m, mu4 = f(e + h * d3e, m + h * d3m, alpha)
    e1 = e + h / 6.0 * (d1e + 2 * d2e + 2 * d3e + d4e)
    m1 = m + h / 6.0 * (d1m + 2 * d2m + 2 * d3m + d4m)
    J1 = J + h / 6.0 * (mu1 + 2 * mu2 + 2 * mu3 + mu4)
    if V is not None:
        v1 = V * mu1
        v2 = (V + 0.5 * h * v1) * mu2
        v3 = (V + 0.5 * h * v2) * mu3
        v4 = (V + h * v3) * mu4
        V = V + h / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4)
    return e1, m1, J1, V


def integrate(x0: ToyState, u: ControlSignal, p: ToyParams, t_end: Optional[float] = None,
              dt_max: float = 1e-3, volume0: Optional[float] = None) -> Trajectory:
    """Fixed-step RK4; steps never straddle control breakpoints or (exact min) the kink.

    The running cost is integrated as an extra RK4 component, so it shares the
    fourth-order accuracy of the states.
    """
    t_end = u.t_end if t_end is None else float(t_end)
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if not dt_max > 0:
        raise ValueError("dt_max must be positive")
    if t_end > u.t_end * (1 + 1e-12) or u.grid[0] > 0:
        raise ValueError(f"control covers [{u.grid[0]}, {u.t_end}], not [0, {t_end}]")
    f = _field(p)
    ke, km = p.kappa_e, p.kappa_m
    exact = p.smoothing == 0.0
    e, m, J, V = float(x0.e), float(x0.m), 0.0, volume0
    ts, es, ms, als, mus, Js, segs, Vs = [0.0], [e], [m], [], [f(e, m, 0.0)[2]], [0.0], [], [V]

    def guard(val, t):
        if val < 0.0:
            if val < -NEGATIVITY_TOL:
                raise NegativityGuardError(
                    f"state fell to {val:.3e} at t = {t:.6g}; reduce dt_max (now {dt_max:g})")
            return 0.0
        return val

    for k in range(u.n):
        a, b = float(u.grid[k]), min(float(u.grid[k + 1]), t_end)
        if a >= t_end:
            break
        alpha = float(u.values[k])
        nsub = max(1, math.ceil((b - a) / dt_max - 1e-9))
        h_nom = (b - a) / nsub
        t = a
        j, aligned = 0, True
        while t < b:
            h = b - t if b - t <= h_nom * (1 + 1e-9) else h_nom
            e1, m1, J1, V1 = _rk4(f, e, m, J, V, alpha, h)
            if exact:
                d0, d1 = ke * e - km * m, ke * e1 - km * m1
                scale = 1e-12 * (abs(ke * e) + abs(km * m) + 1e-300)
                if abs(d0) > scale and d0 * d1 < 0:
                    lo, hi = 0.0, h
                    for _ in range(60):
                        mid = 0.5 * (lo + hi)
                        ee, mm, _, _ = _rk4(f, e, m, J, V, alpha, mid)
                        if (ke * ee - km * mm) * d0 > 0:
                            lo = mid
                        else:
                            hi = mid
                    if hi > 1e-12 * h_nom:
                        h = hi
                        aligned = False
                        e1, m1, J1, V1 = _rk4(f, e, m, J, V, alpha, h)
            j += 1
            # regular steps land on a + j*h_nom exactly; event steps accumulate
            t = b if h == b - t else (a + j * h_nom if aligned else t + h)
            e, m, J, V = guard(e1, t), guard(m1, t), J1, V1
            ts.append(t)
            es.append(e)
            ms.append(m)
            als.append(alpha)
            mus.append(f(e, m, alpha)[2])
            Js.append(J)
            segs.append(k)
            Vs.append(V)
    als.append(als[-1])
    return Trajectory(times=np.array(ts), e=np.array(es), m=np.array(ms), controls=np.array(als),
                      mu_values=np.array(mus), cost_running=np.array(Js), segment=np.array(segs, dtype=int),
                      volumes=None if volume0 is None else np.array(Vs), params=p, control=u)


def cost(traj: Trajectory) -> float:
    return float(traj.cost_running[-1])


def trapezoid_cost(traj: Trajectory) -> float:
    """Trapezoidal quadrature of the sampled growth rate (second-order cross-check)."""
    return float(trapezoid(traj.mu_values, traj.times))


def rba_checkpoints(traj: Trajectory, builder_for_state: Callable[[ToyState], Callable],
                    n_checkpoints: int = 10, tol: float = 1e-6) -> List[Tuple[float, float, float]]:
    """Compare the toy growth rate with an LP-derived maximal rate at a few times.

    ``builder_for_state(state)`` must return a function ``mu -> LinearProgram``.
    Returns (t, toy mu, LP mu_max) triples.  Purely diagnostic.
    """
    from .growth import mu_max

    idx = np.unique(np.linspace(0, len(traj) - 1, n_checkpoints).round().astype(int))
    out = []
    for i in idx:
        s = ToyState(float(traj.e[i]), float(traj.m[i]))
        res = mu_max(builder_for_state(s), tol=tol)
        out.append((float(traj.times[i]), float(traj.mu_values[i]), res.mu_max))
    return out


@dataclass(frozen=True)
class ToyProblem:
    params: ToyParams
    x0: ToyState
    t_end: float
    grid_n: int = 100
    dt_max: Optional[float] = None
    control: Optional[ControlSignal] = None

    def with_horizon(self, t_end: Optional[float] = None, grid_n: Optional[int] = None) -> "ToyProblem":
        return ToyProblem(self.params, self.x0, self.t_end if t_end is None else float(t_end),
                          self.grid_n if grid_n is None else int(grid_n), self.dt_max, self.control)


def toy_problem_from_dict(doc: Dict[str, Any]) -> ToyProblem:
    """Sections ``params``, ``initial`` (e, m), ``horizon`` (t_end, grid_n, dt_max), optional ``control``."""
    for key in ("params", "initial", "horizon"):
        if key not in doc:
            raise ValueError(f"toy problem needs a [{key}] section")
    p = params_from_dict(doc["params"])
    x0 = ToyState(float(doc["initial"]["e"]), float(doc["initial"]["m"]))
    h = doc["horizon"]
    t_end = float(h["t_end"])
    dt = h.get("dt_max")
    control = control_from_dict(doc["control"], t_end) if "control" in doc else None
    return ToyProblem(p, x0, t_end, int(h.get("grid_n", 100)), None if dt is None else float(dt), control)


def load_toy_problem(path) -> ToyProblem:
    from .model import read_document

    return toy_problem_from_dict(read_document(path))
