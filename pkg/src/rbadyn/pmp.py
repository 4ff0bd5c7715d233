"""Pontryagin machinery for the two-pool toy model.

Hamiltonian ``H = eta0*mu + eta_e*de/dt + eta_m*dm/dt = H0 + alpha*H1`` with
``H1 = eta_e*nu_E - eta_m*nu_M``.  With ``eta0 = +1`` (the default) the
costates are the sensitivities of the accumulated growth to the state, the
maximum condition selects growth-maximizing controls, and
``dJ/dalpha_k = integral of H1 over interval k``.  ``eta0 = -1`` describes the
minimizing problem and flips the sign of the costates.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import NoConvergence, brentq, minimize, newton_krylov

from .dynamics import (CONSTANT, ControlSignal, NegativityGuardError, ToyParams, ToyState, Trajectory, _field, growth_partials,
                       growth_rate, integrate)

KINK_TOL = 1e-12
SINGULAR_BAND = 1e-6
CHATTER_CAP = 64
SWEEP_HEADER = ("t", "E", "M", "eta_E", "eta_M", "alpha", "H", "H1")


class KinkError(ValueError):
    """Costate equations evaluated on the kink of the exact min growth law."""


class DegenerateWindowError(ValueError):
    """Terminal averaging window holds fewer than 10 samples."""


class SteadyStateError(ValueError):
    """No positive balanced steady state exists for these parameters."""


@dataclass(frozen=True)
class AdjointState:
    eta_e: float
    eta_m: float
    eta0: float = 1.0


def hamiltonian(s: ToyState, a: AdjointState, alpha: float, p: ToyParams) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mu = growth_rate(s, p)
    nu_e, nu_m = p.fluxes(s.m)
    return (a.eta0 * mu + a.eta_e * (alpha * nu_e - (mu + p.gamma_e) * s.e)
            + a.eta_m * ((1.0 - alpha) * nu_m - (mu + p.gamma_m) * s.m))


def switching(s: ToyState, a: AdjointState, p: ToyParams) -> float:
    nu_e, nu_m = p.fluxes(s.m)
    return a.eta_e * nu_e - a.eta_m * nu_m


def _check_kink(e: float, m: float, p: ToyParams):
    if p.smoothing == 0.0 and abs(p.kappa_e * e - p.kappa_m * m) < KINK_TOL:
        raise KinkError(f"exact min growth law is not differentiable at (e, m) = ({e}, {m}); "
                        "use smoothing > 0")


def adjoint_rhs(s: ToyState, a: AdjointState, alpha: float, p: ToyParams) -> Tuple[float, float]:
    """(d eta_e/dt, d eta_m/dt) = -dH/d(e, m).

    In machine-proportional mode the fluxes depend on M, which adds
    ``-(eta_e*alpha + eta_m*(1 - alpha))*flux_coupling`` to d eta_m/dt.
    """
    _check_kink(s.e, s.m, p)
    mu = growth_rate(s, p)
    mu_e, mu_m = growth_partials(s, p)
    de = -a.eta0 * mu_e + a.eta_e * (mu + p.gamma_e) + a.eta_e * s.e * mu_e + a.eta_m * s.m * mu_e
    dm = -a.eta0 * mu_m + a.eta_m * (mu + p.gamma_m) + a.eta_m * s.m * mu_m + a.eta_e * s.e * mu_m
    se, sm = p.flux_slopes()
    dm -= a.eta_e * alpha * se + a.eta_m * (1.0 - alpha) * sm
    return de, dm


def _adjoint_field(p: ToyParams, eta0: float):
    """Scalar (d eta_e, d eta_m, H1, H) at a state, costate and control."""
    ke, km, ge, gm, eps = p.kappa_e, p.kappa_m, p.gamma_e, p.gamma_m, p.smoothing
    const = p.flux_mode == CONSTANT
    ne0, nm0, c = p.nu_e_const, p.nu_m_const, p.flux_coupling
    se, sm = p.flux_slopes()
    log1p, exp = math.log1p, math.exp

    def g(e, m, eta_e, eta_m, alpha):
        a, b = ke * e, km * m
        if eps == 0.0:
            if abs(a - b) < KINK_TOL:
                _check_kink(e, m, p)
            mu, w = (a, 1.0) if a < b else (b, 0.0)
        else:
            z = (b - a) / eps
            if z >= 0:
                mu = a - eps * log1p(exp(-z))
                w = 1.0 / (1.0 + exp(-z))
            else:
                mu = b - eps * log1p(exp(z))
                ez = exp(z)
                w = ez / (1.0 + ez)
        mu_e, mu_m = ke * w, km * (1.0 - w)
        if const:
            ne, nm = ne0, nm0
        else:
            ne = nm = c * m
        de = -eta0 * mu_e + eta_e * (mu + ge) + eta_e * e * mu_e + eta_m * m * mu_e
        dm = (-eta0 * mu_m + eta_m * (mu + gm) + eta_m * m * mu_m + eta_e * e * mu_m
              - eta_e * alpha * se - eta_m * (1.0 - alpha) * sm)
        h1 = eta_e * ne - eta_m * nm
        h = (eta0 * mu + eta_e * (alpha * ne - (mu + ge) * e)
             + eta_m * ((1.0 - alpha) * nm - (mu + gm) * m))
        return de, dm, h1, h

    return g


@dataclass
class AdjointPath:
    """Costates on the trajectory nodes plus per-control-interval integrals."""
    times: np.ndarray
    eta_e: np.ndarray
    eta_m: np.ndarray
    eta0: float
    h1_integral: np.ndarray
    h_integral: np.ndarray
    interval_lengths: np.ndarray

    def __len__(self):
        return self.times.size

    def __getitem__(self, i) -> AdjointState:
        return AdjointState(float(self.eta_e[i]), float(self.eta_m[i]), self.eta0)

    @property
    def states(self) -> List[AdjointState]:
        return [self[i] for i in range(len(self))]

    @property
    def gradient(self) -> np.ndarray:
        """dJ/d alpha_k for the piecewise-constant control (valid for eta0 = +1)."""
        return self.h1_integral * self.eta0

    @property
    def h1_mean(self) -> np.ndarray:
        return self.h1_integral / self.interval_lengths

    @property
    def h_mean(self) -> np.ndarray:
        return self.h_integral / self.interval_lengths


def backward_integrate(traj: Trajectory, p: ToyParams, eta0: float = 1.0) -> AdjointPath:
    """RK4 backward pass from eta(T) = 0 along the stored trajectory.

    Midpoint states come from cubic Hermite interpolation of the forward
    nodes, which keeps the pass fourth-order.  The integrals of H1 and H over
    each control interval are carried as extra components.
    """
    f = _field(p)
    g = _adjoint_field(p, eta0)
    t, E, M, A = traj.times, traj.e, traj.m, traj.controls
    n = t.size
    seg = traj.segment
    n_int = traj.control.n if traj.control is not None else int(seg.max()) + 1
    eta_e = np.zeros(n)
    eta_m = np.zeros(n)
    q1 = np.zeros(n_int)
    qh = np.zeros(n_int)
    lengths = np.zeros(n_int)
    ye = ym = 0.0
    for i in range(n - 2, -1, -1):
        h = t[i + 1] - t[i]
        al = A[i]
        e0, m0, e1, m1 = E[i], M[i], E[i + 1], M[i + 1]
        f0e, f0m, _ = f(e0, m0, al)
        f1e, f1m, _ = f(e1, m1, al)
        ec = 0.5 * (e0 + e1) + h / 8.0 * (f0e - f1e)
        mc = 0.5 * (m0 + m1) + h / 8.0 * (f0m - f1m)
        k1e, k1m, a1, b1 = g(e1, m1, ye, ym, al)
        k2e, k2m, a2, b2 = g(ec, mc, ye - 0.5 * h * k1e, ym - 0.5 * h * k1m, al)
        k3e, k3m, a3, b3 = g(ec, mc, ye - 0.5 * h * k2e, ym - 0.5 * h * k2m, al)
        k4e, k4m, a4, b4 = g(e0, m0, ye - h * k3e, ym - h * k3m, al)
        ye -= h / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e)
        ym -= h / 6.0 * (k1m + 2 * k2m + 2 * k3m + k4m)
        eta_e[i], eta_m[i] = ye, ym
        k = seg[i]
        q1[k] += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        qh[k] += h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
        lengths[k] += h
    lengths[lengths == 0] = np.nan
    return AdjointPath(t.copy(), eta_e, eta_m, float(eta0), q1, qh, lengths)


def node_hamiltonian(traj: Trajectory, adj: AdjointPath, p: ToyParams, alpha=None) -> Tuple[np.ndarray, np.ndarray]:
    """(H, H1) sampled at trajectory nodes for the applied (or a given constant) control."""
    g = _adjoint_field(p, adj.eta0)
    al = traj.controls if alpha is None else np.full(len(traj), float(alpha))
    H = np.empty(len(traj))
    H1 = np.empty(len(traj))
    for i in range(len(traj)):
        _, _, H1[i], H[i] = g(traj.e[i], traj.m[i], adj.eta_e[i], adj.eta_m[i], al[i])
    return H, H1


@dataclass
class SweepResult:
    control: ControlSignal
    trajectory: Trajectory
    adjoints: AdjointPath
    switching: np.ndarray
    cost: float
    iterations: int
    converged: bool
    singular_fraction: float
    last_update: float = float("nan")
    relax: float = float("nan")
    history: List[float] = field(default_factory=list)
    message: str = ""

    @property
    def hamiltonian(self) -> np.ndarray:
        """Interval means of H along the extremal."""
        return self.adjoints.h_mean

    def singular_mask(self, band: float = SINGULAR_BAND) -> np.ndarray:
        return singular_mask(self.switching, band)

    def to_csv(self, p: ToyParams, stream=None) -> str:
        H, H1 = node_hamiltonian(self.trajectory, self.adjoints, p)
        tr, ad = self.trajectory, self.adjoints
        buf = stream if stream is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in zip(tr.times, tr.e, tr.m, ad.eta_e, ad.eta_m, tr.controls, H, H1):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue() if stream is None else ""


def singular_mask(h1: np.ndarray, band: float = SINGULAR_BAND) -> np.ndarray:
    h1 = np.asarray(h1, dtype=float)
    scale = float(np.max(np.abs(h1))) if h1.size else 0.0
    return np.abs(h1) <= band * scale


def _bang_targets(alpha: np.ndarray, h1: np.ndarray, t_end: float) -> np.ndarray:
    """Maximum-condition targets; singular intervals keep their current value.

    If H1 changes sign more than ``CHATTER_CAP`` times per unit time, the
    targets are replaced by their running average over 1/CHATTER_CAP time
    units (a Filippov-style averaged control).
    """
    sing = singular_mask(h1)
    target = np.where(h1 > 0, 1.0, 0.0)
    target[sing] = alpha[sing]
    signs = np.sign(h1[~sing])
    changes = int(np.count_nonzero(np.diff(signs) != 0)) if signs.size > 1 else 0
    if changes > CHATTER_CAP * t_end:
        width = max(1, int(round(h1.size / (CHATTER_CAP * t_end))))
        kernel = np.ones(width) / width
        target = np.convolve(np.pad(target, (width // 2, width - 1 - width // 2), mode="edge"), kernel, "valid")
    return target


class _Evaluator:
    def __init__(self, x0, p, grid, dt_max):
        self.x0, self.p, self.grid, self.dt_max = x0, p, grid, dt_max
        self.n_eval = 0

    def __call__(self, alpha):
        self.n_eval += 1
        u = ControlSignal(self.grid, np.clip(alpha, 0.0, 1.0))
        for _ in range(4):
            try:
                traj = integrate(self.x0, u, self.p, dt_max=self.dt_max)
                break
            except NegativityGuardError:
                # stiff excursion: refine the step for this and later evaluations
                self.dt_max /= 4.0
        else:
            traj = integrate(self.x0, u, self.p, dt_max=self.dt_max)
        adj = backward_integrate(traj, self.p, eta0=1.0)
        return u, traj, adj, float(traj.cost_running[-1])


def sweep(x0: ToyState, p: ToyParams, t_end: float, grid_n: int = 100, relax: float = 0.5,
          tol: float = 1e-8, max_iter: int = 200, alpha0=0.5, dt_max: Optional[float] = None,
          polish: bool = True, polish_iter: int = 3000) -> SweepResult:
    """Forward-backward sweep with relaxed bang updates, then a bounded quasi-Newton polish.

    Each sweep iteration integrates the state, integrates the costates
    backward, and moves ``alpha <- (1-r)*alpha + r*target`` where the target
    is 1 where the interval mean of H1 is positive, 0 where it is negative,
    and the current value inside the singular band.  A step that lowers J is
    rejected and ``r`` halved; an accepted step lets ``r`` double back up to
    ``relax``.  The polish stage maximizes J over the same piecewise-constant
    controls with L-BFGS-B and the adjoint gradient, which settles interior
    (singular) values that bang targets only reach by chattering.  The final
    iteration recomputes the targets at ``r = relax``; the run is converged
    when that update is within ``tol`` in sup-norm.
    """
    if p.smoothing <= 0:
        raise ValueError("sweep needs a differentiable growth law (smoothing > 0)")
    if not 0 < relax <= 1:
        raise ValueError("relax must lie in (0, 1]")
    if grid_n < 1 or not t_end > 0:
        raise ValueError("grid_n must be >= 1 and t_end > 0")
    grid = np.linspace(0.0, t_end, grid_n + 1)
    h_int = t_end / grid_n
    if dt_max is None:
        dt_max = min(h_int, 0.05 / p.rate_scale())
    evaluate = _Evaluator(x0, p, grid, dt_max)
    alpha = np.clip(np.broadcast_to(np.asarray(alpha0, dtype=float), (grid_n,)).copy(), 0.0, 1.0)
    u, traj, adj, J = evaluate(alpha)
    history = [J]
    r = relax
    it = 0
    while it < max_iter:
        it += 1
        target = _bang_targets(alpha, adj.h1_mean, t_end)
        cand = (1.0 - r) * alpha + r * target
        if float(np.max(np.abs(cand - alpha))) <= tol:
            break
        u2, traj2, adj2, J2 = evaluate(cand)
        if J2 < J - 1e-15 * abs(J):
            r *= 0.5
            if r < 1e-6 * relax:
                break
            continue
        alpha, u, traj, adj, J = cand, u2, traj2, adj2, J2
        history.append(J)
        r = min(relax, 2.0 * r)

    message = ""
    if polish:
        alpha, u, traj, adj, J, message, nit = _polish(evaluate, alpha, u, traj, adj, J, h_int, polish_iter)
        it += nit
        alpha, u, traj, adj, J, nit = _refine_interior(evaluate, alpha, u, traj, adj, J)
        it += nit
        history.append(J)
    it += 1
    target = _bang_targets(alpha, adj.h1_mean, t_end)
    update = float(np.max(np.abs(relax * (target - alpha))))
    converged = update <= tol
    if not converged:
        message = (message + "; " if message else "") + f"final update {update:.3e} > tol {tol:g}"
    h1 = adj.h1_mean
    sing = singular_mask(h1)
    return SweepResult(control=u, trajectory=traj, adjoints=adj, switching=h1, cost=J, iterations=it,
                       converged=bool(converged), singular_fraction=float(np.mean(sing)),
                       last_update=update, relax=r, history=history, message=message)


def _polish(evaluate, alpha, u, traj, adj, J, h_int, max_iter):
    cache = {}

    def fun(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = evaluate(x)
        _, _, a, j = cache[key]
        return -j / h_int, -a.gradient / h_int

    res = minimize(fun, alpha, jac=True, method="L-BFGS-B", bounds=[(0.0, 1.0)] * alpha.size,
                   options=dict(maxiter=max_iter, maxfun=2 * max_iter, ftol=1e-15, gtol=1e-13, maxcor=30))
    x = np.clip(res.x, 0.0, 1.0)
    u2, traj2, adj2, J2 = evaluate(x)
    if J2 >= J:
        return x, u2, traj2, adj2, J2, f"polish: {res.message}", int(res.nit)
    return alpha, u, traj, adj, J, "polish rejected", int(res.nit)


def _refine_interior(evaluate, alpha, u, traj, adj, J, max_steps: int = 20):
    """Newton-Krylov on the interior intervals: drive their mean H1 to zero.

    Near singular arcs J is too flat for line searches on J to resolve the
    last digits of the gradient; this solves the stationarity equations
    directly and keeps the result only if J does not drop.
    """
    free = (alpha > 1e-9) & (alpha < 1 - 1e-9)
    if not free.any():
        return alpha, u, traj, adj, J, 0
    scale = float(np.max(np.abs(adj.h1_mean))) or 1.0
    base = alpha.copy()

    def resid(x):
        b = base.copy()
        b[free] = np.clip(x, 0.0, 1.0)
        return evaluate(b)[2].h1_mean[free]

    before = evaluate.n_eval
    try:
        with np.errstate(invalid="ignore", divide="ignore"):
            x = newton_krylov(resid, alpha[free], f_tol=1e-3 * SINGULAR_BAND * scale, maxiter=max_steps)
    except (NoConvergence, ValueError, np.linalg.LinAlgError) as exc:
        x = exc.args[0] if isinstance(exc, NoConvergence) and exc.args else None
    if x is None or not np.all(np.isfinite(x)):
        return alpha, u, traj, adj, J, 1
    cand = base.copy()
    cand[free] = np.clip(x, 0.0, 1.0)
    u2, traj2, adj2, J2 = evaluate(cand)
    old = np.max(np.abs(adj.h1_mean[free]))
    new = np.max(np.abs(adj2.h1_mean[free]))
    steps = max(1, (evaluate.n_eval - before) // max(1, int(free.sum())))
    if J2 >= J - 1e-12 * (1 + abs(J)) and new < old:
        return cand, u2, traj2, adj2, J2, steps
    return alpha, u, traj, adj, J, steps


def maximum_condition_gap(result: SweepResult, p: ToyParams) -> np.ndarray:
    """Per interval: H(alpha) - max(H(0), H(1)) using interval means (<= 0 up to rounding)."""
    h1 = result.switching
    a = result.control.values
    return a * h1 - np.maximum(h1, 0.0)


@dataclass
class SteadyState:
    alpha: float
    e: float
    m: float
    mu: float


def steady_state_balance(p: ToyParams) -> SteadyState:
    """Balanced steady state on kappa_e*E = kappa_m*M.

    With ``z = kappa_e*E = kappa_m*M`` the two balances read
    ``alpha*nu_E = (mu+gamma_e)*E`` and ``(1-alpha)*nu_M = (mu+gamma_m)*M``;
    adding their normalized forms gives one scalar equation in z.
    """
    def parts(z):
        e, m = z / p.kappa_e, z / p.kappa_m
        mu = growth_rate(ToyState(e, m), p)
        nu_e, nu_m = p.fluxes(m)
        return (mu + p.gamma_e) * e, (mu + p.gamma_m) * m, nu_e, nu_m, e, m, mu

    def resid(z):
        a, b, nu_e, nu_m, *_ = parts(z)
        return a / nu_e + b / nu_m - 1.0

    if p.flux_mode == CONSTANT:
        if p.nu_e_const <= 0 or p.nu_m_const <= 0:
            raise SteadyStateError("both fluxes must be positive for a balanced steady state")
        lo, hi = 0.0, 1.0
        while resid(hi) < 0:
            lo, hi = hi, 2 * hi
            if hi > 1e12:
                raise SteadyStateError("balance equation has no root")
    else:
        if p.flux_coupling <= 0:
            raise SteadyStateError("flux_coupling must be positive")
        lo = 1e-300
        if resid(lo) >= 0:
            raise SteadyStateError("turnover outpaces synthesis: no positive steady state")
        hi = 1.0
        while resid(hi) < 0:
            lo, hi = hi, 2 * hi
            if hi > 1e12:
                raise SteadyStateError("balance equation has no root")
    z = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    a, b, nu_e, nu_m, e, m, mu = parts(z)
    wa, wb = a / nu_e, b / nu_m
    return SteadyState(alpha=wa / (wa + wb), e=e, m=m, mu=mu)


@dataclass
class EnvelopeReport:
    manifold_residual: float
    alpha_avg: float
    alpha_ss: float
    difference: float
    window: Tuple[float, float]
    n_samples: int

    def as_dict(self) -> Dict[str, float]:
        return dict(manifold_residual=self.manifold_residual, alpha_avg=self.alpha_avg,
                    alpha_ss=self.alpha_ss, difference=self.difference)


def envelope_check(result: SweepResult, p: ToyParams, window_fraction: float = 0.2) -> EnvelopeReport:
    tr = result.trajectory
    T = float(tr.times[-1])
    t0 = T * (1.0 - window_fraction)
    sel = tr.times >= t0 - 1e-12 * T
    if np.count_nonzero(sel) < 10:
        raise DegenerateWindowError(f"only {np.count_nonzero(sel)} samples in [{t0:g}, {T:g}]; need 10")
    t = tr.times[sel]
    a, b = p.kappa_e * tr.e[sel], p.kappa_m * tr.m[sel]
    denom = a + b
    resid = np.divide(np.abs(a - b), denom, out=np.zeros_like(denom), where=denom > 0)
    span = t[-1] - t[0]
    manifold = float(trapezoid(resid, t) / span) if span > 0 else float(resid.mean())
    u = result.control
    lo = np.clip(u.grid[:-1], t0, T)
    hi = np.clip(u.grid[1:], t0, T)
    alpha_avg = float(np.sum(u.values * (hi - lo)) / (T - t0))
    ss = steady_state_balance(p)
    return EnvelopeReport(manifold, alpha_avg, ss.alpha, abs(alpha_avg - ss.alpha), (t0, T), int(sel.sum()))
