"""Brute-force reference computations used only by the test-suite."""
from __future__ import annotations

import itertools
import warnings

import numpy as np


def random_lp_data(rng: np.random.Generator, max_total: int = 14):
    """Random small LP with x >= 0 (so a nonempty feasible set has a vertex).

    Roughly half of the instances are infeasible: the right-hand side is
    built from a nonnegative point and then perturbed.
    """
    n = int(rng.integers(2, 7))
    m_total = int(rng.integers(1, max_total - n + 1))
    m_eq = int(rng.integers(0, min(2, m_total, n - 1) + 1))
    m_ineq = m_total - m_eq
    a_eq = rng.integers(-3, 4, size=(m_eq, n)).astype(float)
    a_ineq = rng.integers(-3, 4, size=(m_ineq, n)).astype(float)
    x0 = rng.uniform(0.0, 2.0, size=n)
    b_eq = a_eq @ x0 + (rng.normal(0.0, 2.0, m_eq) if rng.random() < 0.4 else 0.0)
    b_ineq = a_ineq @ x0 + rng.normal(0.0, 2.0, m_ineq) - (rng.random() < 0.5) * 2.0
    lower = np.zeros(n)
    upper = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 3.0, n), np.inf)
    objective = rng.integers(-2, 3, size=n).astype(float)
    return dict(a_eq=a_eq, b_eq=b_eq, a_ineq=a_ineq, b_ineq=b_ineq,
                lower=lower, upper=upper, objective=objective)


def enumerate_vertices(a_eq, b_eq, a_ineq, b_ineq, lower, upper, tol=1e-7):
    """All feasible basic solutions, by solving every square active set.

    Assumes the feasible set is pointed (every variable has a finite lower
    bound) so that it is nonempty iff at least one vertex exists.
    """
    n = len(lower)
    rows = [np.asarray(a_ineq, float).reshape(-1, n)]
    rhs = [np.asarray(b_ineq, float).reshape(-1)]
    for j in range(n):
        if np.isfinite(lower[j]):
            e = np.zeros(n)
            e[j] = -1.0
            rows.append(e[None, :])
            rhs.append(np.array([-lower[j]]))
        if np.isfinite(upper[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e[None, :])
            rhs.append(np.array([upper[j]]))
    G = np.vstack(rows)
    h = np.concatenate(rhs)
    E = np.asarray(a_eq, float).reshape(-1, n)
    e = np.asarray(b_eq, float).reshape(-1)
    k = n - E.shape[0]
    if k < 0:
        k = 0
    subsets = np.array(list(itertools.combinations(range(G.shape[0]), k)), dtype=int).reshape(-1, k)
    if subsets.shape[0] == 0:
        return np.zeros((0, n))
    M = np.concatenate([np.broadcast_to(E, (subsets.shape[0],) + E.shape), G[subsets]], axis=1)
    r = np.concatenate([np.broadcast_to(e, (subsets.shape[0], e.shape[0])), h[subsets]], axis=1)
    if M.shape[1] != n:
        # more equalities than variables: only least-squares candidates
        sol = np.linalg.lstsq(E, e, rcond=None)[0][None, :]
    else:
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-9
        if not ok.any():
            return np.zeros((0, n))
        sol = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
    feas = np.ones(sol.shape[0], dtype=bool)
    if E.shape[0]:
        feas &= np.all(np.abs(sol @ E.T - e) <= tol * (1 + np.abs(e)), axis=1)
    feas &= np.all(sol @ G.T - h <= tol * (1 + np.abs(h)), axis=1)
    return sol[feas]


def oracle_status(data) -> bool:
    verts = enumerate_vertices(data["a_eq"], data["b_eq"], data["a_ineq"], data["b_ineq"],
                               data["lower"], data["upper"])
    return verts.shape[0] > 0


def grid_scan_mu_max(builder, mu_hi: float, step: float = 1e-4, solver=None):
    """Last feasible grid point of a plain scan over [0, mu_hi]."""
    from rbadyn.lp import solve
    solver = solver or solve
    last = None
    k = 0
    while k * step <= mu_hi + 1e-15:
        mu = k * step
        if solver(builder(mu)).feasible:
            last = mu
        k += 1
    return last


def degenerate_extension(model):
    """Two organelle fractions and one interface, all uncoupled; only the
    cytosol fraction is pinned to 1.  Feasibility must equal the plain problem."""
    from rbadyn.assembly import EukaryoticExtension
    d = model.dims
    nf = 4
    c_f_f = np.zeros((1, nf))
    c_f_f[0, 0] = 1.0
    z = lambda rows, cols: np.zeros((rows, cols))
    return EukaryoticExtension(
        n_com=2, interfaces=((0, 1),), c_s_f=z(d.n_s, nf), b_hat=np.zeros(nf),
        c_d_iq_y=z(0, d.n_y), c_d_iq_g=z(0, d.n_g), c_d_iq_f=z(0, nf),
        c_d_eq_y=z(0, d.n_y), c_d_eq_g=z(0, d.n_g), c_d_eq_f=z(0, nf),
        c_f_f=c_f_f, c_bar=np.ones(1), f_lower=np.zeros(3), f_upper=np.ones(3))


def two_witnesses(lp, rng, attempts=5):
    """Solutions of ``lp`` under random objectives, retried until they differ.

    Returns None if infeasible; the last pair if every attempt coincides
    (the polytope may be a single point)."""
    from rbadyn.lp import solve
    pair = None
    for _ in range(attempts):
        pair = []
        for _ in range(2):
            res = solve(lp.with_objective(rng.normal(size=lp.n)))
            if not res.feasible:
                return None
            pair.append(res.witness)
        if not np.allclose(pair[0], pair[1]):
            break
    return pair


def steady_state_at(alpha, p, guess=(0.5, 0.5)):
    """Positive rest point of the toy dynamics under a constant control."""
    from scipy.optimize import fsolve
    from rbadyn.dynamics import ToyState, rhs

    def f(x):
        return rhs(ToyState(abs(x[0]), abs(x[1])), alpha, p)

    with warnings.catch_warnings():
        # fsolve complains once it hits rounding level; the residual check below decides
        warnings.simplefilter("ignore", RuntimeWarning)
        x = fsolve(f, guess, xtol=1e-13)
    assert np.max(np.abs(f(x))) <= 1e-12
    return abs(x[0]), abs(x[1])


def steady_state_alpha_scan(p, step=1e-3, tol=1e-10):
    """Allocation whose rest point lies on kappa_e*E = kappa_m*M.

    Scans a uniform alpha grid for the sign change of the manifold residual,
    then narrows the bracketing cell by bisection."""
    def resid(alpha, guess):
        e, m = steady_state_at(alpha, p, guess)
        return p.kappa_e * e - p.kappa_m * m, (e, m)

    grid = np.arange(step, 1.0, step)
    guess = (0.5, 0.5)
    prev = None
    for a in grid:
        r, guess = resid(a, guess)
        if prev is not None and prev[1] < 0 <= r:
            lo, hi, g = prev[0], a, guess
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                rm, g = resid(mid, g)
                lo, hi = (mid, hi) if rm < 0 else (lo, mid)
            return 0.5 * (lo + hi)
        prev = (a, r)
    raise AssertionError("manifold residual never changes sign")
