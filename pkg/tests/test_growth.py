import time
from dataclasses import replace
from functools import partial

import numpy as np
import pytest

from oracles import grid_scan_mu_max
from rbadyn.assembly import assemble_prokaryotic
from rbadyn.growth import BASAL_INADMISSIBLE, NoFiniteBracketError, feasibility_profile, mu_max
from rbadyn.lp import check_point, solve
from rbadyn.randmodels import process_rate_bound, random_model

TOY_MU_MAX = 0.15308994054794312


def test_inadmissible_basal_flag():
    model = random_model(3, admissible=False)
    res = mu_max(partial(assemble_prokaryotic, model))
    assert res.status == BASAL_INADMISSIBLE and res.basal_inadmissible
    assert res.mu_max == 0.0 and res.witness_at_mu_max is None


def test_toy_matches_grid_scan(toy_builder):
    res = mu_max(toy_builder)
    assert res.mu_max == pytest.approx(TOY_MU_MAX, abs=1e-12)
    oracle = grid_scan_mu_max(toy_builder, 0.2)
    assert abs(res.mu_max - oracle) <= 1e-4 + 1e-8


def test_bracket_and_witness(toy_builder):
    res = mu_max(toy_builder, tol=1e-6)
    lo, hi = res.bracket
    assert lo == res.mu_max and 0 < hi - lo <= 1e-6
    assert check_point(toy_builder(lo), res.witness_at_mu_max).passed
    assert not solve(toy_builder(hi)).feasible


def test_faster_catalysis_never_slows_growth(toy_model):
    base = mu_max(partial(assemble_prokaryotic, toy_model)).mu_max
    fast = replace(toy_model, k_t=2 * toy_model.k_t, k_e=2 * toy_model.k_e,
                   k_e_backward=2 * toy_model.k_e_backward if toy_model.k_e_backward is not None else None)
    assert mu_max(partial(assemble_prokaryotic, fast)).mu_max >= base - 1e-8


def test_below_process_bound():
    for seed in range(20):
        model = random_model(seed)
        assert mu_max(partial(assemble_prokaryotic, model)).mu_max <= process_rate_bound(model) + 1e-8


def test_profile_is_monotone(toy_builder):
    mus = np.linspace(0.0, 0.3, 31)
    prof = feasibility_profile(toy_builder, mus)
    assert prof.statuses[0] == "feasible"
    assert prof.monotone and prof.first_violation is None
    flips = [i for i, s in enumerate(prof.statuses) if s == "infeasible"]
    assert mus[flips[0] - 1] <= TOY_MU_MAX < mus[flips[0]]


def test_profile_workers_agree(toy_builder):
    mus = np.linspace(0.0, 0.3, 13)
    assert feasibility_profile(toy_builder, mus).statuses == feasibility_profile(toy_builder, mus, workers=4).statuses


def test_profile_detects_break():
    statuses = iter(["feasible", "infeasible", "feasible"])

    class Fake:
        def __init__(self, s):
            self.status = s

    prof = feasibility_profile(lambda mu: mu, [0.0, 1.0, 2.0], solver=lambda lp: Fake(next(statuses)))
    assert prof.first_violation == 2 and not prof.monotone


def test_empty_profile(toy_builder):
    prof = feasibility_profile(toy_builder, [])
    assert len(prof) == 0 and prof.monotone


def test_profile_requires_sorted(toy_builder):
    with pytest.raises(ValueError):
        feasibility_profile(toy_builder, [0.2, 0.1])


def test_no_finite_bracket(toy_model):
    # nothing costs anything to make: every growth rate is feasible
    free = replace(toy_model, c_s_y=0 * toy_model.c_s_y, c_m_y=0 * toy_model.c_m_y,
                   c_s_g=0 * toy_model.c_s_g, c_m_g=0 * toy_model.c_m_g)
    with pytest.raises(NoFiniteBracketError):
        mu_max(partial(assemble_prokaryotic, free))


def test_bad_tolerance(toy_builder):
    with pytest.raises(ValueError):
        mu_max(toy_builder, tol=0.0)


def test_bisection_speed():
    model = random_model(11)
    t0 = time.perf_counter()
    mu_max(partial(assemble_prokaryotic, model))
    assert time.perf_counter() - t0 < 1.0
