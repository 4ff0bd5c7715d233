from dataclasses import replace
from functools import partial

import numpy as np
import pytest

from oracles import degenerate_extension, enumerate_vertices, two_witnesses
from rbadyn import data_file
from rbadyn.assembly import (EukaryoticExtension, TurnoverSpec, assemble_eukaryotic, assemble_prokaryotic,
                             assemble_turnover, build_turnover_matrices, load_turnover)
from rbadyn.growth import mu_max
from rbadyn.lp import check_point, solve
from rbadyn.model import InvariantViolation, build_model, load_model
from rbadyn.randmodels import random_model, random_turnover

TOY_MU_MAX = 0.15308994054794312

TWO_BY_TWO = """
[[metabolites]]
name = "a"
[[metabolites]]
name = "b"

[[reactions]]
name = "r"
stoichiometry = { a = -1.0, b = 1.0 }
catalysts = ["E"]
k_forward = 10.0

[[processes]]
name = "p"
efficiency = 5.0
machine = "R"

[[machines]]
name = "E"
kind = "enzyme"
synthesis_cost = { a = 2.0, b = 3.0 }
process_demand = { p = 4.0 }

[[machines]]
name = "R"
kind = "process-machine"
synthesis_cost = { a = 1.0 }
process_demand = { p = 6.0 }
"""


def _lp_equal(a, b):
    return all(np.array_equal(getattr(a, k), getattr(b, k))
               for k in ("a_eq", "b_eq", "a_ineq", "b_ineq", "lower", "upper"))


def test_zero_witness_at_mu_zero(toy_model):
    lp = assemble_prokaryotic(toy_model, 0.0)
    assert check_point(lp, np.zeros(lp.n)).passed
    assert solve(lp).feasible


def test_basal_density_violation_infeasible(toy_model):
    tight = replace(toy_model, d_bar=toy_model.d_bar * 0.0 + 1.0)
    assert not solve(assemble_prokaryotic(tight, 0.0)).feasible


def test_toy_feasibility_around_mu_max(toy_model):
    assert solve(assemble_prokaryotic(toy_model, TOY_MU_MAX / 2)).feasible
    assert not solve(assemble_prokaryotic(toy_model, 2 * TOY_MU_MAX)).feasible


def test_negative_mu_rejected(toy_model):
    with pytest.raises(ValueError):
        assemble_prokaryotic(toy_model, -0.1)


def test_row_names_and_order(toy_model):
    lp = assemble_prokaryotic(toy_model, 0.1)
    assert tuple(lp.eq_names) == ("I:carbon", "I:amino_acids", "I:energy")
    tags = [n.split(":")[0] for n in lp.ineq_names]
    assert tags == ["II"] + ["III+"] * 3 + ["III-"] * 3 + ["IV"] * 2
    assert lp.variable_names[:4] == ("Y:transporter", "Y:aa_enzyme", "Y:resp_enzyme", "Y:ribosome")


def test_affine_in_mu(toy_model):
    a, b, mid = (assemble_prokaryotic(toy_model, mu) for mu in (0.25, 0.75, 0.5))
    for k in ("a_eq", "b_eq", "a_ineq", "b_ineq"):
        assert np.array_equal(getattr(mid, k), 0.5 * (getattr(a, k) + getattr(b, k)))


def test_process_demand_grows_with_mu(toy_model):
    rng = np.random.default_rng(0)
    n_p = toy_model.dims.n_p
    for _ in range(20):
        x = np.concatenate([rng.uniform(0, 1, toy_model.dims.n_y), rng.normal(size=toy_model.dims.n_m)])
        lhs = [assemble_prokaryotic(toy_model, mu).a_ineq[:n_p] @ x for mu in (0.0, 0.1, 0.2)]
        assert np.all(np.diff(np.array(lhs), axis=0) >= 0)


def test_zero_turnover_is_identical(toy_model):
    t = TurnoverSpec.zeros(toy_model)
    for mu in (0.0, 0.05, 0.13):
        assert _lp_equal(assemble_turnover(toy_model, t, mu), assemble_prokaryotic(toy_model, mu))
    tm = build_turnover_matrices(toy_model, t)
    assert not any(np.any(getattr(tm, k)) for k in ("gamma_s_y", "gamma_s_b", "gamma_s_pg", "gamma_m_y", "gamma_m_pg"))


def test_zero_turnover_file(toy_model):
    t = load_turnover(data_file("zero_turnover"), toy_model)
    assert _lp_equal(assemble_turnover(toy_model, t, 0.1), assemble_prokaryotic(toy_model, 0.1))


def test_machine_turnover_product():
    model = build_model(load_model(TWO_BY_TWO))
    t = TurnoverSpec(np.zeros(2), np.array([0.0, 2.0]), np.zeros(0), np.zeros((2, 2)), np.zeros((2, 2)))
    tm = build_turnover_matrices(model, t)
    assert model.c_m_y[0, 1] == 6.0
    assert tm.gamma_m_y[0, 1] == 12.0
    assert tm.gamma_m_y[0, 0] == 0.0


def test_hand_assembled_turnover():
    model = build_model(load_model(TWO_BY_TWO))
    release = np.array([[1.5, 0.0], [0.0, 0.0]])
    atp = np.array([[0.0, 0.0], [0.5, 0.0]])
    t = TurnoverSpec(np.zeros(2), np.array([0.5, 0.0]), np.zeros(0), release, atp)
    # enzyme E costs (2 a, 3 b); degradation returns 1.5 a and burns 0.5 b
    expected = np.array([[-0.25, 0.0], [-1.75, 0.0]])
    assert np.allclose(build_turnover_matrices(model, t).gamma_s_y, expected, rtol=0, atol=1e-15)
    mu = 0.1
    lp = assemble_turnover(model, t, mu)
    assert np.allclose(lp.a_eq[:, :2], mu * model.c_s_y + expected, rtol=0, atol=1e-15)
    assert np.array_equal(lp.a_eq[:, 2:], model.omega)


def test_turnover_zero_witness_at_mu_zero(toy_model):
    # zero witness needs the fixed-species demands to vanish
    t = load_turnover(data_file("toy_prokaryote_turnover"), toy_model)
    lp = assemble_turnover(replace(toy_model, p_g=np.zeros_like(toy_model.p_g)), t, 0.0)
    assert check_point(lp, np.zeros(lp.n)).passed
    assert not check_point(assemble_turnover(toy_model, t, 0.0), np.zeros(lp.n)).passed


def test_turnover_lowers_growth(toy_model):
    t = load_turnover(data_file("toy_prokaryote_turnover"), toy_model)
    with_t = mu_max(partial(assemble_turnover, toy_model, t)).mu_max
    assert with_t < TOY_MU_MAX
    assert with_t == pytest.approx(0.13874, abs=1e-5)


def test_negative_turnover_rejected(toy_model):
    with pytest.raises(InvariantViolation):
        TurnoverSpec(np.zeros(3), -np.ones(4), np.zeros(1), np.zeros((3, 4)), np.zeros((3, 4)))


@pytest.mark.parametrize("seed", range(8))
def test_convex_midpoints(seed):
    rng = np.random.default_rng(seed)
    model = random_model(seed)
    t = random_turnover(model, seed)
    mu = 0.5 * mu_max(partial(assemble_prokaryotic, model)).mu_max
    mu_t = 0.5 * mu_max(partial(assemble_turnover, model, t)).mu_max
    for lp in (assemble_prokaryotic(model, mu), assemble_turnover(model, t, mu_t),
               assemble_eukaryotic(model, degenerate_extension(model), mu)):
        w = two_witnesses(lp, rng)
        assert w is not None
        for lam in (0.25, 0.5, 0.75):
            assert check_point(lp, lam * w[0] + (1 - lam) * w[1]).passed


def test_degenerate_extension_matches_plain(toy_model):
    ext = degenerate_extension(toy_model)
    for mu in np.linspace(0.0, 2 * TOY_MU_MAX, 9):
        lp_e = assemble_eukaryotic(toy_model, ext, mu)
        lp_p = assemble_prokaryotic(toy_model, mu)
        r_e, r_p = solve(lp_e), solve(lp_p)
        assert r_e.status == r_p.status
        if r_e.feasible:
            assert check_point(lp_p, r_e.witness[:lp_p.n]).passed


def _fraction_block_ext(model, f_lower):
    # cytosol + two organelle volumes sum to one; only the bounds bite
    nf = 4
    c_f_f = np.array([[1.0, 1.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    z = lambda rows, cols: np.zeros((rows, cols))
    return EukaryoticExtension(
        n_com=2, interfaces=((1, 2),), c_s_f=z(model.dims.n_s, nf), b_hat=np.zeros(nf),
        c_d_iq_y=z(0, model.dims.n_y), c_d_iq_g=z(0, model.dims.n_g), c_d_iq_f=z(0, nf),
        c_d_eq_y=z(0, model.dims.n_y), c_d_eq_g=z(0, model.dims.n_g), c_d_eq_f=z(0, nf),
        c_f_f=c_f_f, c_bar=np.array([1.0, 0.2]), f_lower=np.asarray(f_lower), f_upper=np.ones(3))


@pytest.mark.parametrize("f_lower, feasible", [([0.5, 0.3, 0.3], False), ([0.4, 0.3, 0.3], True),
                                               ([0.0, 0.6, 0.6], False), ([0.2, 0.2, 0.2], True)])
def test_fraction_lower_bounds(toy_model, f_lower, feasible):
    ext = _fraction_block_ext(toy_model, f_lower)
    # brute-force the fraction block on its own (Y = 0, nu = 0 at mu = 0)
    verts = enumerate_vertices(ext.c_f_f, ext.c_bar, np.vstack([ext.i_v, -ext.i_v]),
                               np.concatenate([ext.f_upper, -ext.f_lower]), np.zeros(4), np.full(4, np.inf))
    assert (verts.shape[0] > 0) == feasible
    assert solve(assemble_eukaryotic(toy_model, ext, 0.0)).feasible == feasible


def test_toy_eukaryote_feasible_at_zero(euk):
    _, model, ext = euk
    res = solve(assemble_eukaryotic(model, ext, 0.0))
    assert res.feasible


def test_toy_eukaryote_witness_structure(euk):
    _, model, ext = euk
    nf = ext.n_frac
    for mu in (0.0, 0.05, 0.1, 0.15):
        lp = assemble_eukaryotic(model, ext, mu)
        res = solve(lp.with_objective(np.r_[np.zeros(lp.n - nf), np.ones(nf)]))
        assert res.feasible
        f = res.witness[-nf:]
        assert np.max(np.abs(ext.c_f_f @ f - ext.c_bar)) <= 1e-9
        fv = ext.i_v @ f
        assert np.all(fv >= ext.f_lower - 1e-9) and np.all(fv <= ext.f_upper + 1e-9)


def test_eukaryote_rows(euk):
    _, model, ext = euk
    lp = assemble_eukaryotic(model, ext, 0.1)
    tags = [n.split(":")[0] for n in lp.eq_names]
    assert tags == ["I"] * 4 + ["V"] + ["VI"] * 3
    assert [n for n in lp.ineq_names if n.startswith("VII+")] == ["VII+:cytosol", "VII+:ims", "VII+:matrix"]


def test_extension_invariants(toy_model):
    with pytest.raises(InvariantViolation):
        _fraction_block_ext(toy_model, [0.5, 1.5, 0.0])
    ext = degenerate_extension(toy_model)
    with pytest.raises(InvariantViolation):
        replace(ext, n_com=1, f_lower=np.zeros(2), f_upper=np.ones(2), interfaces=())
