from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from hardy_adams import inequalities as ineq
from hardy_adams.concentration import moser_function
from hardy_adams.corpus import admissible_corpus, function_corpus, is_admissible
from hardy_adams.radial import Dimension, LogRadialFunction, PiecewiseLinear, h_norm, hardy_gradient_norm, l2_norm


@pytest.mark.parametrize("eps", [0.05, 0.2, 0.5, 1.0, 3.0])
def test_c_eps_is_smallest_constant(eps):
    s = np.linspace(0.0, 4.0 / eps ** 2, 400_001)
    need = (1 + np.sqrt(s)) ** 2 - (1 + eps) * s
    C = ineq.c_eps(eps)
    assert np.max(need) <= C * (1 + 1e-12)
    assert math.isclose(np.max(need), C, rel_tol=1e-6)
    assert np.all(1 + np.sqrt(s) <= np.sqrt((1 + eps) * s + C) * (1 + 1e-14))


def test_m_is_smallest_constant():
    x = np.linspace(1e-9, 1.0, 1_000_001)
    ratio = np.expm1(x) / x
    assert math.isclose(np.max(ratio), ineq.M_CONST, rel_tol=1e-12)
    assert np.all(np.expm1(x) <= ineq.M_CONST * x * (1 + 1e-15))


def test_c_beta_definition():
    b, e = 0.3, 0.5
    assert ineq.c_beta(b, e) == max(ineq.M_CONST * b, math.exp(b * (1 + 1 / e)) / (1 - b * 1.5))
    with pytest.raises(ValueError):
        ineq.c_eps(0.0)


# --------------------------------------------------------------------------
# supremum probe


def _adams_corpus(d, seed=0):
    return function_corpus(d, 20, seed=seed) + [ineq.normalized_moser(d, k) for k in (1, 2, 5, 10, 15, 20)]


def test_adams_sup_finite_at_gamma_N_and_monotone(d2):
    corpus = _adams_corpus(d2)
    at = ineq.adams_sup_probe(corpus, d2.gamma, d2)
    half = ineq.adams_sup_probe(corpus, 0.5 * d2.gamma, d2)
    assert at.passed and math.isfinite(at.summary["max_value"])
    assert half.summary["max_value"] < at.summary["max_value"]
    assert "sharpness" not in at.fits


def test_adams_divergence_above_gamma_N(d2):
    vals = [ineq.adams_sup_probe([ineq.normalized_moser(d2, k)], 1.2 * d2.gamma, d2, moser_ks=[10, 11])
            .summary["max_value"] for k in (5, 10, 15)]
    assert all(b >= 10 * a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("factor", [1.1, 1.2, 1.5])
def test_sharpness_slope(N, factor):
    d = Dimension(N)
    rows, fit = ineq.sharpness_fit(d, factor * d.gamma, range(10, 26))
    assert fit["rel_error"] <= 0.05
    assert len(rows) == 16 and not any(r["overflow"] for r in rows)


def test_sharpness_failure_is_reported(d2):
    rep = ineq.adams_sup_probe([], 1.2 * d2.gamma, d2, moser_ks=range(10, 26), slope_tol=1e-6)
    assert not rep.passed and rep.failures[0]["reason"] == "sharpness slope off"


def test_adams_renormalises_large_members(d2):
    f = moser_function(d2, 3).scaled(5.0)
    rep = ineq.adams_sup_probe([f], d2.gamma, d2)
    row = rep.rows[0]
    assert row["renormalized"] and row["h_norm_in"] > 1


# --------------------------------------------------------------------------
# exterior bound and auxiliary function


def test_exterior_zero_outside_support(d2):
    f = ineq.normalized_moser(d2, 5)
    rep = ineq.exterior_series_bound(f, 1.0)
    assert rep.summary["I2"] == 0.0 and rep.passed


def test_exterior_corpus_with_admissible_radius(d2):
    r0 = 1.05 * ineq.admissible_radius(d2)
    for f in admissible_corpus(d2, 20, seed=3):
        g = f.scaled(1.0 / max(1.0, h_norm(f).h_norm))
        rep = ineq.exterior_series_bound(g, r0)
        assert rep.passed and rep.summary["admissible_r0"]
        assert rep.summary["I2"] <= rep.summary["uniform_bound"]


def test_exterior_preconditions(d2):
    big = moser_function(d2, 2).scaled(3.0)
    with pytest.raises(ineq.PreconditionError):
        ineq.exterior_series_bound(big, 1.0)
    with pytest.raises(ineq.PreconditionError):
        ineq.exterior_series_bound(ineq.normalized_moser(d2, 2), 0.0)


def test_admissible_radius_boundary(d2):
    r = ineq.admissible_radius(d2)
    assert math.isclose(math.pi ** 2 * r ** 3, 1.0, rel_tol=1e-14)


def test_auxiliary_when_u_vanishes_at_r0(d2):
    f = ineq.normalized_moser(d2, 5)
    w, rep = ineq.auxiliary_w_transform(f, 1.0)
    c = rep.summary["c"]
    assert c >= 1
    np.testing.assert_allclose(w.values, c * f.values, rtol=1e-15)
    assert rep.passed and rep.summary["hardy_w"] <= 1


def test_auxiliary_interior_cut(d2):
    f = LogRadialFunction(d2, [-1.0, 0.5, 3.0], [0.0, 0.4, 0.9])
    f = f.scaled(0.9 / h_norm(f).h_norm)
    w, rep = ineq.auxiliary_w_transform(f, 1.0)
    assert w.breakpoints[0] == 0.0 and w.values[0] == 0.0
    assert rep.passed and rep.summary["min_domination_slack"] >= 0


def test_auxiliary_admissibility_error(d2):
    with pytest.raises(ineq.AdmissibilityError, match="admissibility"):
        ineq.auxiliary_w_transform(ineq.normalized_moser(d2, 5), 0.1)
    with pytest.raises(ineq.PreconditionError):
        ineq.auxiliary_w_transform(moser_function(d2, 2).scaled(3.0), 1.0)


# --------------------------------------------------------------------------
# change of variables


def test_ball_to_2d_zero(d2):
    rep = ineq.ball_to_2d_reduction(LogRadialFunction.zero(d2))
    row = rep.rows[0]
    assert rep.passed
    assert math.isclose(row["log_measure_left"], row["log_measure_right"], rel_tol=1e-14)
    assert math.isclose(math.exp(row["log_measure_left"]), d2.ball_volume, rel_tol=1e-13)


@pytest.mark.parametrize("N", [2, 3])
def test_ball_to_2d_moser(N):
    rep = ineq.ball_to_2d_reduction(moser_function(N, 3), R=1.0, tol=1e-8)
    assert rep.passed and rep.summary["max_rel_gap"] <= 1e-8


def test_ball_to_2d_support_precondition(d2):
    f = LogRadialFunction(d2, [-1.0, 1.0], [0.0, 1.0])
    with pytest.raises(ineq.PreconditionError):
        ineq.ball_to_2d_reduction(f, R=1.0)


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("k", [2, 10, 40])
def test_half_log_moser_identities(N, k):
    f = moser_function(N, k)
    w, rep = ineq.half_log_transform(f)
    assert math.isclose(math.sqrt(w.derivative_sq_integral()), math.sqrt(N), rel_tol=1e-14)
    assert rep.passed and rep.summary["max_rel_gap"] <= 1e-10
    # independent route for the weighted L2 identity: scipy quad directly on w
    edges = list(w.breakpoints)
    quad = sum(integrate.quad(lambda t: float(w(t)) ** 2 * math.exp(-N * t), a, b, epsrel=1e-13)[0]
               for a, b in zip(edges[:-1], edges[1:]))
    quad += float(w.values[-1]) ** 2 * math.exp(-N * edges[-1]) / N
    assert math.isclose(quad, 4 * N * l2_norm(f) ** 2, rel_tol=1e-10)


def test_half_log_rejects_inadmissible(d2):
    with pytest.raises(ineq.AdmissibilityError, match="nonnegative"):
        ineq.half_log_transform(moser_function(d2, 3).scaled(-1.0))


def test_one_d_zero_and_moser(d2):
    z = PiecewiseLinear([0.0, 1.0], [0.0, 0.0])
    rep = ineq.one_d_reduced_check(z, 0.5, 0.5, 2)
    assert rep.summary["lhs"] == 0.0 and rep.summary["bound"] == 0.0 and rep.passed
    w, _ = ineq.half_log_transform(moser_function(d2, 10))
    rep = ineq.one_d_reduced_check(w, 0.5, 0.5, 2)
    assert rep.passed and rep.summary["margin"] > 0
    assert rep.rows[0]["I1"] <= rep.rows[0]["I1_bound"] and rep.rows[0]["I2"] <= rep.rows[0]["I2_bound"]


@pytest.mark.parametrize("beta,eps", [(0.99, 0.5), (0.7, 0.5), (0.0, 0.2), (1.2, 0.1), (0.5, 0.0)])
def test_one_d_preconditions(d2, beta, eps):
    w, _ = ineq.half_log_transform(moser_function(d2, 10))
    with pytest.raises(ineq.PreconditionError):
        ineq.one_d_reduced_check(w, beta, eps, 2)


@pytest.mark.parametrize("w", [PiecewiseLinear([0.0, 1.0, 2.0], [0.0, 1.0, 0.5]),
                               PiecewiseLinear([0.0, 1.0], [1.0, 1.0]),
                               PiecewiseLinear([0.0, 0.1], [0.0, 5.0])])
def test_one_d_shape_preconditions(w):
    with pytest.raises(ineq.PreconditionError):
        ineq.one_d_reduced_check(w, 0.3, 0.5, 2)


# --------------------------------------------------------------------------
# ratio probe


def test_adachi_below_gamma_N(d2):
    rep = ineq.adachi_ratio_probe([], 0.9 * d2.gamma, d2, moser_ks=(5, 10, 20, 40))
    ratios = [r["ratio"] for r in rep.rows]
    assert rep.summary["moser_ratio_decreasing"]
    # e^x - 1 >= x bounds the ratio below by gamma
    assert all(r >= 0.9 * d2.gamma for r in ratios)


@pytest.mark.xfail(strict=True, reason="literal example; the ratio decreases toward gamma, not 0, see ledger")
def test_adachi_ratio_tends_to_zero(d2):
    rep = ineq.adachi_ratio_probe([], 0.9 * d2.gamma, d2, moser_ks=(5, 10, 20, 40))
    assert rep.rows[-1]["ratio"] < 1.0


def test_adachi_at_gamma_N(d2):
    rep = ineq.adachi_ratio_probe(admissible_corpus(d2, 5, seed=1), d2.gamma, d2)
    assert rep.passed and rep.summary["moser_ratio_increasing"]
    for r in rep.rows:
        if r["series"] == "moser":
            assert r["functional"] >= r["floor"]


def test_adachi_skips_zero_and_inadmissible(d2):
    corpus = [LogRadialFunction.zero(d2), moser_function(d2, 3).scaled(-1.0), moser_function(d2, 3)]
    rep = ineq.adachi_ratio_probe(corpus, 0.5 * d2.gamma, d2, moser_ks=(5,))
    assert rep.summary["skipped"] == 2
    assert any("zero function" in n for n in rep.notices)


@pytest.mark.parametrize("f,why", [
    (LogRadialFunction(2, [0.0, 1.0, 2.0], [0.0, 0.5, 0.2]), "nonincreasing"),
    (LogRadialFunction(2, [0.0, 1.0], [0.3, 0.3]), "continuous"),
    (LogRadialFunction(2, [0.0, 0.01], [0.0, 1.0]), "hardy"),
])
def test_is_admissible_reasons(f, why):
    ok, reason = is_admissible(f)
    assert not ok and why in reason


def test_admissible_corpus_members():
    for f in admissible_corpus(2, 30, seed=9):
        assert is_admissible(f)[0]
        assert 0.3 <= hardy_gradient_norm(f) <= 1.0 + 1e-12


def test_probe_report_csv_and_witness(d2):
    rep = ineq.ProbeReport("x", {})
    rep.rows.append({"a": 1.0, "b": True})
    rep.fail("boom", moser_function(d2, 2), value=3.0)
    assert rep.to_csv().splitlines() == ["a,b", "1,true"]
    assert rep.failures[0]["witness"].startswith("# LogRadialFunction N=2")
    assert not rep.passed
