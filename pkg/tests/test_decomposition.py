from __future__ import annotations

import math

import numpy as np
import pytest

from hardy_adams.concentration import concentrate, moser_function, moser_profile, profile_l2_distance, triangle_profile
from hardy_adams.decomposition import (
    ExtractionConfig,
    SequenceFamily,
    decompose,
    estimate_A,
    extract_profile,
    extract_scale,
    hypotheses_check,
    limit_proxy,
    subtract_level,
)
from hardy_adams.fixtures import builtin_manifest, load_manifest, moser_family, two_level_family
from hardy_adams.orlicz import orlicz_norm
from hardy_adams.radial import LogRadialFunction, PiecewiseLinear, hardy_gradient_norm, l2_norm
from hardy_adams.report import canonical_json

ZERO = PiecewiseLinear([0.0, 1.0], [0.0, 0.0])


def _rel_l2(psi, ref, y_max=4.0):
    return profile_l2_distance(psi, ref, y_max) / profile_l2_distance(ref, ZERO, y_max)


@pytest.fixture(scope="module")
def moser40():
    return moser_family(2, 40)


@pytest.fixture(scope="module")
def two_level():
    fam, overrides, planted = load_manifest(builtin_manifest("two_level"))
    return fam, ExtractionConfig(**overrides), planted


# --------------------------------------------------------------------------
# limit proxy


def test_limit_proxy_geometric_series():
    x = [3.0 + 2.0 * 0.5 ** n for n in range(6)]
    lim, info = limit_proxy(x, "richardson")
    assert math.isclose(lim, 3.0, rel_tol=1e-14) and info["rule"] == "richardson"
    vec = np.array([[1.0 + 0.25 ** n, -2.0 + 4 * 0.25 ** n] for n in range(5)])
    lim, _ = limit_proxy(vec, "richardson")
    np.testing.assert_allclose(lim, [1.0, -2.0], rtol=1e-13)


@pytest.mark.parametrize("series,why", [([1.0, 2.0], "fewer"), ([1.0, 1.0, 1.0], "converged"),
                                        ([1.0, 2.0, 4.0], "not contracting"), ([1.0, 1.0, 2.0], "zero second")])
def test_limit_proxy_fallbacks(series, why):
    lim, info = limit_proxy(series, "richardson")
    assert lim == series[-1] and info["rule"] == "last" and why in info["fallback"]


def test_limit_proxy_rule_validation():
    assert limit_proxy([1.0, 2.0], "last")[0] == 2.0
    with pytest.raises(ValueError):
        limit_proxy([1.0], "median")


@pytest.mark.parametrize("kwargs", [{"a_rule": "max"}, {"limit_rule": "mean"}, {"stop_eps": 0.0},
                                    {"max_levels": 0}, {"threshold": -1.0}, {"argmax_slack": -1.0},
                                    {"y_grid": (0.5, 1.0)}, {"y_grid": (0.0, 1.0, 1.0)}, {"stop_eps_rel": 0.0}])
def test_extraction_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExtractionConfig(**kwargs)


def test_family_validation(d2):
    f = moser_function(d2, 2)
    with pytest.raises(ValueError):
        SequenceFamily(d2, [2, 1], [f, f])
    with pytest.raises(ValueError):
        SequenceFamily(d2, [1], [f, f])
    with pytest.raises(ValueError):
        SequenceFamily(d2, [1], [moser_function(3, 2)])
    with pytest.raises(ValueError):
        SequenceFamily(d2, [1], [f], h_bound=0.5)
    with pytest.raises(ValueError):
        SequenceFamily(d2, [1], [LogRadialFunction(d2, [0.0, 1.0], [1.0, 1.0])])


# --------------------------------------------------------------------------
# hypotheses and A


def test_hypotheses_moser(moser40):
    hyp = hypotheses_check(moser40)
    assert hyp["passed"]
    assert all(all(x == 0.0 for x in t) for t in hyp["tail_mass"])
    assert all(x == 0.0 for x in hyp["sup_left"])


def test_hypotheses_bump_counterexample(d2):
    idx = [2, 4, 8, 16, 32]
    fs = []
    for n in idx:
        s = -math.log(n)
        fs.append(moser_function(d2, n) + LogRadialFunction(d2, [s - 0.1, s, s + 0.1], [0.0, 0.05, 0.0]))
    hyp = hypotheses_check(SequenceFamily(d2, idx, fs))
    assert not hyp["verdicts"]["tail"] and not hyp["passed"]
    res = decompose(SequenceFamily(d2, idx, fs))
    assert not res.levels and res.stop_cause == "hypotheses failed" and res.diagnostics


def test_estimate_A_moser(moser40, d2):
    A = estimate_A(moser40)
    assert abs(A - 1 / math.sqrt(d2.gamma)) * math.sqrt(d2.gamma) <= 0.05
    A_tail, info = estimate_A(moser40, rule="tail_max", full_output=True)
    assert A_tail == max(info["series"][len(info["series"]) // 2:]) and A_tail >= A


def test_estimate_A_zero_and_homogeneity(d2, moser40):
    zeros = SequenceFamily(d2, [1, 2, 3], [LogRadialFunction.zero(d2)] * 3)
    assert estimate_A(zeros) == 0.0
    scaled = moser40.with_functions([f.scaled(2.5) for f in moser40.functions])
    assert math.isclose(estimate_A(scaled), 2.5 * estimate_A(moser40), rel_tol=1e-9)


# --------------------------------------------------------------------------
# scales and profiles


def test_extract_scale_moser(moser40, d2):
    sc = extract_scale(moser40, 1 / math.sqrt(d2.gamma))
    assert sc["scales"] == {n: float(n) for n in moser40.indices}
    assert all(w.lower_ok and w.upper_ok for w in sc["witnesses"].values())


def test_extract_scale_squares(d2):
    idx = list(range(2, 9))
    fam = SequenceFamily(d2, idx, [moser_function(d2, n * n) for n in idx])
    sc = extract_scale(fam, 1 / math.sqrt(d2.gamma))
    assert sc["scales"] == {n: float(n * n) for n in idx}


def test_extract_scale_rejects_nonpositive_A(moser40):
    with pytest.raises(ValueError):
        extract_scale(moser40, 0.0)


def test_extract_profile_moser_exact(moser40):
    A = estimate_A(moser40)
    cfg = ExtractionConfig()
    sc = extract_scale(moser40, A)
    est = extract_profile(moser40, sc["scales"], cfg, A)
    np.testing.assert_allclose(est.raw, np.tile(moser_profile()(np.array(cfg.y_grid)), (len(moser40), 1)),
                               atol=1e-15)
    assert _rel_l2(est.profile, moser_profile()) <= 1e-14
    assert not est.flagged


def test_planted_triangle_eight_indices(d2):
    idx = [2 ** j for j in range(1, 9)]
    fam = SequenceFamily(d2, idx, [concentrate(triangle_profile(), n, d2) for n in idx])
    res = decompose(fam)
    assert len(res.levels) == 1
    assert _rel_l2(res.levels[0].profile, triangle_profile()) <= 0.05


def test_clamped_negative_mass_decreases(d2):
    # a fixed piece on s < 0 rescales to a vanishing negative-y mass
    idx = [4, 8, 16, 32, 64]
    bump = LogRadialFunction(d2, [-1.0, -0.5, 0.0], [0.0, 0.02, 0.0])
    fam = SequenceFamily(d2, idx, [moser_function(d2, n) + bump for n in idx])
    A = estimate_A(fam)
    sc = extract_scale(fam, A)
    est = extract_profile(fam, sc["scales"], ExtractionConfig(), A)
    mass = est.clamped_mass
    assert all(0 < b < a for a, b in zip(mass, mass[1:]))


def test_subtract_own_level_is_exact(moser40):
    scales = {n: float(n) for n in moser40.indices}
    rest, rep = subtract_level(moser40, scales, moser_profile())
    assert all(r.is_zero for r in rest.functions)
    assert rep["raw_rel_error"] <= 1e-12


def test_subtract_first_two_level_layer(two_level, d2):
    fam, cfg, _ = two_level
    A = estimate_A(fam)
    sc = extract_scale(fam, A, cfg.argmax_slack)
    est = extract_profile(fam, sc["scales"], cfg, A)
    rest, rep = subtract_level(fam, sc["scales"], est.profile, cfg.limit_rule)
    n = fam.indices[-1]
    g = moser_function(d2, n)
    assert l2_norm(rest.functions[-1] - g) <= 0.05 * l2_norm(g)
    # raw decrease misses the cross term; the extrapolated one matches the profile energy
    assert rep["limit_rel_error"] <= 0.05
    assert rep["raw_rel_error"] > 0.05


# --------------------------------------------------------------------------
# full extraction


def test_decompose_moser_family():
    fam = moser_family(2, 64)
    res = decompose(fam)
    assert len(res.levels) == 1 and res.ok
    lv = res.levels[0]
    assert lv.scales == {n: float(n) for n in fam.indices}
    assert _rel_l2(lv.profile, moser_profile()) <= 1e-14
    assert max(res.remainder_rel_max()) <= 1e-12
    assert orlicz_norm(res.remainders[-1]) <= res.stop_eps


def test_decompose_two_level(two_level):
    fam, cfg, planted = two_level
    res = decompose(fam, cfg)
    assert len(res.levels) == 2 and res.ok
    first, second = res.levels
    assert _rel_l2(first.profile, triangle_profile()) <= 0.05
    assert _rel_l2(second.profile, moser_profile()) <= 0.05
    assert math.isclose(first.energy, triangle_profile().energy(), rel_tol=0.05)
    assert math.isclose(second.energy, 1.0, rel_tol=0.05)
    o = res.orthogonality[0]
    assert o["orthogonal"] and all(s == math.log(n) for n, s in zip(o["indices"], o["statistic"]))
    led = res.energy_ledger
    assert led["passed"] and led["sum_A_sq_ok"]


def test_last_rule_misreads_two_level_energies(two_level):
    fam, _, _ = two_level
    res = decompose(fam, ExtractionConfig(limit_rule="last"))
    energies = sorted(lv.energy for lv in res.levels)
    assert abs(energies[-1] - 2.0) / 2.0 > 0.05


def test_two_level_manifest_matches_generator(two_level):
    fam, _, _ = two_level
    ref = two_level_family(2)
    for a, b in zip(fam.functions, ref.functions):
        np.testing.assert_array_equal(a.breakpoints, b.breakpoints)
        np.testing.assert_array_equal(a.values, b.values)


def test_decompose_zero_family(d2):
    fam = SequenceFamily(d2, [1, 2, 3], [LogRadialFunction.zero(d2)] * 3)
    res = decompose(fam)
    assert res.levels == [] and res.A_series == [0.0] and res.ok


def test_decompose_homogeneity(d2):
    fam = moser_family(d2, 16)
    res = decompose(fam.with_functions([f.scaled(0.5) for f in fam.functions]))
    assert len(res.levels) == 1
    np.testing.assert_allclose(res.levels[0].profile.values, 0.5 * moser_profile()(np.array(res.config.y_grid)),
                               atol=1e-15)


def test_force_continues_past_failed_hypotheses(d2):
    idx = [2, 4, 8, 16, 32]
    fs = [moser_function(d2, n) + LogRadialFunction(d2, [-math.log(n) - 0.1, -math.log(n), -math.log(n) + 0.1],
                                                    [0.0, 0.05, 0.0]) for n in idx]
    res = decompose(SequenceFamily(d2, idx, fs), ExtractionConfig(force=True, max_levels=1))
    assert res.stop_cause != "hypotheses failed"
    assert "continuing under force" in res.diagnostics[0]


def test_decompose_deterministic_and_thread_independent(two_level):
    fam, cfg, _ = two_level
    a = canonical_json(decompose(fam, cfg).to_dict())
    b = canonical_json(decompose(fam, cfg, threads=4).to_dict())
    assert a == b


def test_profile_energy_lemma_bar(moser40):
    res = decompose(moser40)
    lv = res.levels[0]
    assert math.sqrt(lv.energy) >= lv.lemma_bar
    assert hardy_gradient_norm(moser40.functions[-1]) ** 2 >= lv.energy * (1 - 1e-12)
