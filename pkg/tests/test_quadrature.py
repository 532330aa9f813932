from __future__ import annotations

import math

import numpy as np
import pytest

from hardy_adams.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureError,
    QuadratureSpec,
    gauss_kronrod,
    integrate_pieces,
)


def test_rule_weights_integrate_constants():
    assert math.isclose(KRONROD_WEIGHTS.sum(), 2.0, rel_tol=1e-14)
    assert math.isclose(GAUSS_WEIGHTS.sum(), 2.0, rel_tol=1e-14)
    assert np.all(np.diff(NODES) > 0)


@pytest.mark.parametrize("deg", [0, 1, 5, 13, 22])
def test_kronrod_exact_for_low_degree(deg):
    lo, hi = np.array([0.0]), np.array([1.0])
    val, _ = gauss_kronrod(lambda x, s: x ** deg, lo, hi, np.array([0]))
    assert math.isclose(val[0], 1.0 / (deg + 1), rel_tol=1e-13)


def test_batch_of_pieces():
    lo = np.array([0.0, 0.0, 1.0])
    hi = np.array([math.pi, 1.0, 3.0])
    vals, errs = integrate_pieces(lambda x, s: np.sin(x), lo, hi)
    exact = np.cos(lo) - np.cos(hi)
    np.testing.assert_allclose(vals, exact, rtol=1e-12)
    assert np.all(errs <= 1e-9)


def test_steep_exponential_relative_only():
    vals, _ = integrate_pieces(lambda x, s: np.exp(-200.0 * x), [0.0], [1.0], abs_floor=0.0)
    assert math.isclose(vals[0], -math.expm1(-200.0) / 200.0, rel_tol=1e-12)


@pytest.mark.parametrize("K", [1e2, 1e4, 1e6])
def test_endpoint_spike_in_wide_piece(K):
    # exponentials of convex quadratics peak at an endpoint; mixes a spiky and a flat piece
    f = lambda x, s: np.where(s[:, None] == 0, np.exp(K * (x - 1.0)), 1.0)
    vals, _ = integrate_pieces(f, [0.0, 0.0], [1.0, 1.0], abs_floor=0.0)
    np.testing.assert_allclose(vals, [-math.expm1(-K) / K, 1.0], rtol=1e-10)


def test_budget_exhaustion_raises():
    q = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=2)
    with pytest.raises(QuadratureError) as exc:
        integrate_pieces(lambda x, s: np.exp(-((x - 0.3) / 1e-3) ** 2), [0.0], [1.0], q, abs_floor=0.0)
    assert exc.value.partial >= 0


def test_empty_batch():
    vals, errs = integrate_pieces(lambda x, s: x, [], [])
    assert vals.size == 0 and errs.size == 0


@pytest.mark.parametrize("kwargs", [{"rel_tol": 0.0}, {"abs_tol": -1.0}, {"max_subdivisions": 0}])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureSpec(**kwargs)
