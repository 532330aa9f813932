"""Exponential functionals and the Luxemburg-type Orlicz norm."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec
from .radial import Dimension, LogRadialFunction, log_exp_integral, one_minus_exp

# Largest log-value still representable as a float.
LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class OrliczSpec:
    threshold: float = 1.0
    lambda_rel_tol: float = 1e-10
    bracket_growth: float = 4.0

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not self.lambda_rel_tol > 0:
            raise ValueError("lambda_rel_tol must be positive")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must exceed 1")


@dataclass(frozen=True)
class PhiPSpec:
    p: int = 1

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be an integer >= 1")


def log_exp_functional(f: LogRadialFunction, gamma: float, q: QuadratureSpec = DEFAULT_QUADRATURE,
                       lo: float = -math.inf, hi: float = math.inf):
    """``log int (e^{gamma u^2} - 1) dx`` restricted to ``lo <= -log|x| <= hi``.

    Returns ``(log_value, relative_error)``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    log_int, rel = log_exp_integral(f, gamma, 2 * f.dim.N, q, lo, hi)
    return math.log(f.dim.omega) + log_int, rel


def _from_log(log_value: float, rel: float, full_output: bool):
    overflow = log_value > LOG_FLOAT_MAX
    value = math.inf if overflow else (0.0 if log_value == -math.inf else math.exp(log_value))
    if full_output:
        return value, {"log_value": log_value, "rel_error": rel, "overflow": overflow}
    return value


def exp_functional(f: LogRadialFunction, gamma: float, q: QuadratureSpec = DEFAULT_QUADRATURE,
                   full_output: bool = False, lo: float = -math.inf, hi: float = math.inf):
    """``int_{R^{2N}} (e^{gamma |u|^2} - 1) dx``.

    Computed in log space.  When the value exceeds the float range it is
    returned as ``inf`` and ``info["overflow"]`` is set; ``info["log_value"]``
    always carries the exact logarithm.
    """
    log_value, rel = log_exp_functional(f, gamma, q, lo, hi)
    return _from_log(log_value, rel, full_output)


def phi_p_functional(f: LogRadialFunction, p: PhiPSpec | int, lam: float,
                     q: QuadratureSpec = DEFAULT_QUADRATURE, full_output: bool = False):
    """``int phi_p(|u|/lam) dx`` with ``phi_p(s) = e^{s^2} - sum_{k<p} s^{2k}/k!``.

    Uses ``phi_p(sqrt(x)) = e^x P(p, x)`` with ``P`` the regularised lower
    incomplete gamma function.
    """
    p = p.p if isinstance(p, PhiPSpec) else PhiPSpec(p).p
    if not lam > 0:
        raise ValueError("lambda must be positive")
    gamma = 1.0 / lam ** 2
    damp = one_minus_exp if p == 1 else (lambda x: special.gammainc(p, x))
    log_int, rel = log_exp_integral(f, gamma, 2 * f.dim.N, q, damp=damp)
    log_value = math.log(f.dim.omega) + log_int
    return _from_log(log_value, rel, full_output)


def orlicz_norm(f: LogRadialFunction, spec: OrliczSpec | None = None,
                q: QuadratureSpec = DEFAULT_QUADRATURE, full_output: bool = False):
    """``inf{lam > 0 : int (e^{|u/lam|^2} - 1) dx <= threshold}``.

    The functional decreases strictly in ``lam``, so the infimum is the root
    of ``log F(lam) = log threshold``, located on ``log lam`` by bracketing
    and a safeguarded bracketing root finder.  The zero function has norm 0.
    """
    spec = spec or OrliczSpec()
    if f.is_zero:
        return (0.0, {"evaluations": 0}) if full_output else 0.0
    log_theta = math.log(spec.threshold)
    evaluations = 0

    def h(t):
        nonlocal evaluations
        evaluations += 1
        return log_exp_functional(f, math.exp(-2.0 * t), q)[0] - log_theta

    # u is dominated by max|v| on its support ball, whose norm is explicit.
    vol = f.dim.ball_volume * math.exp(-2 * f.dim.N * f.breakpoints[0])
    t_hi = math.log(f.max_abs) - 0.5 * math.log(math.log1p(spec.threshold / vol))
    growth = math.log(spec.bracket_growth)
    expansions = 0
    h_hi = h(t_hi)
    while h_hi > 0:
        t_hi += growth
        h_hi = h(t_hi)
        expansions += 1
        if expansions > 200:
            raise RuntimeError("orlicz_norm: upper bracket not found after 200 expansions")
    t_lo = t_hi - growth
    h_lo = h(t_lo)
    while h_lo <= 0:
        t_hi, h_hi = t_lo, h_lo
        t_lo -= growth
        h_lo = h(t_lo)
        expansions += 1
        if expansions > 200:
            raise RuntimeError("orlicz_norm: lower bracket not found after 200 expansions")
    if h_hi == 0:
        t = t_hi
    else:
        t = optimize.brentq(h, t_lo, t_hi, xtol=0.01 * spec.lambda_rel_tol, rtol=4 * np.finfo(float).eps)
    lam = math.exp(t)
    if full_output:
        return lam, {"evaluations": evaluations, "bracket": (math.exp(t_lo), math.exp(t_hi))}
    return lam


def orlicz_lower_bound_moser(k: float, dim: Dimension | int, theta: float = 1.0) -> float:
    """Explicit lower bound for the Orlicz norm of the Moser function ``f_k``.

    Keeping only the inner ball ``|x| < e^{-k}`` gives
    ``lam^2 >= 2Nk / (gamma_N log(1 + (N!/pi^N) theta e^{2Nk}))``.
    """
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    if k < 1:
        raise ValueError("k must be >= 1")
    N = dim.N
    log_arg = np.logaddexp(0.0, math.log(theta / dim.ball_volume) + 2 * N * k)
    return math.sqrt(2 * N * k / (dim.gamma * log_arg))
