"""Seeded random corpora of radial functions and profiles."""

from __future__ import annotations

import math

import numpy as np

from .concentration import Profile
from .radial import Dimension, LogRadialFunction, hardy_gradient_norm


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_function(rng, dim: Dimension | int, max_pieces: int = 12) -> LogRadialFunction:
    """Generic continuous piecewise-linear member: signed values, random support."""
    rng = _rng(rng)
    m = int(rng.integers(2, max_pieces + 1))
    s0 = float(rng.uniform(-1.5, 1.0))
    s = s0 + np.concatenate([[0.0], np.cumsum(rng.exponential(0.8, size=m) + 0.05)])
    v = np.concatenate([[0.0], rng.normal(0.0, 1.0, size=m)])
    return LogRadialFunction(dim, s, v)


def admissible_function(rng, dim: Dimension | int, max_pieces: int = 12,
                        hardy_range=(0.3, 1.0)) -> LogRadialFunction:
    """Nonnegative, radially nonincreasing, compactly supported, Hardy norm <= 1.

    Projection: absolute values of the random increments are accumulated
    (so ``v`` is nondecreasing in ``s``), then the function is rescaled to a
    Hardy-gradient norm drawn from ``hardy_range``.
    """
    rng = _rng(rng)
    f = random_function(rng, dim, max_pieces)
    inc = np.abs(np.diff(f.values))
    v = np.concatenate([[0.0], np.cumsum(inc)])
    g = LogRadialFunction(dim, f.breakpoints, v)
    target = float(rng.uniform(*hardy_range))
    return g.scaled(target / hardy_gradient_norm(g))


def random_profile(rng, max_pieces: int = 8) -> Profile:
    rng = _rng(rng)
    m = int(rng.integers(1, max_pieces + 1))
    y = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 1.0, size=m))])
    p = np.concatenate([[0.0], rng.normal(0.0, 1.0, size=m)])
    if not np.any(p):
        p[-1] = 1.0
    return Profile(y, p)


def function_corpus(dim, size: int, seed=0) -> list[LogRadialFunction]:
    rng = _rng(seed)
    return [random_function(rng, dim) for _ in range(size)]


def admissible_corpus(dim, size: int, seed=0) -> list[LogRadialFunction]:
    rng = _rng(seed)
    return [admissible_function(rng, dim) for _ in range(size)]


def profile_corpus(size: int, seed=0) -> list[Profile]:
    rng = _rng(seed)
    return [random_profile(rng) for _ in range(size)]


def is_admissible(f: LogRadialFunction, tol: float = 1e-12) -> tuple[bool, str]:
    """Admissibility for the Adachi-type bound; returns ``(ok, violated property)``."""
    if f.is_zero:
        return False, "zero function"
    if np.any(f.values < -tol):
        return False, "nonnegative"
    if np.any(np.diff(f.values) < -tol):
        return False, "radially nonincreasing"
    if f.has_jump:
        return False, "continuous at the support boundary"
    if hardy_gradient_norm(f) > 1 + tol:
        return False, "hardy gradient <= 1"
    if not math.isfinite(f.breakpoints[0]):
        return False, "compact support"
    return True, ""
