"""Profiles, scales and elementary concentrations.

An elementary concentration at scale ``alpha`` built on a profile ``psi`` is

    g(x) = sqrt(2 N alpha / gamma_N) * psi(-log|x| / alpha),

so in log coordinates ``v(s) = sqrt(2N alpha/gamma_N) psi(s/alpha)`` and its
Hardy-gradient norm equals ``||psi'||_{L^2(R)}`` for every ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec, integrate_pieces
from .radial import Dimension, LogRadialFunction, PiecewiseLinear, _logsumexp


class Profile(PiecewiseLinear):
    """Profile: vanishes on ``(-inf, 0]``, piecewise linear, constant past ``y_M``."""

    __slots__ = ()

    def __init__(self, breakpoints, values):
        super().__init__(breakpoints, values)
        if self.breakpoints[0] != 0.0:
            raise ValueError("profile breakpoints must start at y_0 = 0")
        if self.values[0] != 0.0:
            raise ValueError("profile must vanish at 0")
        if self.is_zero:
            raise ValueError("the zero profile is not admissible")

    def _new(self, breakpoints, values):
        return Profile(breakpoints, values)

    def energy(self) -> float:
        """``||psi'||^2_{L^2(R)}``."""
        return self.derivative_sq_integral()

    def holder_defect(self) -> float:
        """Largest ``|psi(y_j) - psi(y_i)| - sqrt(y_j - y_i) ||psi'||`` over grid pairs (<= 0)."""
        y, p = self.breakpoints, self.values
        norm = math.sqrt(self.energy())
        dy = np.abs(y[:, None] - y[None, :])
        return float(np.max(np.abs(p[:, None] - p[None, :]) - np.sqrt(dy) * norm))


def moser_profile() -> Profile:
    """``L(t) = t`` on ``[0, 1)``, 1 afterwards, 0 for ``t < 0``."""
    return Profile([0.0, 1.0], [0.0, 1.0])


def triangle_profile() -> Profile:
    return Profile([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])


class ScaleSequence:
    """Scale values ``alpha(n) > 0`` on a finite increasing index set."""

    def __init__(self, indices: Sequence[int], values: Sequence[float], law: str | None = None):
        idx = tuple(int(n) for n in indices)
        vals = tuple(float(a) for a in values)
        if len(idx) != len(vals) or not idx:
            raise ValueError("indices and values must be nonempty and of equal length")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(not (a > 0 and math.isfinite(a)) for a in vals):
            raise ValueError("scale values must be positive and finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("scale values must be strictly increasing")
        self.indices = idx
        self.values = vals
        self.law = law
        self._map = dict(zip(idx, vals))

    @classmethod
    def from_law(cls, indices: Sequence[int], law: str = "power", p: float = 1.0):
        """Named scale laws: ``power`` (``n^p``) and ``nlogn`` (``n log n``)."""
        if law == "power":
            vals = [float(n) ** p for n in indices]
            name = f"n^{p:g}"
        elif law == "nlogn":
            vals = [n * math.log(n) for n in indices]
            name = "n log n"
        else:
            raise ValueError(f"unknown scale law {law!r}")
        return cls(indices, vals, law=name)

    def __call__(self, n: int) -> float:
        try:
            return self._map[int(n)]
        except KeyError:
            raise KeyError(f"index {n} is not in the scale's index set") from None

    def __len__(self):
        return len(self.indices)

    def __repr__(self):
        return f"ScaleSequence({self.law or 'explicit'}, n={self.indices[0]}..{self.indices[-1]})"


@dataclass(frozen=True)
class ConcentrationFamily:
    profile: Profile
    scale: ScaleSequence
    dim: Dimension


def concentrate(profile: Profile, alpha: float, dim: Dimension | int) -> LogRadialFunction:
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    amp = math.sqrt(2 * dim.N * alpha / dim.gamma)
    return LogRadialFunction(dim, alpha * profile.breakpoints, amp * profile.values)


def build_concentration(fam: ConcentrationFamily, n: int) -> LogRadialFunction:
    return concentrate(fam.profile, fam.scale(n), fam.dim)


def moser_function(dim: Dimension | int, k: float) -> LogRadialFunction:
    """The Moser function ``f_k``: Hardy-gradient norm exactly 1."""
    return concentrate(moser_profile(), k, dim)


def superpose(families: Sequence[ConcentrationFamily], n: int) -> LogRadialFunction:
    if not families:
        raise ValueError("need at least one family")
    dims = {fam.dim for fam in families}
    if len(dims) != 1:
        raise ValueError("families must share a dimension")
    total = build_concentration(families[0], n)
    for fam in families[1:]:
        total = total + build_concentration(fam, n)
    return total


@dataclass(frozen=True)
class SqrtRatioMax:
    value: float
    argmax: float
    at_terminal_breakpoint: bool


def sqrt_ratio_max(psi: PiecewiseLinear) -> SqrtRatioMax:
    """``sup_{s>0} |psi(s)| / sqrt(s)`` computed exactly per linear piece.

    On a piece ``psi = a + b s`` the ratio is stationary only at ``s = a/b``;
    the plateau ratio decreases, so its supremum sits at the last breakpoint.
    """
    y, p = psi.breakpoints, psi.values
    cand_s, cand_v = [], []
    for i in range(y.size - 1):
        lo, hi = max(y[i], 0.0), y[i + 1]
        if hi <= 0:
            continue
        b = (p[i + 1] - p[i]) / (y[i + 1] - y[i])
        a = p[i] - b * y[i]
        pts = [hi] + ([lo] if lo > 0 else [])
        if b != 0 and lo < a / b < hi:
            pts.append(a / b)
        for s in pts:
            cand_s.append(s)
            cand_v.append(abs(a + b * s) / math.sqrt(s))
    if y[-1] > 0:
        cand_s.append(float(y[-1]))
        cand_v.append(abs(p[-1]) / math.sqrt(y[-1]))
    if not cand_v:
        return SqrtRatioMax(0.0, 0.0, False)
    i = int(np.argmax(cand_v))
    s_star = float(cand_s[i])
    return SqrtRatioMax(float(cand_v[i]), s_star, s_star == float(y[-1]))


def asymptotic_orlicz_limit(psi: Profile, dim: Dimension | int, full_output: bool = False):
    """Limit of the Orlicz norms of the concentrations built on ``psi``:
    ``(1/sqrt(gamma_N)) max_{s>0} |psi(s)|/sqrt(s)``."""
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    res = sqrt_ratio_max(psi)
    value = res.value / math.sqrt(dim.gamma)
    return (value, res) if full_output else value


@dataclass(frozen=True)
class ConcentrationIntegral:
    value: float
    log_value: float
    diverges: bool
    capped: bool


VALUE_CAP = 1e300


def concentration_orlicz_integral(psi: Profile, alpha: float, lam: float, dim: Dimension | int,
                                  q: QuadratureSpec = DEFAULT_QUADRATURE) -> ConcentrationIntegral:
    """``int (e^{|g/lam|^2} - 1) dx`` for the concentration of ``psi`` at scale ``alpha``,
    evaluated through the rescaled two-term form

        omega*alpha * [ int_0^inf exp(-2N alpha s (1 - |psi(s)/sqrt(s)|^2 / (gamma_N lam^2))) ds
                        - 1/(2N alpha) ].

    ``diverges`` is set when ``lam`` lies below the asymptotic limit norm, i.e.
    the exponent becomes positive on a set of positive measure and the value
    grows without bound in ``alpha``.
    """
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    if not (alpha > 0 and lam > 0):
        raise ValueError("alpha and lambda must be positive")
    N, g = dim.N, dim.gamma
    c = 2 * N * alpha
    kappa = 1.0 / (g * lam * lam)
    starts, ends, a, b, plateau = psi.pieces(0.0, math.inf)

    def expo(s, a_, b_, s0):
        psi_s = a_ + b_ * (s - s0)
        return -c * s * (1.0 - kappa * psi_s * psi_s / s)

    e0 = np.where(starts > 0, expo(np.maximum(starts, 1e-300), a, b, starts), 0.0)
    e1 = expo(ends, a, b, starts)
    shift = np.maximum(e0, e1)

    def integrand(x, seg):
        return np.exp(expo(x, a[seg][:, None], b[seg][:, None], starts[seg][:, None]) - shift[seg][:, None])

    vals, _ = integrate_pieces(integrand, starts, ends, q, abs_floor=0.0)
    with np.errstate(divide="ignore"):
        logs = list(shift + np.log(vals))
    p_lo = plateau[0]
    logs.append(c * kappa * psi.values[-1] ** 2 - c * p_lo - math.log(c))
    log_first = _logsumexp(logs)
    log_base = -math.log(c)
    if log_first <= log_base:
        log_diff = -math.inf
    else:
        log_diff = log_first + math.log(-math.expm1(log_base - log_first))
    log_value = math.log(dim.omega * alpha) + log_diff
    exact = math.exp(log_value) if log_value < 690 else math.inf
    capped = exact > VALUE_CAP
    diverges = lam < asymptotic_orlicz_limit(psi, dim)
    return ConcentrationIntegral(min(exact, VALUE_CAP), log_value, diverges, capped)


@dataclass(frozen=True)
class OrthogonalityReport:
    indices: tuple
    statistic: tuple
    orthogonal: bool
    bar: float
    margin: float


def orthogonality_series(indices, a_values, b_values, bar: float = math.log(4.0)) -> OrthogonalityReport:
    """``|log(b(n)/a(n))|`` over aligned arrays with the finite-index verdict.

    Verdict: strictly increasing over the final half of the index set and at
    least ``bar`` at the last index.  ``margin`` is the last value minus ``bar``.
    """
    if not len(indices):
        raise ValueError("scales share no index")
    stat = tuple(abs(math.log(b / a)) for a, b in zip(a_values, b_values))
    tail = stat[len(stat) // 2:]
    increasing = all(y > x for x, y in zip(tail, tail[1:]))
    orthogonal = increasing and stat[-1] >= bar
    return OrthogonalityReport(tuple(int(n) for n in indices), stat, orthogonal, bar, stat[-1] - bar)


def scale_orthogonality(a: ScaleSequence, b: ScaleSequence, bar: float = math.log(4.0)) -> OrthogonalityReport:
    """Series ``|log(b(n)/a(n))|`` over the shared indices with a monotone-divergence verdict."""
    shared = [n for n in a.indices if n in b._map]
    return orthogonality_series(shared, [a(n) for n in shared], [b(n) for n in shared], bar)


def profile_l2_distance(a: PiecewiseLinear, b: PiecewiseLinear, y_max: float) -> float:
    """Exact ``||a - b||_{L^2(0, y_max)}`` for piecewise-linear functions."""
    grid = np.union1d(np.union1d(a.breakpoints, b.breakpoints), [0.0, y_max])
    grid = grid[(grid >= 0) & (grid <= y_max)]
    d = a(grid) - b(grid)
    h = np.diff(grid)
    d0, d1 = d[:-1], d[1:]
    return math.sqrt(math.fsum(h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0))
