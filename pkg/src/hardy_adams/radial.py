"""Radial functions on R^{2N} in log coordinates and their norms.

A radial ``u`` is stored through ``v(s) = u(e^{-s})``.  With ``r = e^{-s}`` the
volume element becomes ``omega * e^{-2Ns} ds``, ``|grad u|^2 dx`` becomes
``omega * v'(s)^2 e^{-(2N-2)s} ds`` and the Hardy-weighted gradient
``|grad u|^2 / |x|^{2N-2} dx`` becomes ``omega * v'(s)^2 ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec, integrate_pieces

H1_CONVENTION = "||u||_H1^2 = ||u||_L2^2 + ||grad u||_L2^2"


@lru_cache(maxsize=None)
def _constants(N: int) -> dict[str, float]:
    with mpmath.workdps(40):
        piN = mpmath.pi ** N
        fN1 = mpmath.factorial(N - 1)
        fN = mpmath.factorial(N)
        return {
            "gamma_N": float(4 * piN * N / fN1),
            "omega": float(2 * piN / fN1),
            "ball_volume": float(piN / fN),
            "beta_N": float(fN * piN * mpmath.mpf(4) ** N),
            "radial_const": float(fN1 / piN),  # (N-1)!/pi^N
        }


@dataclass(frozen=True)
class Dimension:
    """Half the ambient dimension: functions live on R^{2N}."""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool) or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")

    @property
    def gamma(self) -> float:
        """Sharp exponent 4 pi^N N / (N-1)!."""
        return _constants(self.N)["gamma_N"]

    @property
    def omega(self) -> float:
        """Area of the unit sphere S^{2N-1}."""
        return _constants(self.N)["omega"]

    @property
    def ball_volume(self) -> float:
        return _constants(self.N)["ball_volume"]

    @property
    def beta(self) -> float:
        return _constants(self.N)["beta_N"]

    @property
    def radial_const(self) -> float:
        return _constants(self.N)["radial_const"]

    def constant_table(self) -> dict[str, float]:
        table = dict(_constants(self.N))
        table["N"] = self.N
        return table


class PiecewiseLinear:
    """Continuous piecewise-linear function on the line.

    Zero to the left of the first breakpoint, constant (equal to the last
    value) to the right of the last one.  A nonzero first value is a jump at
    the left edge of the support.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values):
        bp = np.array(breakpoints, dtype=float)
        vals = np.array(values, dtype=float)
        if bp.ndim != 1 or bp.shape != vals.shape:
            raise ValueError("breakpoints and values must be 1-d arrays of equal length")
        if bp.size < 2:
            raise ValueError("need at least two breakpoints (one interval)")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise ValueError("breakpoints and values must be finite")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        bp.setflags(write=False)
        vals.setflags(write=False)
        self.breakpoints = bp
        self.values = vals

    def _new(self, breakpoints, values):
        return PiecewiseLinear(breakpoints, values)

    def __repr__(self):
        return f"{type(self).__name__}(m={self.breakpoints.size - 1}, " \
               f"s=[{self.breakpoints[0]:.6g}, {self.breakpoints[-1]:.6g}])"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.interp(s, self.breakpoints, self.values, right=self.values[-1])
        return np.where(s < self.breakpoints[0], 0.0, out)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    @property
    def has_jump(self) -> bool:
        return self.values[0] != 0.0

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def derivative_sq_integral(self) -> float:
        """Exact integral of v'^2 over the line (infinite for a jump)."""
        if self.has_jump:
            return math.inf
        return math.fsum(self.slopes ** 2 * np.diff(self.breakpoints))

    def scaled(self, c: float):
        return self._new(self.breakpoints, c * self.values)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1.0)

    def _combine(self, other, sign):
        grid = merge_breakpoints(self.breakpoints, other.breakpoints)
        for f in (self, other):
            if f.has_jump and f.breakpoints[0] > grid[0]:
                raise ValueError("sum would have an interior jump; not representable")
        return self._new(grid, self(grid) + sign * other(grid))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def pieces(self, lo: float = -math.inf, hi: float = math.inf):
        """Linear pieces inside ``[lo, hi]``.

        Returns ``(starts, ends, start_values, slopes, plateau)`` where
        ``plateau`` is ``(p_lo, p_hi)`` for the constant tail or ``None``.
        """
        bp, vals, slopes = self.breakpoints, self.values, self.slopes
        starts = np.maximum(bp[:-1], lo)
        ends = np.minimum(bp[1:], hi)
        keep = starts < ends
        starts, ends = starts[keep], ends[keep]
        b = slopes[keep]
        a = vals[:-1][keep] + b * (starts - bp[:-1][keep])
        plateau = None
        p_lo = max(bp[-1], lo)
        if hi > p_lo:
            plateau = (p_lo, hi)
        return starts, ends, a, b, plateau


def merge_breakpoints(a, b, rtol: float = 1e-13) -> np.ndarray:
    """Sorted union of two grids, collapsing points closer than ``rtol``."""
    grid = np.union1d(a, b)
    if grid.size < 2:
        return grid
    scale = max(1.0, float(np.max(np.abs(grid))))
    keep = np.concatenate([[True], np.diff(grid) > rtol * scale])
    return grid[keep]


class LogRadialFunction(PiecewiseLinear):
    """Radial function on R^{2N}, ``u(x) = v(-log|x|)`` with ``v`` piecewise linear.

    ``v = 0`` for ``s <= s_0`` (support in ``|x| <= e^{-s_0}``) and ``v = v_m``
    for ``s >= s_m`` (constant near the origin).
    """

    __slots__ = ("dim",)

    def __init__(self, dim: Dimension | int, breakpoints, values):
        super().__init__(breakpoints, values)
        self.dim = dim if isinstance(dim, Dimension) else Dimension(int(dim))

    def _new(self, breakpoints, values):
        return LogRadialFunction(self.dim, breakpoints, values)

    def _combine(self, other, sign):
        if isinstance(other, LogRadialFunction) and other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return super()._combine(other, sign)

    @property
    def support_radius(self) -> float:
        return math.exp(-self.breakpoints[0])

    @classmethod
    def zero(cls, dim, s0: float = 0.0, s1: float = 1.0):
        return cls(dim, [s0, s1], [0.0, 0.0])


def gamma_N(N: int) -> float:
    return Dimension(N).gamma


# --------------------------------------------------------------------------
# weighted line integrals


def _logsumexp(terms) -> float:
    terms = [t for t in terms if t > -math.inf]
    if not terms:
        return -math.inf
    top = max(terms)
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def weighted_integral(f: PiecewiseLinear, func, decay: float,
                      q: QuadratureSpec = DEFAULT_QUADRATURE,
                      lo: float = -math.inf, hi: float = math.inf):
    """``int_lo^hi func(v(t), v'(t)) e^{-decay t} dt`` and an error estimate.

    ``func`` must vanish at ``(0, 0)`` unless ``lo`` is finite; the plateau
    tail is integrated in closed form.  Requires ``decay > 0`` when the
    plateau is unbounded.
    """
    starts, ends, a, b, plateau = f.pieces(lo, hi)
    total, err = [], []
    if starts.size:
        def integrand(x, seg):
            t = x - starts[seg][:, None]
            v = a[seg][:, None] + b[seg][:, None] * t
            return func(v, np.broadcast_to(b[seg][:, None], v.shape)) * np.exp(-decay * t)

        vals, errs = integrate_pieces(integrand, starts, ends, q)
        scale = np.exp(-decay * starts)
        total.extend(vals * scale)
        err.extend(errs * scale)
    if plateau is not None:
        p_lo, p_hi = plateau
        fv = float(func(np.array(f.values[-1]), np.array(0.0)))
        if fv != 0.0:
            span = math.exp(-decay * p_lo) - (0.0 if p_hi == math.inf else math.exp(-decay * p_hi))
            total.append(fv * span / decay)
    left_hi = min(f.breakpoints[0], hi)
    if lo < left_hi:
        f0 = float(func(np.array(0.0), np.array(0.0)))
        if f0 != 0.0:
            if lo == -math.inf:
                raise ValueError("integrand does not vanish on the unbounded zero tail")
            span = math.exp(-decay * lo) - math.exp(-decay * left_hi)
            total.append(f0 * span / decay)
    return math.fsum(total), math.fsum(err)


def one_minus_exp(x):
    """``1 - e^{-x}``; with the factor ``e^x`` this gives ``e^x - 1``."""
    return -np.expm1(-x)


def log_exp_integral(f: PiecewiseLinear, gamma: float, decay: float,
                     q: QuadratureSpec = DEFAULT_QUADRATURE,
                     lo: float = -math.inf, hi: float = math.inf, damp=one_minus_exp):
    """Log of ``int (e^{gamma v^2} damp(gamma v^2)) e^{-decay t} dt``.

    ``damp`` takes values in ``[0, 1]`` and vanishes at 0; the default turns
    the integrand into ``(e^{gamma v^2} - 1) e^{-decay t}``.  Each piece is
    integrated with its endpoint maximum of ``gamma v^2 - decay t`` factored
    out, so arbitrarily large exponents never overflow.

    Returns ``(log_value, relative_error)``.
    """
    starts, ends, a, b, plateau = f.pieces(lo, hi)
    logs, weights_err = [], []
    if starts.size:
        width = ends - starts
        v1 = a + b * width
        x0 = gamma * a ** 2 - decay * starts
        x1 = gamma * v1 ** 2 - decay * ends
        shift = np.maximum(x0, x1)
        # Local variable tau >= 0 measured from the endpoint carrying the maximum
        # (the exponent is convex), so the exponent relative to the shift is
        # formed without cancellation even far out on the line.
        from_right = x1 > x0
        sgn = np.where(from_right, -1.0, 1.0)
        va = np.where(from_right, v1, a)
        bv = sgn * b
        lin = 2.0 * gamma * va * bv - decay * sgn
        quad = gamma * bv * bv

        def integrand(tau, seg):
            lin_s, quad_s = lin[seg][:, None], quad[seg][:, None]
            v = va[seg][:, None] + bv[seg][:, None] * tau
            expo = np.minimum(tau * (lin_s + quad_s * tau), 0.0)
            return np.exp(expo) * damp(gamma * v * v)

        vals, errs = integrate_pieces(integrand, np.zeros_like(width), width, q, abs_floor=0.0)
        with np.errstate(divide="ignore"):
            logs.extend(shift + np.log(vals))
            weights_err.extend(shift + np.log(errs))
    if plateau is not None:
        p_lo, p_hi = plateau
        g = gamma * f.values[-1] ** 2
        d = float(damp(np.array(g)))
        if d > 0:
            term = g + math.log(d) - decay * p_lo - math.log(decay)
            if p_hi != math.inf:
                term += math.log(-math.expm1(-decay * (p_hi - p_lo)))
            logs.append(term)
    log_total = _logsumexp(logs)
    if log_total == -math.inf:
        return -math.inf, 0.0
    log_err = _logsumexp(weights_err)
    return log_total, math.exp(log_err - log_total) if log_err > -math.inf else 0.0


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormReport:
    l2: float
    grad_l2: float
    hardy_grad: float
    h_norm: float
    error_bound: float
    h1_convention: str = field(default=H1_CONVENTION)

    @property
    def h1(self) -> float:
        return math.hypot(self.l2, self.grad_l2)

    def pythagoras_defect(self) -> float:
        return abs(self.h_norm ** 2 - (self.l2 ** 2 + self.grad_l2 ** 2 + self.hardy_grad ** 2))


def _sq(v, b):
    return v * v


def _slope_sq(v, b):
    return b * b


def l2_norm(f: LogRadialFunction, q: QuadratureSpec = DEFAULT_QUADRATURE, full_output=False):
    w = f.dim.omega
    val, err = weighted_integral(f, _sq, 2 * f.dim.N, q)
    norm = math.sqrt(max(w * val, 0.0))
    err_norm = w * err / (2 * norm) if norm > 0 else math.sqrt(w * err)
    return (norm, err_norm) if full_output else norm


def h1_gradient_norm(f: LogRadialFunction, q: QuadratureSpec = DEFAULT_QUADRATURE, full_output=False):
    """``||grad u||_{L^2(R^{2N})}``; infinite when ``v`` has a jump."""
    if f.has_jump:
        return (math.inf, 0.0) if full_output else math.inf
    w = f.dim.omega
    val, err = weighted_integral(f, _slope_sq, 2 * f.dim.N - 2, q)
    norm = math.sqrt(max(w * val, 0.0))
    err_norm = w * err / (2 * norm) if norm > 0 else math.sqrt(w * err)
    return (norm, err_norm) if full_output else norm


def hardy_gradient_norm(f: LogRadialFunction, q: QuadratureSpec | None = None) -> float:
    """``||grad u / |x|^{N-1}||_{L^2}`` computed exactly from the slopes."""
    return math.sqrt(f.dim.omega * f.derivative_sq_integral())


def h_norm(f: LogRadialFunction, q: QuadratureSpec = DEFAULT_QUADRATURE) -> NormReport:
    l2, e_l2 = l2_norm(f, q, full_output=True)
    grad, e_grad = h1_gradient_norm(f, q, full_output=True)
    hardy = hardy_gradient_norm(f)
    h = math.sqrt(l2 ** 2 + grad ** 2 + hardy ** 2)
    if h > 0 and math.isfinite(h):
        err = (l2 * e_l2 + grad * e_grad) / h
    else:
        err = 0.0
    return NormReport(l2, grad, hardy, h, err)


# --------------------------------------------------------------------------
# pointwise radial estimates


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    min_slack_h1: float
    min_slack_interp: float
    worst_s: float
    worst_slack: float


def radial_bound_check(f: LogRadialFunction, q: QuadratureSpec = DEFAULT_QUADRATURE) -> BoundCheck:
    """Check the two Strauss-type radial bounds on the breakpoint grid.

    ``|u(x)| <= sqrt((N-1)!/pi^N) ||u||_{H^1} / |x|^{N-1/2}`` and the sharper
    interpolation form with ``||u||_{L^2}^{1/2} ||grad u||_{L^2}^{1/2}``.
    """
    N = f.dim.N
    rep = h_norm(f, q)
    c = math.sqrt(f.dim.radial_const)
    s = f.breakpoints
    with np.errstate(over="ignore"):
        growth = np.exp((N - 0.5) * s)
    absv = np.abs(f.values)
    slack_h1 = c * rep.h1 * growth - absv
    slack_int = c * math.sqrt(rep.l2 * rep.grad_l2) * growth - absv
    worst = np.minimum(slack_h1, slack_int)
    i = int(np.argmin(worst))
    tol = q.abs_tol
    return BoundCheck(
        passed=bool(worst[i] >= -tol),
        min_slack_h1=float(np.min(slack_h1)),
        min_slack_interp=float(np.min(slack_int)),
        worst_s=float(s[i]),
        worst_slack=float(worst[i]),
    )


def strict_inclusion_witness(dim: Dimension | int, S: float = 20.0, grid=None) -> LogRadialFunction:
    """Interpolant of ``log(1 + s)`` on ``[0, S]``: ``u = log(1 - log|x|)`` on the unit ball."""
    if grid is None:
        grid = np.union1d(np.linspace(0.0, S, 2001), [math.e - 1.0])
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0 or grid[-1] < 10.0:
        raise ValueError("witness grid must start at 0 and reach at least s = 10")
    return LogRadialFunction(dim, grid, np.log1p(grid))


def step_function(dim: Dimension | int, c: float, R: float) -> LogRadialFunction:
    """``c * 1_{B(R)}``: jump at ``|x| = R``, constant inside."""
    s0 = -math.log(R)
    return LogRadialFunction(dim, [s0, s0 + 1.0], [c, c])
