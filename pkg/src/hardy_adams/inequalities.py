"""Verifiers for the Adams-type inequality, its proof steps and the Adachi-type bound.

Every probe returns a :class:`ProbeReport`.  Probes verify instances and
trends on finite corpora; none of them certifies a supremum.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .concentration import moser_function
from .corpus import is_admissible
from .orlicz import LOG_FLOAT_MAX, exp_functional, log_exp_functional
from .parallel import pmap
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec, integrate_pieces
from .radial import (
    Dimension,
    LogRadialFunction,
    PiecewiseLinear,
    _logsumexp,
    h_norm,
    hardy_gradient_norm,
    l2_norm,
    log_exp_integral,
    weighted_integral,
)
from .textio import dumps, fmt

# Smallest M with e^x - 1 <= M x on [0, 1]: (e^x - 1)/x increases, so x = 1.
M_CONST = math.e - 1.0
NORM_TOL = 1e-10


class PreconditionError(ValueError):
    """A probe's hypothesis does not hold for the given input."""


class AdmissibilityError(PreconditionError):
    pass


def c_eps(eps: float) -> float:
    """Smallest C with ``1 + sqrt(s) <= sqrt((1+eps) s + C)`` for all ``s >= 0``.

    Squaring, C must dominate ``1 + 2 sqrt(s) - eps s``, maximal at ``sqrt(s) = 1/eps``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    return 1.0 + 1.0 / eps


def c_beta(beta: float, eps: float) -> float:
    return max(M_CONST * beta, math.exp(beta * c_eps(eps)) / (1.0 - beta * (1.0 + eps)))


@dataclass
class ProbeReport:
    name: str
    params: dict
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    notices: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, reason: str, witness, **values):
        entry = {"reason": reason, **values}
        entry["witness"] = dumps(witness) if isinstance(witness, PiecewiseLinear) else witness
        self.failures.append(entry)

    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            cols.extend(k for k in row if k not in cols)
        return cols

    def to_csv(self) -> str:
        cols = self.columns()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([_cell(row.get(c, "")) for c in cols])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "passed": self.passed,
            "summary": self.summary,
            "fits": self.fits,
            "failures": self.failures,
            "notices": self.notices,
            "rows": self.rows,
        }


def _cell(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    return x


def _rel_gap(x: float, y: float) -> float:
    scale = max(abs(x), abs(y))
    return 0.0 if scale == 0 else abs(x - y) / scale


def _log_rel_gap(lx: float, ly: float) -> float:
    if lx == ly:
        return 0.0
    return abs(math.expm1(-abs(lx - ly)))


# --------------------------------------------------------------------------
# Adams supremum and sharpness


def normalized_moser(dim: Dimension, k: float, q: QuadratureSpec = DEFAULT_QUADRATURE) -> LogRadialFunction:
    f = moser_function(dim, k)
    return f.scaled(1.0 / h_norm(f, q).h_norm)


def sharpness_fit(dim: Dimension, gamma: float, ks: Sequence[float],
                  q: QuadratureSpec = DEFAULT_QUADRATURE, threads: int = 1) -> tuple[list, dict]:
    """Least-squares slope of ``log exp_functional(f_k/h_norm(f_k), gamma)`` in ``k``."""
    ks = [float(k) for k in ks]
    logs = pmap(lambda k: log_exp_functional(normalized_moser(dim, k, q), gamma, q)[0], ks, threads)
    slope, intercept = np.polyfit(np.array(ks), np.array(logs), 1)
    expected = 2 * dim.N * (gamma - dim.gamma) / dim.gamma
    rel = abs(slope - expected) / abs(expected) if expected != 0 else math.inf
    rows = [{"series": "moser", "k": k, "log_value": lv, "value": math.exp(lv) if lv < LOG_FLOAT_MAX else math.inf,
             "overflow": lv > LOG_FLOAT_MAX} for k, lv in zip(ks, logs)]
    fit = {"slope": float(slope), "intercept": float(intercept), "expected_slope": expected,
           "rel_error": rel, "k_min": ks[0], "k_max": ks[-1]}
    return rows, fit


def adams_sup_probe(corpus: Sequence[LogRadialFunction], gamma: float, dim: Dimension | int,
                    q: QuadratureSpec = DEFAULT_QUADRATURE, moser_ks: Sequence[float] | None = None,
                    slope_tol: float = 0.15, threads: int = 1) -> ProbeReport:
    """Max of ``exp_functional(., gamma)`` over a corpus renormalised to ``h_norm <= 1``.

    For ``gamma > gamma_N`` the report also carries the divergence series along
    normalised Moser functions (``moser_ks``, default ``10..25``) and its fitted
    log-slope against ``2N (gamma - gamma_N)/gamma_N``.
    """
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    rep = ProbeReport("adams_sup", {"N": dim.N, "gamma": gamma, "gamma_over_gamma_N": gamma / dim.gamma})

    def one(item):
        i, f = item
        h = h_norm(f, q).h_norm
        g = f.scaled(1.0 / h) if h > 1 else f
        value, info = exp_functional(g, gamma, q, full_output=True)
        return {"series": "corpus", "member": i, "h_norm_in": h, "renormalized": h > 1,
                "log_value": info["log_value"], "value": value, "overflow": info["overflow"]}

    rows = pmap(one, list(enumerate(corpus)), threads)
    rep.rows.extend(rows)
    finite = [r["log_value"] for r in rows]
    rep.summary["corpus_size"] = len(rows)
    rep.summary["max_log_value"] = max(finite) if finite else -math.inf
    rep.summary["max_value"] = max((r["value"] for r in rows), default=0.0)
    rep.summary["overflowed"] = sum(r["overflow"] for r in rows)
    if rep.summary["overflowed"]:
        rep.notices.append(f"{rep.summary['overflowed']} values exceed float range; log values kept")
    if gamma <= dim.gamma:
        for r in rows:
            if not math.isfinite(r["log_value"]):
                rep.fail("non-finite functional at gamma <= gamma_N", corpus[r["member"]], member=r["member"])
    if gamma > dim.gamma:
        ks = list(moser_ks) if moser_ks is not None else list(range(10, 26))
        series, fit = sharpness_fit(dim, gamma, ks, q, threads)
        rep.rows.extend(series)
        rep.fits["sharpness"] = fit
        if not fit["rel_error"] <= slope_tol:
            rep.fail("sharpness slope off", f"moser k={ks}", slope=fit["slope"], expected=fit["expected_slope"])
    return rep


# --------------------------------------------------------------------------
# exterior part


def exterior_series_bound(f: LogRadialFunction, r0: float, gamma: float | None = None,
                          q: QuadratureSpec = DEFAULT_QUADRATURE) -> ProbeReport:
    """``I_2 = int_{|x|>r0} (e^{gamma u^2} - 1)`` against its power-series bound.

    Term by term, the radial bound gives for ``k >= 2``
    ``I_{2,k} <= omega r0^{2N}/(2(N-1)) (K ||u||_{H^1}^2 / r0^{2N-1})^k`` with
    ``K = (N-1)!/pi^N``, so ``I_2 <= gamma ||u||_2^2 + omega r0^{2N}/(2(N-1)) (e^x - 1 - x)``
    where ``x = gamma K ||u||_{H^1}^2 / r0^{2N-1}``.  The uniform version
    replaces both norms by 1.
    """
    dim = f.dim
    gamma = dim.gamma if gamma is None else gamma
    if not r0 > 0:
        raise PreconditionError("r0 must be positive")
    norms = h_norm(f, q)
    if norms.h_norm > 1 + NORM_TOL:
        raise PreconditionError(f"h_norm(f) = {norms.h_norm:.17g} exceeds 1")
    N = dim.N
    s_cut = -math.log(r0)
    i2, info = exp_functional(f, gamma, q, full_output=True, hi=s_cut)
    log_pref = math.log(dim.omega) + 2 * N * math.log(r0) - math.log(2 * (N - 1))
    admissible = r0 ** (2 * N - 1) / dim.radial_const >= 1

    def bound(l2sq, h1sq):
        x = gamma * dim.radial_const * h1sq / r0 ** (2 * N - 1)
        if x > LOG_FLOAT_MAX:
            return math.inf, x
        tail = math.expm1(x) - x
        log_tail = math.log(tail) if tail > 0 else -math.inf
        return gamma * l2sq + (math.exp(log_pref + log_tail) if log_tail > -math.inf else 0.0), x

    b, x = bound(norms.l2 ** 2, norms.h1 ** 2)
    b_uniform, x_uniform = bound(1.0, 1.0)
    rep = ProbeReport("exterior_series", {"N": N, "r0": r0, "gamma": gamma})
    rep.rows.append({"r0": r0, "I2": i2, "bound": b, "uniform_bound": b_uniform, "x": x,
                     "margin": b - i2, "admissible_r0": admissible})
    rep.summary.update({"I2": i2, "bound": b, "uniform_bound": b_uniform, "x": x, "admissible_r0": admissible})
    if not admissible:
        rep.notices.append("r0 below the admissibility radius; the uniform bound is large")
    if not math.isfinite(b_uniform):
        rep.notices.append("uniform series bound exceeds float range")
    if not i2 <= b * (1 + 1e-9):
        rep.fail("I2 exceeds series bound", f, I2=i2, bound=b)
    return rep


# --------------------------------------------------------------------------
# auxiliary function on the inner ball


def admissible_radius(dim: Dimension | int) -> float:
    """Smallest ``r0`` with ``pi^N r0^{2N-1}/(N-1)! >= 1``."""
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    return dim.radial_const ** (1.0 / (2 * dim.N - 1))


def auxiliary_w_transform(f: LogRadialFunction, r0: float, q: QuadratureSpec = DEFAULT_QUADRATURE):
    """``w = (u - u(r0)) sqrt(1 + K ||u||^2_{H^1}/r0^{2N-1})`` on ``B(r0)``, 0 outside.

    Returns ``(w, report)``; the report checks ``hardy(w) <= 1`` and
    ``u^2 <= w^2 + d(r0)`` on every breakpoint.
    """
    dim = f.dim
    N = dim.N
    if not r0 > 0:
        raise PreconditionError("r0 must be positive")
    cond = r0 ** (2 * N - 1) / dim.radial_const
    if cond < 1:
        raise AdmissibilityError(
            f"admissibility pi^N r0^(2N-1)/(N-1)! >= 1 fails: value {cond:.6g} at r0={r0:g}")
    norms = h_norm(f, q)
    if norms.h_norm > 1 + NORM_TOL:
        raise PreconditionError(f"h_norm(f) = {norms.h_norm:.17g} exceeds 1")
    K = dim.radial_const * norms.h1 ** 2 / r0 ** (2 * N - 1)
    d = 1.0 + K
    c = math.sqrt(1.0 + K)
    s_cut = -math.log(r0)
    bp, vals = f.breakpoints, f.values
    if s_cut <= bp[0]:
        w = f.scaled(c)
    elif s_cut >= bp[-1]:
        w = LogRadialFunction(dim, [s_cut, s_cut + 1.0], [0.0, 0.0])
    else:
        u_cut = float(f(s_cut))
        keep = bp > s_cut
        grid = np.concatenate([[s_cut], bp[keep]])
        w = LogRadialFunction(dim, grid, c * (np.concatenate([[u_cut], vals[keep]]) - u_cut))
    hw = hardy_gradient_norm(w)
    grid = np.union1d(bp, w.breakpoints)
    slack = w(grid) ** 2 + d - f(grid) ** 2
    i = int(np.argmin(slack))
    rep = ProbeReport("auxiliary_w", {"N": N, "r0": r0})
    rep.summary.update({"hardy_w": hw, "c": c, "d_r0": d, "min_domination_slack": float(slack[i]),
                        "worst_s": float(grid[i]), "admissibility_value": cond})
    rep.rows.append({"r0": r0, "hardy_w": hw, "c": c, "d_r0": d, "min_slack": float(slack[i])})
    if hw > 1 + NORM_TOL:
        rep.fail("hardy(w) exceeds 1", f, hardy_w=hw)
    if slack[i] < -NORM_TOL * max(1.0, float(np.max(f.values ** 2))):
        rep.fail("pointwise domination fails", f, s=float(grid[i]), slack=float(slack[i]))
    return w, rep


# --------------------------------------------------------------------------
# ball inequality reduced to dimension two


def _shifted_pieces(lo, hi, logf, q):
    """``log int_lo^hi exp(logf(x, seg)) dx`` per piece, shifted by the endpoint maximum."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    seg = np.arange(lo.size)
    shift = np.maximum(logf(lo, seg), logf(hi, seg))

    def integrand(x, s):
        return np.exp(logf(x, s[:, None]) - shift[s][:, None])

    vals, _ = integrate_pieces(integrand, lo, hi, q, abs_floor=0.0)
    with np.errstate(divide="ignore"):
        return list(shift + np.log(vals))


def ball_to_2d_reduction(f: LogRadialFunction, R: float = 1.0,
                         q: QuadratureSpec = DEFAULT_QUADRATURE, tol: float = 1e-6) -> ProbeReport:
    """Check the change of variable ``sigma = r^N`` on ``B(R)`` by two quadratures.

    Left sides are integrated in ``r``, right sides in ``sigma``, with
    ``w(sigma) = sqrt(N pi^{N-1}/(N-1)!) v(sigma^{1/N})``:

        omega int_0^R e^{gamma_N v^2} r^{2N-1} dr = (2 pi^N/N!) int_0^{R^N} e^{4 pi w^2} sigma dsigma
        omega int_0^R v'^2 r dr = 2 pi int_0^{R^N} w'^2 sigma dsigma
    """
    dim = f.dim
    N, g = dim.N, dim.gamma
    if f.support_radius > R * (1 + 1e-12):
        raise PreconditionError(f"support radius {f.support_radius:.6g} exceeds R = {R:g}")
    bp, vals, b = f.breakpoints, f.values, f.slopes
    cw2 = N * math.pi ** (N - 1) / math.factorial(N - 1)

    def V_of_s(s, seg):
        return vals[seg] + b[seg] * (s - bp[seg])

    # Measure identity, left side in r.
    r_lo, r_hi = np.exp(-bp[1:]), np.exp(-bp[:-1])

    def log_left(r, seg):
        return g * V_of_s(-np.log(r), seg) ** 2 + (2 * N - 1) * np.log(r)

    logs_l = _shifted_pieces(r_lo, r_hi, log_left, q)
    rm, r0 = math.exp(-bp[-1]), math.exp(-bp[0])
    logs_l.append(g * vals[-1] ** 2 + 2 * N * math.log(rm) - math.log(2 * N))
    if R > r0:
        logs_l.append(math.log(R ** (2 * N) - r0 ** (2 * N)) - math.log(2 * N))
    left = math.log(dim.omega) + _logsumexp(logs_l)

    # Measure identity, right side in sigma.
    s_lo, s_hi = np.exp(-N * bp[1:]), np.exp(-N * bp[:-1])

    def log_right(sig, seg):
        return 4 * math.pi * cw2 * V_of_s(-np.log(sig) / N, seg) ** 2 + np.log(sig)

    logs_r = _shifted_pieces(s_lo, s_hi, log_right, q)
    sm, s0 = math.exp(-N * bp[-1]), math.exp(-N * bp[0])
    logs_r.append(4 * math.pi * cw2 * vals[-1] ** 2 + 2 * math.log(sm) - math.log(2))
    if R ** N > s0:
        logs_r.append(math.log(R ** (2 * N) - s0 ** 2) - math.log(2))
    right = math.log(2 * math.pi ** N / math.factorial(N)) + _logsumexp(logs_r)
    measure_gap = _log_rel_gap(left, right)

    rep = ProbeReport("ball_to_2d", {"N": N, "R": R})
    row = {"log_measure_left": left, "log_measure_right": right, "measure_rel_gap": measure_gap}

    if f.has_jump:
        rep.notices.append("gradient identity undefined for a jump at the support edge")
        grad_gap = 0.0
    else:
        nz = b != 0
        if np.any(nz):
            lo_r, hi_r, lo_s, hi_s = r_lo[nz], r_hi[nz], s_lo[nz], s_hi[nz]
            bn = b[nz]

            def gl(r, seg):
                return bn[seg] ** 2 / r

            def gr(sig, seg):  # w'(sigma)^2
                return cw2 * bn[seg] ** 2 / (N * sig) ** 2

            vl, _ = integrate_pieces(lambda x, s: gl(x, s[:, None]), lo_r, hi_r, q, abs_floor=0.0)
            vr, _ = integrate_pieces(lambda x, s: gr(x, s[:, None]) * x, lo_s, hi_s, q, abs_floor=0.0)
            grad_left = dim.omega * math.fsum(vl)
            grad_right = 2 * math.pi * math.fsum(vr)
        else:
            grad_left = grad_right = 0.0
        grad_gap = _rel_gap(grad_left, grad_right)
        row.update({"grad_left": grad_left, "grad_right": grad_right, "grad_rel_gap": grad_gap})
    rep.rows.append(row)
    rep.summary.update({"measure_rel_gap": measure_gap, "grad_rel_gap": grad_gap,
                        "max_rel_gap": max(measure_gap, grad_gap)})
    if measure_gap > tol:
        rep.fail("measure identity mismatch", f, left=left, right=right)
    if grad_gap > tol:
        rep.fail("gradient identity mismatch", f, left=row["grad_left"], right=row["grad_right"])
    return rep


# --------------------------------------------------------------------------
# half-log transform and the one-dimensional reduction


def half_log_transform(f: LogRadialFunction, gamma: float | None = None,
                       q: QuadratureSpec = DEFAULT_QUADRATURE, tol: float = 1e-8):
    """``w(t) = sqrt(gamma_N) v(t/2)`` in the s-variable, i.e. ``sqrt(gamma_N) u(e^{-t/2})``.

    Returns ``(w, report)``.  Left sides of the three identities are computed
    on the t-line from ``w``; right sides from ``u`` on ``R^{2N}``.
    """
    ok, why = is_admissible(f)
    if not ok:
        raise AdmissibilityError(f"not admissible: {why}")
    dim = f.dim
    N, gN = dim.N, dim.gamma
    gamma = gN / 2 if gamma is None else gamma
    w = PiecewiseLinear(2.0 * f.breakpoints, math.sqrt(gN) * f.values)
    w4_left = math.sqrt(w.derivative_sq_integral())
    w4_right = math.sqrt(N) * hardy_gradient_norm(f)
    w5_left, _ = weighted_integral(w, lambda v, b: v * v, N, q)
    w5_right = 4 * N * l2_norm(f, q) ** 2
    w6_left, _ = log_exp_integral(w, gamma / gN, N, q)
    w6_right = math.log(dim.radial_const) + log_exp_functional(f, gamma, q)[0]
    gaps = {"w4": _rel_gap(w4_left, w4_right), "w5": _rel_gap(w5_left, w5_right),
            "w6": _log_rel_gap(w6_left, w6_right)}
    rep = ProbeReport("half_log", {"N": N, "gamma": gamma})
    rep.rows.append({"w4_left": w4_left, "w4_right": w4_right, "w5_left": w5_left, "w5_right": w5_right,
                     "w6_log_left": w6_left, "w6_log_right": w6_right,
                     **{f"{k}_rel_gap": v for k, v in gaps.items()}})
    rep.summary.update({f"{k}_rel_gap": v for k, v in gaps.items()})
    rep.summary["max_rel_gap"] = max(gaps.values())
    for k, v in gaps.items():
        if v > tol:
            rep.fail(f"identity {k} mismatch", f, rel_gap=v)
    return w, rep


def one_d_reduced_check(w: PiecewiseLinear, beta: float, eps: float, N: int,
                        q: QuadratureSpec = DEFAULT_QUADRATURE) -> ProbeReport:
    """``int (e^{beta w^2} - 1) e^{-Nt} dt <= C_beta int w^2 e^{-Nt} dt``.

    Also checks the two halves split at ``T0 = sup{t : w(t) <= 1}``:
    ``I1 <= M beta int_{t<T0} w^2 e^{-Nt}`` and
    ``I2 <= e^{beta C_eps}/(1 - beta(1+eps)) int_{t>T0} w^2 e^{-Nt}``.
    """
    if not (0 < beta < 1):
        raise PreconditionError("beta must lie in (0, 1)")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    if beta * (1 + eps) >= 1:
        raise PreconditionError(f"beta(1+eps) = {beta * (1 + eps):g} must be < 1")
    if np.any(w.values < 0):
        raise PreconditionError("w must be nonnegative")
    if np.any(np.diff(w.values) < 0):
        raise PreconditionError("w must be nondecreasing")
    if w.has_jump:
        raise PreconditionError("w must vanish for t <= t_0")
    energy = w.derivative_sq_integral()
    if energy > N * (1 + NORM_TOL):
        raise PreconditionError(f"||w'||^2 = {energy:.17g} exceeds N = {N}")

    cb = c_beta(beta, eps)
    rep = ProbeReport("one_d_reduced", {"N": N, "beta": beta, "eps": eps, "M": M_CONST,
                                        "C_eps": c_eps(eps), "C_beta": cb})

    def lhs(lo, hi):
        lv, _ = log_exp_integral(w, beta, N, q, lo, hi)
        return 0.0 if lv == -math.inf else math.exp(lv)

    def rhs(lo, hi):
        return weighted_integral(w, lambda v, b: v * v, N, q, lo, hi)[0]

    L, Rv = lhs(-math.inf, math.inf), rhs(-math.inf, math.inf)
    above = w.values > 1
    if not np.any(above):
        T0 = math.inf
    else:
        j = int(np.argmax(above))
        t0, t1, v0, v1 = w.breakpoints[j - 1], w.breakpoints[j], w.values[j - 1], w.values[j]
        T0 = float(t0 + (1 - v0) * (t1 - t0) / (v1 - v0))
    I1, R1 = lhs(-math.inf, T0), rhs(-math.inf, T0)
    I2, R2 = (lhs(T0, math.inf), rhs(T0, math.inf)) if T0 < math.inf else (0.0, 0.0)
    b1, b2 = M_CONST * beta * R1, math.exp(beta * c_eps(eps)) / (1 - beta * (1 + eps)) * R2
    rel = 1e-9
    rep.rows.append({"lhs": L, "rhs": Rv, "bound": cb * Rv, "margin": cb * Rv - L, "T0": T0,
                     "I1": I1, "I1_bound": b1, "I2": I2, "I2_bound": b2})
    rep.summary.update({"lhs": L, "bound": cb * Rv, "margin": cb * Rv - L, "T0": T0})
    if L > cb * Rv * (1 + rel):
        rep.fail("reduced inequality fails", w, lhs=L, bound=cb * Rv)
    if I1 > b1 * (1 + rel):
        rep.fail("I1 bound fails", w, I1=I1, bound=b1)
    if I2 > b2 * (1 + rel):
        rep.fail("I2 bound fails", w, I2=I2, bound=b2)
    return rep


# --------------------------------------------------------------------------
# Adachi-type ratio


def moser_adachi_floor(dim: Dimension, k: float) -> float:
    """Inner-ball value ``(pi^N/N!)(1 - e^{-2Nk})`` of ``int (e^{gamma_N f_k^2} - 1)``."""
    return dim.ball_volume * -math.expm1(-2 * dim.N * k)


def adachi_ratio_probe(corpus: Sequence[LogRadialFunction], gamma: float, dim: Dimension | int,
                       q: QuadratureSpec = DEFAULT_QUADRATURE, moser_ks: Sequence[float] = (5, 10, 20, 40),
                       threads: int = 1) -> ProbeReport:
    """``exp_functional(u, gamma) / ||u||_2^2`` over admissible members plus the Moser series.

    Inadmissible members (including the zero function) are skipped with a
    notice.  At ``gamma = gamma_N`` the Moser rows carry the inner-ball floor
    and the verdict that the ratio grows while ``l2 -> 0``.
    """
    dim = dim if isinstance(dim, Dimension) else Dimension(dim)
    rep = ProbeReport("adachi_ratio", {"N": dim.N, "gamma": gamma, "gamma_over_gamma_N": gamma / dim.gamma})
    members = []
    for i, f in enumerate(corpus):
        ok, why = is_admissible(f)
        if ok:
            members.append((i, f))
        else:
            rep.notices.append(f"member {i} skipped: {why}")

    def one(item):
        i, f = item
        F = exp_functional(f, gamma, q)
        l2sq = l2_norm(f, q) ** 2
        return {"series": "corpus", "member": i, "functional": F, "l2_sq": l2sq, "ratio": F / l2sq}

    rows = pmap(one, members, threads)
    rep.rows.extend(rows)
    rep.summary["corpus_max_ratio"] = max((r["ratio"] for r in rows), default=math.nan)
    rep.summary["skipped"] = len(corpus) - len(members)

    def moser_row(k):
        f = moser_function(dim, k)
        F = exp_functional(f, gamma, q)
        l2sq = l2_norm(f, q) ** 2
        return {"series": "moser", "k": float(k), "functional": F, "l2_sq": l2sq, "ratio": F / l2sq,
                "floor": moser_adachi_floor(dim, k) if math.isclose(gamma, dim.gamma) else math.nan}

    series = pmap(moser_row, list(moser_ks), threads)
    rep.rows.extend(series)
    ratios = [r["ratio"] for r in series]
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    rep.summary.update({"moser_ratio_increasing": increasing, "moser_ratio_decreasing": decreasing})
    if gamma < dim.gamma:
        if not math.isfinite(rep.summary["corpus_max_ratio"]) and rows:
            rep.fail("infinite ratio below gamma_N", "corpus")
    elif math.isclose(gamma, dim.gamma):
        for r in series:
            if r["functional"] < r["floor"] * (1 - 1e-12):
                rep.fail("functional below inner-ball floor", f"moser k={r['k']}",
                         functional=r["functional"], floor=r["floor"])
        l2s = [r["l2_sq"] for r in series]
        if not (increasing and all(b < a for a, b in zip(l2s, l2s[1:]))):
            rep.fail("divergence witness not observed", f"moser k={list(moser_ks)}")
    return rep
