"""Iterative extraction of scales and profiles from a finite radial sequence.

Each level: estimate the Orlicz size ``A`` of the current remainders, pick
per-index scales from ``W_n(s) = 4 |v_n(s)/A|^2 - (2N-1) s``, rescale onto a
common profile grid, pass to a finite-n limit proxy, subtract the resulting
concentration and repeat.  All limits of the continuous statement are replaced
by declared proxies over the finite index set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .concentration import OrthogonalityReport, Profile, concentrate, orthogonality_series
from .orlicz import OrliczSpec, orlicz_norm
from .parallel import pmap
from .quadrature import DEFAULT_QUADRATURE, QuadratureSpec
from .radial import Dimension, LogRadialFunction, h_norm, hardy_gradient_norm, l2_norm, weighted_integral

A_RULES = ("last", "tail_max")
LIMIT_RULES = ("last", "richardson")


def default_y_grid() -> tuple:
    return tuple(np.arange(0.0, 4.0 + 1 / 32, 1 / 16))


@dataclass(frozen=True)
class ExtractionConfig:
    threshold: float = 1.0
    a_rule: str = "last"
    limit_rule: str = "last"
    argmax_slack: float = 1.0  # slack at index n is argmax_slack / n
    y_grid: tuple = field(default_factory=default_y_grid)
    stop_eps: float | None = None  # None: 0.05 * A_0
    stop_eps_rel: float = 0.05
    max_levels: int = 5
    orthogonality_bar: float = math.log(4.0)
    ledger_tol: float = 0.05
    zero_rtol: float = 1e-12
    force: bool = False

    def __post_init__(self):
        if self.a_rule not in A_RULES:
            raise ValueError(f"a_rule must be one of {A_RULES}")
        if self.limit_rule not in LIMIT_RULES:
            raise ValueError(f"limit_rule must be one of {LIMIT_RULES}")
        if self.stop_eps is not None and not self.stop_eps > 0:
            raise ValueError("stop_eps must be positive")
        if not self.stop_eps_rel > 0:
            raise ValueError("stop_eps_rel must be positive")
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.argmax_slack < 0:
            raise ValueError("argmax_slack must be nonnegative")
        y = np.asarray(self.y_grid, dtype=float)
        if y.ndim != 1 or y.size < 2 or y[0] != 0.0 or np.any(np.diff(y) <= 0):
            raise ValueError("y_grid must start at 0 and increase strictly")
        object.__setattr__(self, "y_grid", tuple(float(t) for t in y))

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold, "a_rule": self.a_rule, "limit_rule": self.limit_rule,
            "argmax_slack": self.argmax_slack, "y_grid": list(self.y_grid), "stop_eps": self.stop_eps,
            "stop_eps_rel": self.stop_eps_rel, "max_levels": self.max_levels,
            "orthogonality_bar": self.orthogonality_bar, "ledger_tol": self.ledger_tol,
            "zero_rtol": self.zero_rtol, "force": self.force,
        }


class SequenceFamily:
    """A finite sequence ``n -> u_n`` of radial functions on a common ``R^{2N}``."""

    def __init__(self, dim: Dimension | int, indices: Sequence[int], functions: Sequence[LogRadialFunction],
                 h_bound: float | None = None, q: QuadratureSpec = DEFAULT_QUADRATURE):
        self.dim = dim if isinstance(dim, Dimension) else Dimension(dim)
        self.indices = tuple(int(n) for n in indices)
        self.functions = tuple(functions)
        if not self.indices or len(self.indices) != len(self.functions):
            raise ValueError("need one function per index")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(n < 1 for n in self.indices):
            raise ValueError("indices must be positive")
        for f in self.functions:
            if f.dim != self.dim:
                raise ValueError("all functions must live in the family's dimension")
        self.h_norms = tuple(h_norm(f, q).h_norm for f in self.functions)
        if not all(math.isfinite(h) for h in self.h_norms):
            raise ValueError("family is not bounded in H (infinite norm member)")
        self.h_sup = max(self.h_norms)
        if h_bound is not None and self.h_sup > h_bound * (1 + 1e-12):
            raise ValueError(f"h_norm bound {h_bound:g} violated: max is {self.h_sup:.6g}")

    def __len__(self):
        return len(self.indices)

    def with_functions(self, functions, q: QuadratureSpec = DEFAULT_QUADRATURE) -> "SequenceFamily":
        return SequenceFamily(self.dim, self.indices, functions, q=q)


# --------------------------------------------------------------------------
# finite-n proxies


def _tail(values):
    return values[len(values) // 2:]


def limit_proxy(series, rule: str = "last"):
    """Finite-n limit of a scalar or vector series (first axis = index).

    ``richardson`` assumes geometric convergence: with ``d1, d2`` the last two
    differences and ``rho = <d1, d2>/|d2|^2``, the limit is
    ``x[-1] + rho/(1-rho) d1``.  Falls back to ``last`` with fewer than three
    terms, when the series has already converged, or when ``|rho| >= 1``.
    Returns ``(limit, info)``.
    """
    x = np.asarray(series, dtype=float)
    last = x[-1]
    if rule == "last":
        return last, {"rule": "last"}
    if rule != "richardson":
        raise ValueError(f"unknown limit rule {rule!r}")
    if x.shape[0] < 3:
        return last, {"rule": "last", "fallback": "fewer than three indices"}
    d1, d2 = np.ravel(x[-1] - x[-2]), np.ravel(x[-2] - x[-3])
    scale = max(float(np.max(np.abs(last))), 1e-300)
    if float(np.max(np.abs(d1))) <= 1e-14 * scale:
        return last, {"rule": "last", "fallback": "converged"}
    denom = float(d2 @ d2)
    if denom == 0:
        return last, {"rule": "last", "fallback": "zero second difference"}
    rho = float(d1 @ d2) / denom
    if not abs(rho) < 1:
        return last, {"rule": "last", "fallback": f"ratio {rho:.6g} not contracting"}
    return last + rho / (1 - rho) * (x[-1] - x[-2]), {"rule": "richardson", "ratio": rho}


def _trend_ok(series) -> bool:
    """Decreasing-trend verdict: all zero, or the final-half max below the first-half max."""
    s = np.asarray(series, dtype=float)
    if not np.any(s):
        return True
    h = len(s) // 2
    return bool(np.max(s[h:]) < np.max(s[:max(h, 1)]))


# --------------------------------------------------------------------------
# hypotheses and A


def _sup_left(f: LogRadialFunction, M: float) -> float:
    """``sup_{s <= M} |v(s)|``."""
    bp, vals = f.breakpoints, f.values
    if M < bp[0]:
        return 0.0
    pts = np.concatenate([vals[bp <= M], [float(f(M))]])
    return float(np.max(np.abs(pts)))


def hypotheses_check(fam: SequenceFamily, R_grid: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
                     M: float = 0.0, q: QuadratureSpec = DEFAULT_QUADRATURE) -> dict:
    """Trend verdicts for compactness at infinity, the left sup and the L^2 decay.

    Tail mass at ``R`` is ``int_{|x|>=R} u_n^2``; its limsup over ``n`` is
    proxied by the max over the final half of the indices, and that proxy
    must decrease in ``R``.
    """
    omega = fam.dim.omega
    decay = 2 * fam.dim.N
    tails = []
    for R in R_grid:
        hi = -math.log(R)
        tails.append([omega * weighted_integral(f, lambda v, b: v * v, decay, q, hi=hi)[0] for f in fam.functions])
    tail_proxy = [max(_tail(t)) for t in tails]
    sup_left = [_sup_left(f, M) for f in fam.functions]
    l2 = [l2_norm(f, q) for f in fam.functions]
    verdicts = {"tail": _trend_ok(tail_proxy), "sup_left": _trend_ok(sup_left), "l2_decay": _trend_ok(l2)}
    return {
        "R_grid": [float(R) for R in R_grid],
        "tail_mass": [[float(x) for x in t] for t in tails],
        "tail_limsup_proxy": [float(x) for x in tail_proxy],
        "M": float(M),
        "sup_left": sup_left,
        "l2": l2,
        "verdicts": verdicts,
        "passed": all(verdicts.values()),
    }


def estimate_A(fam: SequenceFamily, theta: float = 1.0, rule: str = "last",
               q: QuadratureSpec = DEFAULT_QUADRATURE, full_output: bool = False, threads: int = 1):
    """Limsup proxy of the Orlicz norms: last index, or max over the final half."""
    if rule not in A_RULES:
        raise ValueError(f"rule must be one of {A_RULES}")
    spec = OrliczSpec(threshold=theta)
    series = pmap(lambda f: orlicz_norm(f, spec, q), fam.functions, threads)
    A = series[-1] if rule == "last" else max(_tail(series))
    if full_output:
        return A, {"rule": rule, "series": series}
    return A


# --------------------------------------------------------------------------
# scales


@dataclass(frozen=True)
class ScaleWitness:
    index: int
    alpha: float
    a_n: float
    W_alpha: float
    v_alpha: float
    lower: float
    upper: float
    lower_ok: bool
    upper_ok: bool


def _select_scale(f: LogRadialFunction, A: float, slack: float):
    """Smallest breakpoint candidate ``s >= 0`` with ``W(s) >= sup W - slack``.

    ``W`` is convex on every linear piece and decreasing on the plateau, so
    its supremum over ``s >= 0`` is attained on ``{0} U breakpoints``.
    """
    N = f.dim.N
    bp = f.breakpoints
    cand = np.union1d([0.0], bp[bp >= 0])
    W = 4.0 * (f(cand) / A) ** 2 - (2 * N - 1) * cand
    a_n = float(np.max(W))
    i = int(np.argmax(W >= a_n - slack))
    return float(cand[i]), a_n, float(W[i])


def extract_scale(fam: SequenceFamily, A: float, slack: float = 1.0) -> dict:
    """Per-index scale and bracket witness.

    The bracket is ``(A/2) sqrt((2N-1) alpha) <= |v(alpha)| <= C sqrt(alpha - min(s_0, 0))``
    with ``C = sqrt((N-1)!/(2 pi^N)) max_n hardy(u_n)``.  The lower side holds
    up to the argmax slack; the upper side is exact by Cauchy-Schwarz.
    Indices with ``v_n = 0`` or with a zero scale get no scale.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    N = fam.dim.N
    C = math.sqrt(fam.dim.radial_const / 2) * max(hardy_gradient_norm(f) for f in fam.functions)
    scales, witnesses, skipped = {}, {}, []
    for n, f in zip(fam.indices, fam.functions):
        if f.is_zero:
            skipped.append((n, "zero function"))
            continue
        alpha, a_n, W_alpha = _select_scale(f, A, slack / n)
        if alpha <= 0:
            skipped.append((n, "scale at s = 0"))
            continue
        v_alpha = abs(float(f(alpha)))
        lower = 0.5 * A * math.sqrt((2 * N - 1) * alpha)
        upper = C * math.sqrt(alpha - min(f.breakpoints[0], 0.0))
        witnesses[n] = ScaleWitness(n, alpha, a_n, W_alpha, v_alpha, lower, upper,
                                    lower_ok=W_alpha >= -slack / n, upper_ok=v_alpha <= upper * (1 + 1e-12))
        scales[n] = alpha
    return {"scales": scales, "witnesses": witnesses, "skipped": skipped, "C": C}


# --------------------------------------------------------------------------
# profiles


@dataclass
class ProfileEstimate:
    profile: Profile | None
    energy: float
    raw: np.ndarray  # rows: rescaled v_n on the grid
    limit_info: dict
    clamped_mass: list
    psi_at_zero: list
    lemma_bar: float
    flagged: list


def _neg_mass(f: LogRadialFunction) -> float:
    """``int_{s<0} v(s)^2 ds`` exactly (piecewise-quadratic integrand)."""
    bp, vals = f.breakpoints, f.values
    if bp[0] >= 0:
        return 0.0
    hi = min(bp[-1], 0.0)
    starts, ends, a, b, plateau = f.pieces(-math.inf, hi)
    d = ends - starts
    total = math.fsum(d * (a * a + a * b * d + b * b * d * d / 3.0))
    if bp[-1] < 0:
        total += vals[-1] ** 2 * (0.0 - bp[-1])
    return total


def rescaled_profile_values(f: LogRadialFunction, alpha: float, y_grid) -> np.ndarray:
    gamma, N = f.dim.gamma, f.dim.N
    return math.sqrt(gamma / (2 * N * alpha)) * f(alpha * np.asarray(y_grid))


def extract_profile(fam: SequenceFamily, scales: dict, cfg: ExtractionConfig, A: float) -> ProfileEstimate:
    y = np.asarray(cfg.y_grid)
    idx = [n for n in fam.indices if n in scales]
    if len(idx) < 2:
        raise ValueError("profile extraction needs scales at two or more indices")
    fmap = dict(zip(fam.indices, fam.functions))
    gamma, N = fam.dim.gamma, fam.dim.N
    raw = np.array([rescaled_profile_values(fmap[n], scales[n], y) for n in idx])
    clamped = []
    for n in idx:
        a = scales[n]
        clamped.append(gamma / (2 * N * a) * _neg_mass(fmap[n]) / a)
    psi0 = [float(r[0]) for r in raw]
    values, info = limit_proxy(raw, cfg.limit_rule)
    values = np.array(values, dtype=float)
    values[0] = 0.0
    c_N = 0.5 * math.sqrt((2 * N - 1) * gamma / (2 * N))
    bar = c_N * A
    flagged = []
    if not np.any(values):
        return ProfileEstimate(None, 0.0, raw, info, clamped, psi0, bar, ["zero profile"])
    prof = Profile(y, values)
    energy = prof.energy()
    if math.sqrt(energy) < bar * (1 - 1e-9):
        flagged.append(f"profile energy below lemma bar: {math.sqrt(energy):.6g} < {bar:.6g}")
    if not _trend_ok(clamped):
        flagged.append("clamped negative-y mass not decreasing")
    return ProfileEstimate(prof, energy, raw, info, clamped, psi0, bar, flagged)


def subtract_level(fam: SequenceFamily, scales: dict, profile: Profile, limit_rule: str = "last",
                   q: QuadratureSpec = DEFAULT_QUADRATURE):
    """Remainders ``r_n = u_n - g_n`` and the energy-decrease check.

    Returns ``(remainder_family, report)``.  The decrease
    ``hardy^2(u_n) - hardy^2(r_n)`` is compared with ``||psi'||^2`` both raw at
    the largest index and after the configured limit proxy of the series.
    """
    out = []
    decrease = []
    idx = []
    for n, f in zip(fam.indices, fam.functions):
        if n in scales:
            r = f - concentrate(profile, scales[n], fam.dim)
            decrease.append(hardy_gradient_norm(f) ** 2 - hardy_gradient_norm(r) ** 2)
            idx.append(n)
        else:
            r = f
        out.append(r)
    energy = profile.energy()
    raw = decrease[-1] if decrease else math.nan
    lim, info = limit_proxy(decrease, limit_rule) if decrease else (math.nan, {})
    report = {
        "indices": idx,
        "decrease": decrease,
        "profile_energy": energy,
        "raw_rel_error": abs(raw - energy) / energy,
        "limit_decrease": float(lim),
        "limit_rel_error": abs(float(lim) - energy) / energy,
        "limit_info": info,
    }
    return fam.with_functions(out, q), report


# --------------------------------------------------------------------------
# full algorithm


@dataclass
class Level:
    number: int
    A: float
    scales: dict
    profile: Profile
    energy: float
    lemma_bar: float
    witnesses: dict
    clamped_mass: list
    psi_at_zero: list
    limit_info: dict
    subtraction: dict
    flags: list = field(default_factory=list)
    merged_from: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "A": self.A,
            "scales": {str(n): a for n, a in self.scales.items()},
            "profile": {"y": list(map(float, self.profile.breakpoints)),
                        "psi": list(map(float, self.profile.values))},
            "energy": self.energy,
            "lemma_bar": self.lemma_bar,
            "bracket": {str(n): {"alpha": w.alpha, "a_n": w.a_n, "W_alpha": w.W_alpha, "v_alpha": w.v_alpha,
                                 "lower": w.lower, "upper": w.upper, "lower_ok": w.lower_ok,
                                 "upper_ok": w.upper_ok} for n, w in self.witnesses.items()},
            "clamped_mass": self.clamped_mass,
            "psi_at_zero": self.psi_at_zero,
            "limit_info": self.limit_info,
            "subtraction": self.subtraction,
            "flags": self.flags,
            "merged_from": self.merged_from,
        }


@dataclass
class DecompositionResult:
    dim: Dimension
    indices: tuple
    config: ExtractionConfig
    levels: list
    remainders: tuple
    A_series: list
    A_diagnostics: list
    orthogonality: list
    energy_ledger: dict
    hypotheses: dict
    diagnostics: list
    stop_cause: str
    stop_eps: float
    _originals: tuple = ()

    def remainder_rel_max(self) -> list:
        out = []
        for u, r in zip(self._originals, self.remainders):
            out.append(r.max_abs / u.max_abs if u.max_abs > 0 else r.max_abs)
        return out

    @property
    def ok(self) -> bool:
        """No hard diagnostic and the energy ledger within tolerance."""
        return not self.diagnostics and self.energy_ledger.get("passed", True)

    def to_dict(self) -> dict:
        return {
            "N": self.dim.N,
            "indices": list(self.indices),
            "config": self.config.to_dict(),
            "stop_cause": self.stop_cause,
            "stop_eps": self.stop_eps,
            "A_series": self.A_series,
            "A_diagnostics": self.A_diagnostics,
            "levels": [lv.to_dict() for lv in self.levels],
            "orthogonality": self.orthogonality,
            "energy_ledger": self.energy_ledger,
            "hypotheses": self.hypotheses,
            "diagnostics": self.diagnostics,
            "remainder_max_abs": [r.max_abs for r in self.remainders],
            "remainder_rel_max": self.remainder_rel_max(),
        }


def _ortho_dict(i: int, j: int, rep: OrthogonalityReport) -> dict:
    return {"levels": [i, j], "indices": list(rep.indices), "statistic": list(rep.statistic),
            "orthogonal": rep.orthogonal, "bar": rep.bar, "margin": rep.margin}


def _level_ortho(a: Level, b: Level, bar: float) -> OrthogonalityReport | None:
    shared = [n for n in a.scales if n in b.scales]
    if not shared:
        return None
    return orthogonality_series(shared, [a.scales[n] for n in shared], [b.scales[n] for n in shared], bar)


def decompose(fam: SequenceFamily, cfg: ExtractionConfig | None = None,
              q: QuadratureSpec = DEFAULT_QUADRATURE, threads: int = 1) -> DecompositionResult:
    cfg = cfg or ExtractionConfig()
    hyp = hypotheses_check(fam, q=q)
    diagnostics = []
    if not hyp["passed"] and not cfg.force:
        diagnostics.append(f"hypotheses check failed: {hyp['verdicts']}")
        return DecompositionResult(fam.dim, fam.indices, cfg, [], fam.functions, [], [], [],
                                   {}, hyp, diagnostics, "hypotheses failed", math.nan, fam.functions)
    if not hyp["passed"]:
        diagnostics.append("hypotheses check failed; continuing under force")

    A0, info0 = estimate_A(fam, cfg.threshold, cfg.a_rule, q, full_output=True, threads=threads)
    stop_eps = cfg.stop_eps if cfg.stop_eps is not None else cfg.stop_eps_rel * A0
    A_series, A_diag = [A0], [info0]
    levels: list[Level] = []
    current = fam
    A = A0
    stop_cause = "max_levels reached"
    merges = 0

    while True:
        if A <= stop_eps or A == 0:
            stop_cause = "A below stop_eps"
            break
        if len(levels) >= cfg.max_levels:
            break
        sc = extract_scale(current, A, cfg.argmax_slack)
        if len(sc["scales"]) < 2:
            stop_cause = "no scale at two or more indices"
            break
        est = extract_profile(current, sc["scales"], cfg, A)
        if est.profile is None:
            stop_cause = "extracted profile is zero"
            diagnostics.append(f"level {len(levels) + 1}: zero profile")
            break
        nxt, sub = subtract_level(current, sc["scales"], est.profile, cfg.limit_rule, q)
        level = Level(len(levels) + 1, A, sc["scales"], est.profile, est.energy, est.lemma_bar,
                      sc["witnesses"], est.clamped_mass, est.psi_at_zero, est.limit_info, sub,
                      flags=list(est.flagged))
        if not all(w.lower_ok and w.upper_ok for w in sc["witnesses"].values()):
            level.flags.append("scale bracket violated at some index")
        if levels:
            prev = levels[-1]
            rep = _level_ortho(prev, level, cfg.orthogonality_bar)
            if rep is None or not rep.orthogonal:
                merges += 1
                if merges > cfg.max_levels:
                    stop_cause = "merge limit reached"
                    diagnostics.append("repeated non-orthogonal extractions")
                    break
                level, nxt = _merge(prev, level, current, nxt, cfg, q)
                levels[-1] = level
                current = nxt
                A_next, info = estimate_A(current, cfg.threshold, cfg.a_rule, q, full_output=True, threads=threads)
                A_series[-1] = A_next
                A_diag[-1] = info
                A = A_next
                continue
        levels.append(level)
        current = nxt
        A_next, info = estimate_A(current, cfg.threshold, cfg.a_rule, q, full_output=True, threads=threads)
        if A_next > A * (1 + 1e-9):
            diagnostics.append(f"A-series increased at level {len(levels)}: {A:.17g} -> {A_next:.17g}")
            A_series.append(A_next)
            A_diag.append(info)
            stop_cause = "A-series increased"
            break
        A_series.append(A_next)
        A_diag.append(info)
        A = A_next

    ortho = []
    for i in range(len(levels)):
        for j in range(i + 1, len(levels)):
            rep = _level_ortho(levels[i], levels[j], cfg.orthogonality_bar)
            if rep is not None:
                ortho.append(_ortho_dict(i + 1, j + 1, rep))
    ledger = energy_ledger(fam, levels, current.functions, cfg)
    return DecompositionResult(fam.dim, fam.indices, cfg, levels, current.functions, A_series, A_diag,
                               ortho, ledger, hyp, diagnostics, stop_cause, stop_eps, fam.functions)


def _merge(prev: Level, new: Level, current: SequenceFamily, nxt: SequenceFamily, cfg, q):
    """Re-extract one profile at the previous level's scale from both concentrations together."""
    y = np.asarray(cfg.y_grid)
    dim = current.dim
    rows = []
    idx = [n for n in prev.scales if n in new.scales]
    for n in idx:
        combined = concentrate(prev.profile, prev.scales[n], dim) + concentrate(new.profile, new.scales[n], dim)
        rows.append(rescaled_profile_values(combined, prev.scales[n], y))
    values, info = limit_proxy(np.array(rows), cfg.limit_rule)
    values = np.array(values, dtype=float)
    values[0] = 0.0
    prof = Profile(y, values)
    # Remainder relative to the family before the previous level.
    out = []
    for n, r in zip(nxt.indices, nxt.functions):
        if n in prev.scales and n in new.scales:
            g_old = concentrate(prev.profile, prev.scales[n], dim) + concentrate(new.profile, new.scales[n], dim)
            r = r + g_old - concentrate(prof, prev.scales[n], dim)
        out.append(r)
    merged = Level(prev.number, prev.A, {n: prev.scales[n] for n in idx}, prof, prof.energy(),
                   prev.lemma_bar, prev.witnesses, prev.clamped_mass, prev.psi_at_zero, info,
                   prev.subtraction, flags=prev.flags + new.flags + ["merged with a non-orthogonal level"],
                   merged_from=prev.merged_from + [prev.number, new.number])
    return merged, nxt.with_functions(out, q)


def energy_ledger(fam: SequenceFamily, levels: Sequence[Level], remainders, cfg: ExtractionConfig) -> dict:
    """``hardy^2(u_n) - sum_j ||psi_j'||^2 - hardy^2(r_n)`` relative to ``hardy^2(u_n)``.

    The verdict uses the configured limit proxy of the signed relative defect;
    the raw value at the largest index is reported alongside.
    """
    energies = [lv.energy for lv in levels]
    total = math.fsum(energies)
    rows, defects = [], []
    for n, u, r in zip(fam.indices, fam.functions, remainders):
        hu = hardy_gradient_norm(u) ** 2
        hr = hardy_gradient_norm(r) ** 2
        rel = (hu - total - hr) / hu if hu > 0 else 0.0
        rows.append({"index": n, "hardy_sq_u": hu, "sum_profile_energy": total, "hardy_sq_r": hr, "rel_defect": rel})
        defects.append(rel)
    lim, info = limit_proxy(defects, cfg.limit_rule)
    C_N = 0.5 * math.sqrt((2 * fam.dim.N - 1) * fam.dim.gamma / (2 * fam.dim.N))
    sum_A2 = math.fsum(lv.A ** 2 for lv in levels)
    a_bound = fam.h_sup ** 2 / C_N ** 2
    return {
        "rows": rows,
        "profile_energies": energies,
        "raw_rel_defect": abs(defects[-1]),
        "limit_rel_defect": abs(float(lim)),
        "limit_info": info,
        "tolerance": cfg.ledger_tol,
        "passed": abs(float(lim)) <= cfg.ledger_tol,
        "sum_A_sq": sum_A2,
        "sum_A_sq_bound": a_bound,
        "sum_A_sq_ok": sum_A2 <= a_bound,
    }
