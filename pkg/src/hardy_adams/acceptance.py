"""Acceptance suite: one function per criterion, each returning a :class:`CriterionResult`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .concentration import (
    asymptotic_orlicz_limit,
    concentrate,
    concentration_orlicz_integral,
    moser_function,
    moser_profile,
    profile_l2_distance,
)
from .corpus import admissible_corpus, function_corpus, profile_corpus
from .decomposition import ExtractionConfig, decompose
from .fixtures import builtin_manifest, load_manifest, moser_family, planted_families
from .inequalities import (
    PreconditionError,
    ball_to_2d_reduction,
    half_log_transform,
    one_d_reduced_check,
    sharpness_fit,
)
from .orlicz import OrliczSpec, exp_functional, log_exp_functional, orlicz_lower_bound_moser, orlicz_norm
from .parallel import pmap
from .radial import Dimension, PiecewiseLinear, hardy_gradient_norm, radial_bound_check, step_function
from .report import canonical_json


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    tolerance: str
    measured: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    elapsed: float = 0.0  # wall time; excluded from serialisation

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name} (tol {self.tolerance})"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "tolerance": self.tolerance, "measured": self.measured, "failures": self.failures}


_ZERO = PiecewiseLinear([0.0, 1.0], [0.0, 0.0])


def _rng(seed: int, criterion: int) -> np.random.Generator:
    return np.random.default_rng([seed, criterion])


def criterion_1(seed: int = 0, threads: int = 1) -> CriterionResult:
    ks = (1, 5, 10, 20, 40)
    measured, failures = {}, []
    for N in (2, 3):
        for k in ks:
            h = hardy_gradient_norm(moser_function(N, k))
            measured[f"N{N}_k{k}"] = h
            if abs(h - 1.0) > 1e-10:
                failures.append({"N": N, "k": k, "hardy": h})
    return CriterionResult(1, "Moser Hardy identity", not failures, "abs 1e-10", measured, failures)


def criterion_2(seed: int = 0, threads: int = 1) -> CriterionResult:
    d = Dimension(2)
    ks = (1, 5, 10, 20, 40)
    norms = pmap(lambda k: orlicz_norm(moser_function(d, k)), ks, threads)
    lower = [orlicz_lower_bound_moser(k, d) for k in ks]
    target = 1 / math.sqrt(d.gamma)
    failures = []
    if not all(b < a for a, b in zip(norms, norms[1:])):
        failures.append({"reason": "not decreasing", "orlicz": norms})
    rel = abs(norms[-1] - target) / target
    if rel > 0.05:
        failures.append({"reason": "k=40 not within 5%", "rel": rel})
    for k, n, lb in zip(ks, norms, lower):
        if n < lb:
            failures.append({"reason": "below lower bound", "k": k, "orlicz": n, "lower": lb})
    return CriterionResult(2, "Orlicz limit of the Moser sequence", not failures,
                           "rel 5% at k=40; ordering exact",
                           {"k": list(ks), "orlicz": norms, "lower_bound": lower, "target": target, "rel_k40": rel},
                           failures)


def criterion_3(seed: int = 0, threads: int = 1) -> CriterionResult:
    """Full-space functional at the sharp exponent against the inner-ball interval."""
    measured, failures = {}, []
    for N in (2, 3):
        d = Dimension(N)
        for k in (10, 20, 40):
            f = moser_function(d, k)
            F = exp_functional(f, d.gamma)
            inner = exp_functional(f, d.gamma, lo=float(k))
            lo_b = d.ball_volume * -math.expm1(-2 * N * k)
            hi_b = d.ball_volume + 1e-6
            measured[f"N{N}_k{k}"] = {"functional": F, "interval": [lo_b, hi_b], "inner_ball_part": inner}
            if not (lo_b <= F <= hi_b):
                failures.append({"N": N, "k": k, "functional": F, "interval": [lo_b, hi_b]})
    return CriterionResult(3, "Adachi sharpness witness", not failures, "interval, abs 1e-6", measured, failures)


def criterion_4(seed: int = 0, threads: int = 1) -> CriterionResult:
    d = Dimension(2)
    _, fit = sharpness_fit(d, 1.2 * d.gamma, range(10, 26), threads=threads)
    ok = fit["rel_error"] <= 0.15
    return CriterionResult(4, "sharpness slope at 1.2 gamma_N", ok, "rel 15%", fit,
                           [] if ok else [fit])


def criterion_5(seed: int = 0, threads: int = 1) -> CriterionResult:
    d = Dimension(2)
    failures, worst = [], 0.0
    for c in (0.5, 1.0, 2.0):
        for R in (0.5, 1.0, 2.0):
            for theta in (0.5, 1.0, 5.0):
                f = step_function(d, c, R)
                lam = orlicz_norm(f, OrliczSpec(threshold=theta))
                V = d.ball_volume * R ** (2 * d.N)
                exact = c / math.sqrt(math.log1p(theta / V))
                rel = abs(lam - exact) / exact
                worst = max(worst, rel)
                if rel > 1e-10:
                    failures.append({"c": c, "R": R, "theta": theta, "orlicz": lam, "exact": exact})
    return CriterionResult(5, "step-function closed form", not failures, "rel 1e-10",
                           {"max_rel_error": worst}, failures)


def criterion_6(seed: int = 0, threads: int = 1) -> CriterionResult:
    d = Dimension(2)
    corpus = admissible_corpus(d, 50, _rng(seed, 6))
    pairs = [(b, e) for b in (0.3, 0.5, 0.7) for e in (0.2, 0.5)]

    def one(f):
        ball = ball_to_2d_reduction(f, R=f.support_radius, tol=1e-8)
        w, half = half_log_transform(f, tol=1e-8)
        checks = {}
        for b, e in pairs:
            try:
                rep = one_d_reduced_check(w, b, e, d.N)
                checks[f"{b}_{e}"] = rep.passed
            except PreconditionError:
                checks[f"{b}_{e}"] = None
        return ball, half, checks

    results = pmap(one, corpus, threads)
    failures = []
    ball_gap = max(r[0].summary["max_rel_gap"] for r in results)
    half_gap = max(r[1].summary["max_rel_gap"] for r in results)
    skipped = sorted({k for r in results for k, v in r[2].items() if v is None})
    for i, (ball, half, checks) in enumerate(results):
        if not ball.passed:
            failures.append({"member": i, "check": "ball_to_2d", "detail": ball.failures})
        if not half.passed:
            failures.append({"member": i, "check": "half_log", "detail": half.failures})
        for k, v in checks.items():
            if v is False:
                failures.append({"member": i, "check": f"one_d {k}"})
    return CriterionResult(6, "identity suite on 50 members", not failures, "rel 1e-8",
                           {"max_ball_rel_gap": ball_gap, "max_half_log_rel_gap": half_gap,
                            "pairs_outside_precondition": skipped}, failures)


def criterion_7(seed: int = 0, threads: int = 1) -> CriterionResult:
    fam, overrides, planted = load_manifest(builtin_manifest("two_level"))
    cfg = ExtractionConfig(**overrides)
    res = decompose(fam, cfg, threads=threads)
    truth = planted_families(fam.dim, planted, fam.indices)
    y_max = cfg.y_grid[-1]
    failures = []
    n_last = fam.indices[-1]
    measured = {"levels": len(res.levels), "stop_cause": res.stop_cause}
    if len(res.levels) != 2:
        failures.append({"reason": "level count", "levels": len(res.levels)})
    matched = []
    for lv in res.levels:
        a = lv.scales.get(n_last)
        j = min(range(len(truth)), key=lambda t: abs(math.log(truth[t].scale(n_last) / a)) if a else math.inf)
        prof = truth[j].profile
        err = profile_l2_distance(lv.profile, prof, y_max) / profile_l2_distance(prof, _ZERO, y_max)
        e_rel = abs(lv.energy - prof.energy()) / prof.energy()
        matched.append({"level": lv.number, "planted": planted[j]["profile"], "l2_rel_error": err,
                        "energy": lv.energy, "energy_rel_error": e_rel})
        if err > 0.05:
            failures.append({"reason": "profile L2 error", "level": lv.number, "error": err})
        if e_rel > 0.05:
            failures.append({"reason": "energy", "level": lv.number, "energy": lv.energy})
    if len({m["planted"] for m in matched}) != len(matched):
        failures.append({"reason": "two levels matched one planted profile"})
    measured["matched"] = matched
    if res.orthogonality:
        o = res.orthogonality[0]
        dev = max(abs(s - math.log(n)) for n, s in zip(o["indices"], o["statistic"]))
        measured["orthogonality_max_abs_dev_from_log_n"] = dev
        if dev > 4 * np.finfo(float).eps * math.log(n_last):
            failures.append({"reason": "orthogonality statistic differs from log n", "dev": dev})
    else:
        failures.append({"reason": "no orthogonality statistic"})
    led = res.energy_ledger
    measured["ledger"] = {k: led[k] for k in ("raw_rel_defect", "limit_rel_defect", "passed")}
    if not led.get("passed"):
        failures.append({"reason": "energy ledger", "limit_rel_defect": led["limit_rel_defect"]})
    if res.diagnostics:
        failures.append({"reason": "diagnostics", "diagnostics": res.diagnostics})
    return CriterionResult(7, "two-level decomposition recovery", not failures, "5%; orthogonality exact",
                           measured, failures)


def criterion_8(seed: int = 0, threads: int = 1) -> CriterionResult:
    fam = moser_family(2, 64)
    res = decompose(fam, ExtractionConfig(), threads=threads)
    failures = []
    measured = {"levels": len(res.levels), "stop_cause": res.stop_cause}
    if len(res.levels) != 1:
        failures.append({"reason": "level count", "levels": len(res.levels)})
    if res.levels:
        lv = res.levels[0]
        bad = [n for n in fam.indices if lv.scales.get(n) != float(n)]
        if bad:
            failures.append({"reason": "alpha(n) != n", "indices": bad})
        L = moser_profile()
        err = profile_l2_distance(lv.profile, L, lv.profile.breakpoints[-1])
        measured["profile_l2_error"] = err
        if err > 1e-6:
            failures.append({"reason": "profile", "error": err})
    rel = max(res.remainder_rel_max())
    measured["remainder_rel_max"] = rel
    if rel > 1e-12:
        failures.append({"reason": "remainder not zero", "rel_max": rel})
    return CriterionResult(8, "Moser self-test", not failures, "alpha exact; L2 1e-6; remainder rel 1e-12",
                           measured, failures)


def criterion_9(seed: int = 0, threads: int = 1) -> CriterionResult:
    d = Dimension(2)
    corpus = function_corpus(d, 100, _rng(seed, 9))
    profiles = profile_corpus(100, _rng(seed, 90))
    gammas = [0.25 * d.gamma, 0.5 * d.gamma, d.gamma, 2 * d.gamma]

    def one(f):
        bound = radial_bound_check(f)
        lam = orlicz_norm(f)
        lam3 = orlicz_norm(f.scaled(3.0))
        logs = [log_exp_functional(f, g)[0] for g in gammas]
        return bound.passed, abs(lam3 - 3 * lam) / (3 * lam), all(b > a for a, b in zip(logs, logs[1:]))

    def one_profile(psi):
        lim = asymptotic_orlicz_limit(psi, d)
        lam = 1.25 * lim
        ci = concentration_orlicz_integral(psi, 50.0, lam, d)
        direct = exp_functional(concentrate(psi, 50.0, d), 1 / lam ** 2)
        return abs(ci.value - direct) / direct

    rows = pmap(one, corpus, threads)
    prow = pmap(one_profile, profiles, threads)
    failures = []
    for i, (b, h, m) in enumerate(rows):
        if not b:
            failures.append({"member": i, "check": "radial bound"})
        if h > 1e-8:
            failures.append({"member": i, "check": "homogeneity", "rel": h})
        if not m:
            failures.append({"member": i, "check": "monotone in gamma"})
    for i, r in enumerate(prow):
        if r > 1e-6:
            failures.append({"member": i, "check": "concentration integral", "rel": r})
    return CriterionResult(9, "property corpus", not failures, "homogeneity rel 1e-8; integral rel 1e-6",
                           {"max_homogeneity_rel": max(r[1] for r in rows),
                            "max_integral_rel": max(prow)}, failures)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)


def run_criteria(seed: int = 0, threads: int = 1, only=None) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        num = int(fn.__name__.rsplit("_", 1)[1])
        if only is not None and num not in only:
            continue
        t = time.perf_counter()
        res = fn(seed, threads)
        res.elapsed = time.perf_counter() - t
        out.append(res)
    return out


def serialise(results) -> str:
    return canonical_json([r.to_dict() for r in results])


def criterion_10(first: list[CriterionResult], seed: int = 0, threads: int = 1) -> CriterionResult:
    """Re-run the same criteria and compare the serialisations byte for byte."""
    t = time.perf_counter()
    again = run_criteria(seed, threads, only={r.number for r in first})
    a, b = serialise(first), serialise(again)
    res = CriterionResult(10, "determinism of the suite", a == b, "bit-identical",
                          {"bytes": len(a), "identical": a == b},
                          [] if a == b else [{"reason": "serialisations differ"}])
    res.elapsed = time.perf_counter() - t
    return res


def run_acceptance(seed: int = 0, threads: int = 1, determinism: bool = True) -> list[CriterionResult]:
    results = run_criteria(seed, threads)
    if determinism:
        results.append(criterion_10(results, seed, threads))
    return results
