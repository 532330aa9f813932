"""Command-line runner: ``hardy-adams <subcommand> [--config F] [--out DIR] [--threads N] [--seed S]``.

Every subcommand writes ``<subcommand>.json`` (nested report with config hash
and constant table) and ``<subcommand>.csv`` (flat series) into ``--out``.
Exit status: 0 on success, 1 when a check fails or a numerical diagnostic is
raised (reports are still written), 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import inequalities as ineq
from .acceptance import run_acceptance
from .concentration import moser_function
from .config import ConfigError, load_config
from .corpus import admissible_corpus, function_corpus
from .decomposition import ExtractionConfig, decompose
from .fixtures import builtin_manifest, load_manifest, moser_family
from .orlicz import OrliczSpec, orlicz_lower_bound_moser, orlicz_norm
from .quadrature import QuadratureSpec
from .radial import Dimension, h_norm, radial_bound_check, step_function, strict_inclusion_witness
from .report import envelope, write_report
from .textio import atomic_write_text, dumps, load

SUBCOMMANDS = ("norms", "moser", "adams", "adachi", "reduce", "decompose", "selftest")

MOSER_COLUMNS = ["k", "hardy", "l2", "orlicz", "lower_bound", "grad_l2", "h_norm", "bound_ok"]


class Context:
    def __init__(self, cfg: dict, base_dir: Path):
        self.cfg = cfg
        self.dim = Dimension(cfg["N"])
        self.q = QuadratureSpec(**cfg["quadrature"])
        self.threads = cfg["threads"]
        self.seed = cfg["seed"]
        self.base_dir = base_dir

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


# --------------------------------------------------------------------------
# subcommands; each returns (results, rows, columns, failed)


def _build_function(ctx: Context, spec: dict):
    kind = spec["kind"]
    if kind == "moser":
        return f"moser k={spec['k']:g}", moser_function(ctx.dim, spec["k"])
    if kind == "step":
        return f"step c={spec['c']:g} R={spec['R']:g}", step_function(ctx.dim, spec["c"], spec["R"])
    if kind == "witness":
        S = spec.get("S", 20.0)
        return f"witness S={S:g}", strict_inclusion_witness(ctx.dim, S)
    path = Path(spec["path"])
    if not path.is_absolute():
        path = ctx.base_dir / path
    f = load(path)
    if getattr(f, "dim", None) != ctx.dim:
        raise ConfigError(f"config error at /norms/functions: {path}: not a radial function in N={ctx.dim.N}", "/norms/functions")
    return str(spec["path"]), f


def run_norms(ctx: Context):
    section = ctx.cfg["norms"]
    spec = OrliczSpec(threshold=section["theta"])
    rows, failed = [], False
    for i, fs in enumerate(section["functions"]):
        label, f = _build_function(ctx, fs)
        label = fs.get("label", label)
        nr = h_norm(f, ctx.q)
        bc = radial_bound_check(f, ctx.q)
        lam = orlicz_norm(f, spec, ctx.q)
        rows.append({"entry": i, "label": label, "l2": nr.l2, "grad_l2": nr.grad_l2, "hardy": nr.hardy_grad,
                     "h_norm": nr.h_norm, "error_bound": nr.error_bound, "orlicz": lam,
                     "bound_ok": bc.passed, "bound_min_slack": bc.worst_slack})
        failed |= not bc.passed
    return {"theta": section["theta"], "functions": rows}, rows, None, failed


def run_moser(ctx: Context):
    section = ctx.cfg["moser"]
    spec = OrliczSpec(threshold=section["theta"])
    rows = []
    for k in section["k"]:
        f = moser_function(ctx.dim, k)
        nr = h_norm(f, ctx.q)
        lam = orlicz_norm(f, spec, ctx.q)
        lb = orlicz_lower_bound_moser(k, ctx.dim, section["theta"])
        rows.append({"k": float(k), "hardy": nr.hardy_grad, "l2": nr.l2, "orlicz": lam, "lower_bound": lb,
                     "grad_l2": nr.grad_l2, "h_norm": nr.h_norm, "bound_ok": lam >= lb * (1 - 1e-10)})
    limit = 1 / math.sqrt(ctx.dim.gamma) if section["theta"] == 1.0 else math.nan
    orl = [r["orlicz"] for r in rows]
    order = np.argsort([r["k"] for r in rows])
    decreasing = all(orl[b] < orl[a] for a, b in zip(order, order[1:]))
    failed = not all(r["bound_ok"] for r in rows)
    results = {"theta": section["theta"], "series": rows, "orlicz_limit": limit,
               "orlicz_decreasing_in_k": decreasing}
    return results, rows, MOSER_COLUMNS, failed


def run_adams(ctx: Context):
    section = ctx.cfg["adams"]
    corpus = function_corpus(ctx.dim, section["corpus_size"], ctx.rng(1))
    corpus += [ineq.normalized_moser(ctx.dim, k, ctx.q) for k in section["moser_k"]]
    probes, rows, failed = [], [], False
    for factor in section["gamma_factors"]:
        rep = ineq.adams_sup_probe(corpus, factor * ctx.dim.gamma, ctx.dim, ctx.q,
                                   moser_ks=section["fit_k"], slope_tol=section["slope_tol"],
                                   threads=ctx.threads)
        probes.append(rep.to_dict())
        rows.extend({"gamma_factor": factor, **r} for r in rep.rows)
        failed |= not rep.passed
    maxima = [p["summary"]["max_log_value"] for p in probes]
    order = np.argsort(section["gamma_factors"])
    monotone = all(maxima[b] >= maxima[a] for a, b in zip(order, order[1:]))
    failed |= not monotone
    return {"probes": probes, "max_log_value_monotone_in_gamma": monotone}, rows, None, failed


def run_adachi(ctx: Context):
    section = ctx.cfg["adachi"]
    corpus = admissible_corpus(ctx.dim, section["corpus_size"], ctx.rng(2))
    probes, rows, failed = [], [], False
    for factor in section["gamma_factors"]:
        rep = ineq.adachi_ratio_probe(corpus, factor * ctx.dim.gamma, ctx.dim, ctx.q,
                                      moser_ks=section["moser_k"], threads=ctx.threads)
        probes.append(rep.to_dict())
        rows.extend({"check": "ratio", "gamma_factor": factor, **r} for r in rep.rows)
        failed |= not rep.passed
    members = [(f"corpus {i}", f) for i, f in enumerate(corpus)]
    members += [(f"moser k={k:g}", moser_function(ctx.dim, k)) for k in section["moser_k"]]
    transforms, reduced, skipped = [], [], set()
    for label, f in members:
        w, half = ineq.half_log_transform(f, q=ctx.q)
        transforms.append({"member": label, **half.to_dict()})
        rows.append({"check": "half_log", "member": label, **half.rows[0]})
        failed |= not half.passed
        for b in section["beta"]:
            for e in section["eps"]:
                try:
                    rep = ineq.one_d_reduced_check(w, b, e, ctx.dim.N, ctx.q)
                except ineq.PreconditionError as exc:
                    skipped.add((b, e, str(exc)))
                    continue
                reduced.append({"member": label, **rep.to_dict()})
                rows.append({"check": "one_d", "member": label, "beta": b, "eps": e, **rep.rows[0]})
                failed |= not rep.passed
    skipped_list = [{"beta": b, "eps": e, "reason": r} for b, e, r in sorted(skipped)]
    return ({"ratio_probes": probes, "half_log": transforms, "one_d": reduced,
             "skipped_pairs": skipped_list}, rows, None, failed)


def run_reduce(ctx: Context):
    section = ctx.cfg["reduce"]
    r0 = section["r0"] if section["r0"] is not None else ineq.admissible_radius(ctx.dim)
    corpus = admissible_corpus(ctx.dim, section["corpus_size"], ctx.rng(3))
    members = [(f"corpus {i}", f) for i, f in enumerate(corpus)]
    members += [(f"moser k={k:g}", ineq.normalized_moser(ctx.dim, k, ctx.q)) for k in section["moser_k"]]
    rows, out, failed = [], [], False
    for label, f in members:
        entry = {"member": label}
        ball = ineq.ball_to_2d_reduction(f, R=f.support_radius, q=ctx.q)
        entry["ball_to_2d"] = ball.to_dict()
        rows.append({"check": "ball_to_2d", "member": label, **ball.summary})
        failed |= not ball.passed
        g = f.scaled(1.0 / max(1.0, h_norm(f, ctx.q).h_norm))
        try:
            _, aux = ineq.auxiliary_w_transform(g, r0, ctx.q)
            entry["auxiliary_w"] = aux.to_dict()
            rows.append({"check": "auxiliary_w", "member": label, **aux.summary})
            failed |= not aux.passed
        except ineq.PreconditionError as exc:
            entry["auxiliary_w"] = {"skipped": str(exc)}
        ext = ineq.exterior_series_bound(g, r0, q=ctx.q)
        entry["exterior_series"] = ext.to_dict()
        rows.append({"check": "exterior_series", "member": label, **ext.summary})
        failed |= not ext.passed
        out.append(entry)
    return {"r0": r0, "members": out}, rows, None, failed


def _load_family(ctx: Context, name: str):
    if name == "builtin:moser":
        return moser_family(ctx.dim, 64), {}, []
    if name.startswith("builtin:"):
        path = builtin_manifest(name.split(":", 1)[1])
        if not path.is_file():
            raise ConfigError(f"config error at /decompose/manifest: unknown builtin manifest {name!r}", "/decompose/manifest")
    else:
        path = Path(name)
        if not path.is_absolute():
            path = ctx.base_dir / path
    try:
        fam, overrides, planted = load_manifest(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"config error at /decompose/manifest: cannot load manifest {name!r}: {exc}", "/decompose/manifest") from None
    if fam.dim != ctx.dim:
        raise ConfigError(f"config error at /N: manifest is in N={fam.dim.N} but config has N={ctx.dim.N}", "/N")
    return fam, overrides, planted


def run_decompose(ctx: Context, out_dir: Path):
    section = ctx.cfg["decompose"]
    fam, overrides, planted = _load_family(ctx, section["manifest"])
    try:
        ecfg = ExtractionConfig(**{**overrides, **section["extraction"]})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config error at /decompose/extraction: extraction settings: {exc}", "/decompose/extraction") from None
    res = decompose(fam, ecfg, ctx.q, ctx.threads)
    rows = []
    for lv in res.levels:
        atomic_write_text(out_dir / f"decompose_level_{lv.number}_profile.txt", dumps(lv.profile))
        for n in fam.indices:
            a = lv.scales.get(n)
            rows.append({"level": lv.number, "n": n, "alpha": a if a is not None else math.nan,
                         "A": lv.A, "energy": lv.energy})
    results = res.to_dict()
    results["manifest"] = section["manifest"]
    results["planted"] = planted
    return results, rows, ["level", "n", "alpha", "A", "energy"], not res.ok


def run_selftest(ctx: Context):
    crit = run_acceptance(ctx.seed, ctx.threads)
    for c in crit:
        print(c.line())
    rows = [{"criterion": c.number, "name": c.name, "passed": c.passed, "tolerance": c.tolerance} for c in crit]
    return {"criteria": [c.to_dict() for c in crit]}, rows, None, not all(c.passed for c in crit)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment config")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    common.add_argument("--threads", type=int, help="worker threads (overrides config)")
    common.add_argument("--seed", type=int, help="corpus seed (overrides config)")
    parser = argparse.ArgumentParser(prog="hardy-adams", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "norms": "norm reports for listed functions",
        "moser": "Moser-sequence norm and Orlicz series",
        "adams": "supremum probe and sharpness fit",
        "adachi": "ratio probe, half-log identities, reduced 1-d inequality",
        "reduce": "ball-to-2d and auxiliary-w checks",
        "decompose": "profile decomposition of a manifest",
        "selftest": "full acceptance suite",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"threads": args.threads, "seed": args.seed})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    base_dir = args.config.parent if args.config else Path.cwd()
    ctx = Context(cfg, base_dir)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    name = args.subcommand
    try:
        if name == "decompose":
            results, rows, columns, failed = run_decompose(ctx, out_dir)
        else:
            results, rows, columns, failed = globals()[f"run_{name}"](ctx)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    paths = write_report(out_dir, name, envelope(name, cfg, ctx.dim, results), rows, columns)
    for p in paths:
        print(f"wrote {p}")
    if failed:
        print(f"{name}: checks failed or diagnostics raised; see {paths[0]}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
