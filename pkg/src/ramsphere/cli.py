"""Command-line surface: constants | analyze | simulate | construct | table | verify.

Reports are deterministic: no timestamps, no environment capture, and every
randomized command requires an explicit --seed, so identical flags give
byte-identical output. An optional result cache (directory from --cache or
the RAMSPHERE_CACHE environment variable) is keyed by the hash of the
canonicalized flag set; --no-cache bypasses it.

Exit codes: 0 success, 2 flag/validation errors (offending flag named
before any computation), 1 runtime failures; failures print a JSON error
object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from pathlib import Path

from . import bounds, coloring, graphs, improvement, model
from .errors import RamsphereError

CACHE_ENV = "RAMSPHERE_CACHE"


# ---------------------------------------------------------------------------
# Rendering and caching
# ---------------------------------------------------------------------------


def _render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _flatten_for_csv(report: dict, prefix: str = "") -> list[dict]:
    """Fallback CSV shape: one key,value row per scalar leaf."""
    rows = []
    for key in sorted(report):
        val = report[key]
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            rows.extend(_flatten_for_csv(val, name + "."))
        elif isinstance(val, list):
            rows.append({"key": name, "value": json.dumps(val, sort_keys=True)})
        else:
            rows.append({"key": name, "value": val})
    return rows


def _cache_dir(args) -> Path | None:
    if args.no_cache:
        return None
    if args.cache:
        return Path(args.cache)
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else None


def _cache_key(command: str, params: dict, fmt: str) -> str:
    canon = json.dumps({"command": command, "params": params, "format": fmt}, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()


def _emit(args, command: str, params: dict, report: dict, csv_rows: list[dict] | None = None) -> None:
    fmt = args.format
    cache = _cache_dir(args)
    key = _cache_key(command, params, fmt)
    text = None
    if cache is not None:
        hit = cache / f"{key}.{fmt}"
        if hit.exists():
            text = hit.read_text()
    if text is None:
        if fmt == "json":
            text = _render_json(report)
        else:
            text = _render_csv(csv_rows if csv_rows is not None else _flatten_for_csv(report))
        if cache is not None:
            cache.mkdir(parents=True, exist_ok=True)
            (cache / f"{key}.{fmt}").write_text(text)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)


def _fail_flag(flag: str, message: str) -> None:
    sys.stderr.write(
        json.dumps({"error": {"type": "validation", "flag": flag, "message": message}}) + "\n"
    )
    raise SystemExit(2)


def _require(cond: bool, flag: str, message: str) -> None:
    if not cond:
        _fail_flag(flag, message)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_constants(args) -> None:
    p_star, delta_star = bounds.find_p_star()
    consts = model.limit_constants()
    report = {
        "p_star": {"value": p_star, "method": "golden-section maximization of the per-color coefficient"},
        "delta_star": {"value": delta_star, "method": "per-color coefficient at p_star (base-2 logs)"},
        "c_star": {"value": consts.c_star, "method": "bracketed inversion of the normal CDF at 1 - p_star"},
        "a_star": {"value": consts.a_star, "method": "closed form (1/3)(exp(-c*^2)/(2 pi))^(3/2)"},
        "delta_half": {"value": bounds.delta(0.5), "method": "closed form at p = 1/2 (exactly 3/8)"},
    }
    rows = [{"name": k, "value": v["value"], "method": v["method"]} for k, v in report.items()]
    _emit(args, "constants", {}, report, rows)


def cmd_analyze(args) -> None:
    _require(args.t >= 3, "--t", "t must be >= 3")
    _require(args.D > 0, "--D", "D must be positive")
    _require(args.C > 0, "--C", "C must be positive")
    _require(0.0 <= args.eta < 1.0, "--eta", "eta must lie in [0, 1)")
    _require(args.D0 > 0, "--D0", "D0 must be positive")
    params = {
        "t": args.t, "D": args.D, "C": args.C, "eta": args.eta, "D0": args.D0,
        "log_base": args.log_base, "fprime0": args.fprime0,
    }
    report = improvement.analysis_report(
        t=args.t, D=args.D, C=args.C, eta=args.eta, D0=args.D0,
        base=args.log_base, fprime_mode=args.fprime0,
    )
    _emit(args, "analyze", params, report)


def cmd_simulate(args) -> None:
    _require(args.k >= 2, "--k", "k must be >= 2")
    _require(0.0 < args.p < 0.5, "--p", "p must lie in (0, 1/2)")
    _require(args.r_max >= 2, "--r-max", "r-max must be >= 2")
    _require(args.samples >= 1000, "--samples", "samples must be >= 1000")
    _require(args.seed is not None, "--seed", "an explicit seed is required")
    _require(args.method in ("gram", "points"), "--method", "method must be gram or points")
    mp = model.solve_threshold(args.k, args.p)
    estimates = []
    csv_rows = []
    r2_clique = None
    for r in range(2, args.r_max + 1):
        for mode in ("clique", "independent"):
            est = graphs.mc_tuple_probability(
                mp, r, mode, args.samples, args.seed, method=args.method
            )
            if r == 2 and mode == "clique":
                r2_clique = est
            entry = {
                "r": r,
                "mode": mode,
                "estimate": est.estimate,
                "half_width_95": est.half_width_95,
                "samples": est.samples,
            }
            estimates.append(entry)
            csv_rows.append(entry)
    triangle = graphs.exact_triangle_probability(mp)
    sigma = r2_clique.half_width_95 / 1.96 if r2_clique.half_width_95 > 0 else float("nan")
    density_check = {
        "p": args.p,
        "estimate": r2_clique.estimate,
        "deviation_in_sigmas": (r2_clique.estimate - args.p) / sigma if sigma == sigma else None,
    }
    report = {
        "params": {
            "k": args.k, "p": args.p, "c": mp.c, "r_max": args.r_max,
            "samples": args.samples, "seed": args.seed, "method": args.method,
        },
        "estimates": estimates,
        "triangle_oracle": triangle,
        "density_check": density_check,
    }
    csv_rows.append({"r": 3, "mode": "triangle_oracle", "estimate": triangle,
                     "half_width_95": 0.0, "samples": 0})
    _emit(args, "simulate", report["params"], report, csv_rows)


def cmd_construct(args) -> None:
    _require(args.t >= 3, "--t", "t must be >= 3")
    _require(args.ell >= 3, "--ell", "ell must be >= 3")
    _require(args.M >= 2, "--M", "M must be >= 2")
    _require(args.n >= 2, "--n", "n must be >= 2")
    _require(args.seed is not None, "--seed", "an explicit seed is required")
    _require(args.retries >= 1, "--retries", "retries must be >= 1")
    k = args.k if args.k is not None else int(round((args.D * args.t) ** 2))
    _require(k >= 2, "--k", "derived k must be >= 2 (raise --D or pass --k)")
    consts = model.limit_constants()
    mp = model.solve_threshold(k, consts.p_star)
    base = None
    attempts = 0
    for attempt in range(args.retries):
        attempts += 1
        candidate = graphs.sample_graph(args.M, mp, (args.seed + attempt) & 0xFFFFFFFFFFFFFFFF)
        ok, witness = coloring.certify_kt_free(candidate, args.t)
        if ok:
            base = candidate
            break
    if base is None:
        raise RamsphereError(
            f"base not K_{args.t}-free, resampled {attempts} times without success; "
            f"lower --M or raise --retries"
        )
    col = coloring.construct_coloring(base, args.n, args.ell, args.seed)
    planted_info = None
    if args.plant_fault:
        col, planted = coloring.plant_monochromatic_clique(col, args.t, 1, args.seed)
        planted_info = {"color": 1, "vertices": planted}
    results = coloring.verify_coloring(col, args.t)
    if args.out_coloring:
        coloring.export_coloring(col, args.out_coloring)
    verification = [
        {
            "color": res.color,
            "kt_found": res.clique_found,
            "witness": list(res.witness) if res.witness else None,
            "guaranteed_kt_free": (res.color <= args.ell - 2) and not args.plant_fault,
        }
        for res in results
    ]
    report = {
        "base": {
            "M": args.M, "k": k, "p": consts.p_star, "c": mp.c,
            "seed": base.seed, "attempts": attempts, "certified_kt_free": True,
        },
        "coloring": {"n": args.n, "ell": args.ell, "seed": args.seed,
                     "file": args.out_coloring},
        "planted_fault": planted_info,
        "verification": verification,
    }
    params = {
        "t": args.t, "ell": args.ell, "M": args.M, "n": args.n, "k": k,
        "seed": args.seed, "retries": args.retries, "plant_fault": args.plant_fault,
        "out_coloring": args.out_coloring,
    }
    _emit(args, "construct", params, report, verification)


def cmd_table(args) -> None:
    _require(args.ell_max >= 3, "--ell-max", "ell-max must be >= 3")
    consts = model.limit_constants()
    if args.epsilon is not None:
        _require(args.epsilon >= 0, "--epsilon", "epsilon must be nonnegative")
        epsilon = args.epsilon
        source = "flag"
    else:
        params = improvement.bound_params(t=100, D=100.0, C=args.C, eta=args.eta, D0=args.D0)
        cert = improvement.find_gamma_epsilon(params, base=args.log_base)
        epsilon = cert.epsilon
        source = f"gamma search (C={args.C}, D0={args.D0}, eta={args.eta}, base={args.log_base})"
    rows = bounds.compare_baselines(args.ell_max, consts.delta_star, epsilon)
    report = {
        "delta_star": consts.delta_star,
        "epsilon": epsilon,
        "epsilon_source": source,
        "coefficients": rows,
    }
    params_key = {
        "ell_max": args.ell_max, "epsilon": args.epsilon, "C": args.C,
        "eta": args.eta, "D0": args.D0, "log_base": args.log_base,
    }
    _emit(args, "table", params_key, report, rows)


def cmd_verify(args) -> None:
    _require(args.t >= 2, "--t", "t must be >= 2")
    col = coloring.import_coloring(args.path)
    results = coloring.verify_coloring(col, args.t)
    rows = [
        {
            "color": res.color,
            "kt_found": res.clique_found,
            "witness": list(res.witness) if res.witness else None,
        }
        for res in results
    ]
    report = {
        "coloring": {"path": args.path, "n": col.n, "ell": col.ell, "seed": col.seed},
        "t": args.t,
        "verification": rows,
    }
    _emit(args, "verify", {"path": os.path.abspath(args.path), "t": args.t}, report, rows)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--out", type=str, default=None, help="also write the report here")
    sub.add_argument("--cache", type=str, default=None, help="results cache directory")
    sub.add_argument("--no-cache", action="store_true", help="bypass the results cache")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ramsphere",
        description="Sphere-graph Ramsey lower bounds: constants, analysis, and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="report p*, delta*, c*, a*, delta(1/2)")
    _add_common(pc)
    pc.set_defaults(func=cmd_constants)

    pa = sub.add_parser("analyze", help="full improvement analysis and epsilon certificate")
    pa.add_argument("--t", type=int, default=100)
    pa.add_argument("--D", type=float, default=100.0)
    pa.add_argument("--C", type=float, default=1.0)
    pa.add_argument("--eta", type=float, default=0.0)
    pa.add_argument("--D0", type=float, default=10.0)
    pa.add_argument("--log-base", choices=("two", "natural"), default="two")
    pa.add_argument("--fprime0", choices=("auto", "closed", "fd"), default="auto")
    _add_common(pa)
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="Monte Carlo clique/independence probabilities")
    ps.add_argument("--k", type=int, default=400)
    ps.add_argument("--p", type=float, default=None,
                    help="edge density (default: the optimal density p*)")
    ps.add_argument("--r-max", dest="r_max", type=int, default=4)
    ps.add_argument("--samples", type=int, default=10**6)
    ps.add_argument("--seed", type=int, required=True)
    ps.add_argument("--method", choices=("gram", "points"), default="gram")
    _add_common(ps)
    ps.set_defaults(func=cmd_simulate)

    pk = sub.add_parser("construct", help="build and verify a pulled-back edge coloring")
    pk.add_argument("--t", type=int, default=5)
    pk.add_argument("--ell", type=int, default=3)
    pk.add_argument("--M", type=int, default=12, help="base graph size")
    pk.add_argument("--n", type=int, default=200, help="colored complete graph size")
    pk.add_argument("--k", type=int, default=None, help="sphere dimension (default D^2 t^2)")
    pk.add_argument("--D", type=float, default=4.0)
    pk.add_argument("--seed", type=int, required=True)
    pk.add_argument("--retries", type=int, default=64, help="base resampling budget")
    pk.add_argument("--plant-fault", action="store_true",
                    help="overwrite a random t-set to color 1 before verification")
    pk.add_argument("--out-coloring", type=str, default=None, help="write the coloring here")
    _add_common(pk)
    pk.set_defaults(func=cmd_construct)

    pt = sub.add_parser("table", help="per-color coefficient table vs. prior bounds")
    pt.add_argument("--ell-max", dest="ell_max", type=int, default=12)
    pt.add_argument("--epsilon", type=float, default=None,
                    help="improvement epsilon (default: computed by the gamma search)")
    pt.add_argument("--C", type=float, default=1.0)
    pt.add_argument("--eta", type=float, default=0.0)
    pt.add_argument("--D0", type=float, default=10.0)
    pt.add_argument("--log-base", choices=("two", "natural"), default="two")
    _add_common(pt)
    pt.set_defaults(func=cmd_table)

    pv = sub.add_parser("verify", help="re-verify an exported coloring file")
    pv.add_argument("path", type=str)
    pv.add_argument("--t", type=int, required=True)
    _add_common(pv)
    pv.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "p", "absent") is None:
        args.p = model.limit_constants().p_star
    try:
        args.func(args)
    except RamsphereError as exc:
        sys.stderr.write(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n"
        )
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
