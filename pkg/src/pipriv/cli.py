"""Command-line front end.

    pipriv audit joint.json --eps-grid 0.1:3:30
    pipriv convert chi2 0.1 1.0 --strong 2 --alpha 0.5
    pipriv gaussian --eps 0.1:1.2:12 --delta 0.05,0.1 --prior0 0.5,0.9
    pipriv estimate samples.csv --steps 2000
    pipriv synth-train config.json --jobs 4

Single results are JSON, curves and sweeps CSV. Floats are written with 17
significant digits and every report carries the tool version and the fully
resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import fields

import numpy as np

from . import __version__
from .audit import (
    bayes_error,
    detection_error_bound,
    dp_delta,
    estimation_error_bound,
    ip_delta_grid,
    mmse_oracle,
    s_moments,
)
from .convert import fdiv_to_ip, ip_to_tv, strong_fdiv_to_strong_ip, strong_ip_to_dp
from .dist import joint_from_json, product_of_marginals
from .divergence import (
    DivergenceKind,
    fdiv_privacy_leakage,
    maximal_correlation,
    strong_fdiv_leakage,
    total_variation,
)
from .errors import NonNumericLabels, NotAbsolutelyContinuous, PrivacyCalcError, DegenerateMarginal
from .estimator import EstimatorConfig, default_lambda, estimate_chi2, estimate_joint_chi2
from .gaussian import dp_to_weak_dp_curve, offset_grid

KINDS = [k.value for k in DivergenceKind]


class CliError(Exception):
    pass


# ---------------------------------------------------------------- formatting

def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    return json.dumps(str(obj))


def to_csv(header: list, rows: list, meta: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# pipriv {__version__}\n")
    buf.write("# config: " + json.dumps(meta, sort_keys=True, default=str) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:num`` (inclusive, evenly spaced)."""
    text = text.strip()
    if not text:
        raise CliError("empty grid")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise CliError(f"grid range must be start:stop:num, got {text!r}")
            num = int(parts[2])
            if num < 1:
                raise CliError("grid must have at least one point")
            return [float(v) for v in np.linspace(float(parts[0]), float(parts[1]), num)]
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"bad grid {text!r}: {exc}") from None
    if not vals:
        raise CliError("empty grid")
    return vals


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str):
    text = _read(path)
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _load_samples(path: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(_read(path).splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            if not rows:  # header
                continue
            raise CliError(f"{path}:{lineno}: non-numeric sample row") from None
    if not rows:
        raise CliError(f"{path}: no samples")
    if len({len(r) for r in rows}) != 1:
        raise CliError(f"{path}: rows have different lengths")
    return np.asarray(rows, dtype=float)


def _report(kind: str, config: dict, result) -> dict:
    return {"tool": "pipriv", "version": __version__, "command": kind, "config": config, "result": result}


# ------------------------------------------------------------------ commands

def _maybe(fn):
    try:
        return fn()
    except (NotAbsolutelyContinuous, DegenerateMarginal, NonNumericLabels):
        return None


def cmd_audit(args) -> str:
    text, _ = _load_json(args.joint_file)
    try:
        joint = joint_from_json(text)
    except (ValueError, TypeError) as exc:
        raise CliError(f"{args.joint_file}: {exc}") from None
    grid = parse_grid(args.eps_grid)
    if any(not e > 0 for e in grid):
        raise CliError("eps grid values must be positive")
    prod = product_of_marginals(joint)
    leak = {k: fdiv_privacy_leakage(joint, k).eta for k in KINDS}
    strong = {k: _maybe(lambda k=k: strong_fdiv_leakage(joint, k).eta) for k in KINDS}
    numeric_nonneg = _maybe(lambda: s_moments(joint))
    if numeric_nonneg is not None and min(joint.s_labels) < 0:
        numeric_nonneg = None
    ip, sip = ip_delta_grid(joint, grid)
    alpha = float(joint.p_s.min())
    n_s = joint.shape[0]
    tv = total_variation(joint, prod)
    bayes = bayes_error(joint)
    mmse = mmse_oracle(joint) if numeric_nonneg is not None else None
    rows = []
    all_sound = True
    for e, d_ip, d_sip in zip(grid, ip, sip):
        d_ip, d_sip = float(d_ip), float(d_sip)
        thm = {k: fdiv_to_ip(leak[k], e, k).delta for k in KINDS}
        cor = {k: (None if strong[k] is None else strong_fdiv_to_strong_ip(strong[k], e, n_s, k).delta)
               for k in KINDS}
        dp_oracle = dp_delta(joint, e)
        dp2 = dp_delta(joint, 2 * e)
        chain_bound = strong_ip_to_dp(e, d_sip, alpha).delta
        tv_bound = ip_to_tv(e, d_ip)
        det = detection_error_bound(e, d_ip, joint.p_s)
        est = None
        if numeric_nonneg is not None:
            est = estimation_error_bound(e, d_sip, *numeric_nonneg)
        sound = (
            all(d_ip <= thm[k] + 1e-10 for k in KINDS)
            and all(cor[k] is None or d_sip <= cor[k] + 1e-10 for k in KINDS)
            and dp2 <= chain_bound + 1e-12
            and tv <= tv_bound + 1e-10
            and bayes >= det - 1e-12
            and (est is None or mmse >= est - 1e-10)
        )
        all_sound &= sound
        rows.append({
            "eps": e,
            "ip_delta": d_ip,
            "strong_ip_delta": d_sip,
            "dp_delta": dp_oracle,
            "ip_delta_bound": thm,
            "strong_ip_delta_bound": cor,
            "dp_delta_at_2eps": dp2,
            "dp_delta_bound_at_2eps": chain_bound,
            "tv_upper_bound": tv_bound,
            "detection_error_bound": det,
            "estimation_error_bound": est,
            "sound": sound,
        })
    result = {
        "shape": list(joint.shape),
        "divergences": {**leak, "maximal_correlation": _maybe(lambda: maximal_correlation(joint))},
        "strong_divergences": strong,
        "bayes_error": bayes,
        "mmse": mmse,
        "min_prior": alpha,
        "grid": rows,
        "all_sound": all_sound,
    }
    config = {"joint_file": args.joint_file, "eps_grid": grid, "s_labels": list(joint.s_labels),
              "y_labels": list(joint.y_labels), "p": joint.matrix.tolist()}
    return to_json(_report("audit", config, result))


def cmd_convert(args) -> str:
    if not args.eta >= 0:
        raise CliError("eta must be non-negative")
    if not args.eps > 0:
        raise CliError("eps must be positive")
    if args.alpha is not None and args.strong is None:
        raise CliError("--alpha needs --strong")
    if args.strong is not None:
        if args.strong < 1:
            raise CliError("--strong needs |S| >= 1")
        res = strong_fdiv_to_strong_ip(args.eta, args.eps, args.strong, args.kind)
    else:
        res = fdiv_to_ip(args.eta, args.eps, args.kind)
    out = {"eps": res.eps, "delta": res.delta, "vacuous": res.vacuous, "raw_delta": res.raw}
    if args.alpha is not None:
        dp = strong_ip_to_dp(args.eps, res.delta, args.alpha)
        out["dp"] = {"eps": dp.eps, "delta": dp.delta}
    config = {"kind": args.kind, "eta": args.eta, "eps": args.eps, "strong": args.strong, "alpha": args.alpha}
    return to_json(_report("convert", config, out))


def cmd_gaussian(args) -> str:
    eps_list = parse_grid(args.eps)
    delta_list = parse_grid(args.delta)
    prior_list = parse_grid(args.prior0)
    if args.eps_ip is not None:
        grid = parse_grid(args.eps_ip)
    else:
        grid = offset_grid(eps_list, args.offset).tolist()
    if any(not e > 0 for e in grid):
        raise CliError("eps_ip grid values must be positive")
    rows = []
    for d in delta_list:
        for e in eps_list:
            for p0 in prior_list:
                for pt in dp_to_weak_dp_curve(e, d, (p0, 1.0 - p0), grid, args.delta_mu):
                    rows.append([pt.eps_prime, pt.delta_prime, float(e), float(d), float(p0)])
    meta = {"command": "gaussian", "eps": eps_list, "delta": delta_list, "prior0": prior_list,
            "eps_ip_grid": grid, "offset": args.offset, "delta_mu": args.delta_mu}
    return to_csv(["eps_prime", "delta_prime", "baseline_eps", "baseline_delta", "prior0"], rows, meta)


def cmd_estimate(args) -> str:
    cfg = EstimatorConfig(widths=tuple(int(w) for w in args.widths.split(",")), lr=args.lr, steps=args.steps,
                          batch_size=args.batch_size, lambda_c=args.lambda_c, seed=args.seed)
    p = _load_samples(args.samples)
    if args.reference is not None:
        q = _load_samples(args.reference)
        value = estimate_chi2(p, q, cfg)
        m = min(len(p), len(q))
        mode = "two_sample"
    else:
        value = estimate_joint_chi2(p, cfg)
        m = len(p)
        mode = "joint"
    config = {"samples": args.samples, "reference": args.reference, "mode": mode, "n": m,
              "estimator": cfg.to_dict()}
    return to_json(_report("estimate", config, {"chi2_estimate": value, "lambda": default_lambda(m, cfg.lambda_c)}))


def _synth_configs(obj: dict, seed: int):
    from .sanitizer import CORRELATED_PMF, INDEPENDENT_PMF, NetConfig, SynthConfig

    if not isinstance(obj, dict):
        raise CliError("synth-train config must be a JSON object")
    known = {"pmf", "n_samples", "a_seed", "a_matrix", "noise_seed", "obs_noise", "eta_grid", "lambda",
             "seeds", "net"}
    unknown = set(obj) - known
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    pmf = obj.get("pmf", "independent")
    if isinstance(pmf, str):
        named = {"independent": INDEPENDENT_PMF, "correlated": CORRELATED_PMF}
        if pmf not in named:
            raise CliError(f"unknown pmf name {pmf!r}")
        pmf = named[pmf]
    synth = SynthConfig(n_samples=int(obj.get("n_samples", 4000)), pmf=pmf, a_matrix=obj.get("a_matrix"),
                        a_seed=int(obj.get("a_seed", 0)), noise_seed=int(obj.get("noise_seed", seed)),
                        obs_noise=float(obj.get("obs_noise", 1.0)))
    net_obj = obj.get("net", {})
    valid = {f.name for f in fields(NetConfig)}
    if set(net_obj) - valid:
        raise CliError(f"unknown net keys: {sorted(set(net_obj) - valid)}")
    net = NetConfig(**{"seed": seed, **net_obj})
    eta_grid = [float(v) for v in obj.get("eta_grid", [])]
    if not eta_grid:
        raise CliError("eta_grid must be a non-empty list")
    seeds = [int(s) for s in obj.get("seeds", [net.seed])]
    return synth, net, eta_grid, float(obj.get("lambda", 1.0)), seeds


def cmd_synth_train(args) -> str:
    from .sanitizer import gen_synthetic, tradeoff_sweep

    _, obj = _load_json(args.config)
    synth, net, eta_grid, lam, seeds = _synth_configs(obj, args.seed)
    data = gen_synthetic(synth)
    points = tradeoff_sweep(data, eta_grid, lam, net, seeds, jobs=args.jobs)
    header = ["eta_budget", "seed", "utility_accuracy", "utility_loss", "attack_accuracy", "attack_loss",
              "achieved_chi2_estimate"]
    rows = [[p.eta_budget, p.seed, p.utility_accuracy, p.utility_loss, p.attack_accuracy, p.attack_loss,
             p.achieved_chi2_estimate] for p in points]
    meta = {"command": "synth-train", "synth": synth.to_dict(), "net": net.to_dict(), "eta_grid": eta_grid,
            "lambda": lam, "seeds": seeds, "jobs": args.jobs}
    return to_csv(header, rows, meta)


# ---------------------------------------------------------------------- main

def _global_flags(parser, defaults: bool):
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    parser.add_argument("--seed", type=int, help="random seed (default 0)", **kw(0))
    parser.add_argument("--jobs", type=int, help="parallel workers for sweeps (default 1)", **kw(1))
    parser.add_argument("--output", help="write to this file instead of stdout", **kw(None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pipriv", description="Probabilistic information privacy toolkit.")
    parser.add_argument("--version", action="version", version=f"pipriv {__version__}")
    _global_flags(parser, True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", parents=[common], help="exact privacy audit of a finite joint (JSON)")
    p.add_argument("joint_file")
    p.add_argument("--eps-grid", default="0.1:3.0:30", help="a,b,c or start:stop:num")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("convert", parents=[common], help="divergence budget to IP/DP (JSON)")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("eta", type=float)
    p.add_argument("eps", type=float)
    p.add_argument("--strong", type=int, metavar="N_S", help="treat eta as a strong per-s budget over |S| values")
    p.add_argument("--alpha", type=float, help="smallest prior; chain strong IP into DP")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("gaussian", parents=[common], help="Gaussian DP round-trip curves (CSV)")
    p.add_argument("--eps", default="0.1:1.2:12", help="baseline DP eps values")
    p.add_argument("--delta", default="0.05,0.1", help="baseline DP delta values")
    p.add_argument("--prior0", default="0.5,0.7,0.9", help="prior P(S = s0) values")
    p.add_argument("--eps-ip", help="IP eps grid; default is baseline eps + offset")
    p.add_argument("--offset", type=float, default=0.05)
    p.add_argument("--delta-mu", type=float, default=1.0, help="mean gap of the two components")
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("estimate", parents=[common], help="neural chi-square estimate from samples (JSON)")
    p.add_argument("samples", help="CSV rows (s, y1, ..., yk), or samples of p with --reference")
    p.add_argument("--reference", help="CSV samples of q for a two-sample estimate of chi2(p || q)")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lambda-c", type=float, default=1.0)
    p.add_argument("--widths", default="16,16,1")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("synth-train", parents=[common], help="synthetic sanitizer trade-off sweep (CSV)")
    p.add_argument("config", help="JSON config file")
    p.set_defaults(func=cmd_synth_train)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        print("pipriv: error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        text = args.func(args)
    except (CliError, PrivacyCalcError, ValueError) as exc:
        print(f"pipriv {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"pipriv: error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
