"""Command-line front end: eval, weight, converge, maximal, verify.

Exit codes: 0 ok, 2 usage error or unknown name, 3 divergence,
4 weight outside D_p^W, 5 convergence or verification not achieved.

Settings resolve as flag > ``--config`` JSON file > built-in default.  The
config file is a flat JSON object whose keys are the long flag names with
dashes replaced by underscores, e.g. ``{"rel_tol": 1e-10, "datum": "box:-1,1"}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import __version__
from .datum import parse_datum
from .kernels import DomainError, KernelKind, TimeParam
from .quadrature import QuadratureConfig
from .report import emit, header, render_csv, render_json
from .semigroup import apply, converge, maximal
from .verify import CHECKS, run_checks
from .weights import LebesgueExponent, dpw_classify, dpw_norm, parse_weight

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGENT = 3
EXIT_NON_MEMBER = 4
EXIT_NOT_CONVERGED = 5

# per-command defaults; None means "required" or "no default"
DEFAULTS = {
    "common": {"format": "csv", "out": None, "seed": 42, "rel_tol": None, "max_evals": None},
    "eval": {"kind": None, "datum": None, "x": None, "t": None, "s": None, "n": None},
    "weight": {"family": None, "p": None, "n": 1, "t0": None},
    "converge": {"kind": None, "datum": None, "x": None, "n": None, "t0": 1.0, "steps": 10,
                 "shrink": 0.25, "threshold": 1e-3},
    "maximal": {"kind": None, "datum": None, "x": None, "n": None, "R": 1.0, "J": 12},
    "verify": {"names": ["all"], "samples": None},
}

COLUMNS = {
    "eval": ["kind", "datum", "x", "t", "s", "value", "error_estimate", "evals_used",
             "converged", "divergent", "log_abs_value", "truncation_radius"],
    "weight": ["family", "p", "n", "member", "threshold_M", "witness_t0", "t0", "norm",
               "log_norm", "numeric_finite", "evidence", "interpretation"],
    "converge": ["k", "t_k", "u", "f", "abs_err"],
    "maximal": ["j", "t_j", "abs_u"],
    "verify": ["check_name", "samples", "passed", "worst_margin", "excluded", "worst_sample",
               "details"],
}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--config", default=None, help="JSON file with default settings")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--max-evals", type=int, default=None)


def _point_args(p: argparse.ArgumentParser, with_time: bool) -> None:
    p.add_argument("--kind", default=None,
                   help="classical | hermite | hermite-shifted | ou")
    p.add_argument("--datum", default=None, help="family:params, e.g. box:-1,1")
    p.add_argument("--x", default=None, help="comma-separated point coordinates")
    p.add_argument("--n", type=int, default=None, help="dimension (default: from --x)")
    if with_time:
        p.add_argument("--t", type=float, default=None)
        p.add_argument("--s", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatkernels",
                                     description="Heat, Hermite and OU semigroup toolkit.")
    parser.add_argument("--version", action="version", version=f"heatkernels {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate u(x, t) for one kernel and datum")
    _point_args(p, with_time=True)
    _common(p)

    p = sub.add_parser("weight", help="classify a weight for D_p^W")
    p.add_argument("--family", default=None, help="constant:c | gaussian:a | power:a | "
                   "stretched-exp:c,beta")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t0", type=float, default=None)
    _common(p)

    p = sub.add_parser("converge", help="track u(x, t_k) -> f(x) as t_k -> 0")
    _point_args(p, with_time=False)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--shrink", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    _common(p)

    p = sub.add_parser("maximal", help="sup over a dyadic time grid of |u(x, t)|")
    _point_args(p, with_time=False)
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--J", type=int, default=None)
    _common(p)

    p = sub.add_parser("verify", help="run verification checks")
    p.add_argument("names", nargs="*", default=None, help="check names or 'all'")
    p.add_argument("--samples", type=int, default=None)
    _common(p)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults."""
    defaults = {**DEFAULTS["common"], **DEFAULTS[args.command]}
    file_cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(file_cfg) - set(defaults))
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    cfg = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if key == "names" and not flag:
            flag = None
        cfg[key] = flag if flag is not None else file_cfg.get(key, default)
    return cfg


def quad_config(cfg: dict) -> QuadratureConfig:
    kw = {}
    if cfg.get("rel_tol") is not None:
        kw["rel_tol"] = float(cfg["rel_tol"])
    if cfg.get("max_evals") is not None:
        kw["max_evals"] = int(cfg["max_evals"])
    try:
        return QuadratureConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require(cfg: dict, *keys) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required setting(s): " + ", ".join("--" + k for k in missing))


def _parse_point(cfg: dict):
    raw = cfg["x"]
    try:
        if isinstance(raw, (list, tuple)):
            x = [float(v) for v in raw]
        elif isinstance(raw, (int, float)):
            x = [float(raw)]
        else:
            x = [float(v) for v in str(raw).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad point {raw!r}") from None
    n = cfg.get("n")
    if n is None:
        n = len(x)
    elif len(x) == 1 and n > 1:
        x = x * n
    if len(x) != n or n < 1:
        raise UsageError(f"point {raw!r} does not have {n} coordinates")
    cfg["n"] = n
    return x, n


def _kernel_and_datum(cfg: dict):
    _require(cfg, "kind", "datum", "x")
    try:
        kind = KernelKind.parse(cfg["kind"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    x, n = _parse_point(cfg)
    try:
        f = parse_datum(cfg["datum"], n)
    except (ValueError, DomainError) as exc:
        raise UsageError(str(exc)) from None
    if f.n != n:
        raise UsageError(f"datum lives in R^{f.n}, point in R^{n}")
    return kind, f, x


def cmd_eval(cfg: dict):
    kind, f, x = _kernel_and_datum(cfg)
    if (cfg["t"] is None) == (cfg["s"] is None):
        raise UsageError("give exactly one of --t and --s")
    try:
        tp = TimeParam.from_t(cfg["t"]) if cfg["t"] is not None else TimeParam.from_s(cfg["s"])
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    res = apply(kind, f, x, tp, quad_config(cfg))
    rec = {"kind": kind.value, "datum": f.describe(), "x": x, "t": tp.t, "s": tp.s,
           "value": res.value, "error_estimate": res.error_estimate,
           "evals_used": res.evals_used, "converged": res.converged,
           "divergent": res.divergent, "log_abs_value": res.log_abs_value,
           "truncation_radius": res.truncation_radius}
    return [rec], None, (EXIT_DIVERGENT if res.divergent else EXIT_OK)


def cmd_weight(cfg: dict):
    _require(cfg, "family", "p")
    try:
        v = parse_weight(cfg["family"])
        p = LebesgueExponent(float(cfg["p"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = int(cfg["n"])
    if n < 1:
        raise UsageError("dimension must be positive")
    qc = quad_config(cfg)
    verdict = dpw_classify(v, p, n, qc)
    t0 = cfg["t0"]
    norm, log_norm = verdict.norm, verdict.log_norm
    if t0 is not None:
        if not t0 > 0:
            raise UsageError("t0 must be positive")
        res = dpw_norm(v, float(t0), p, n, qc)
        norm = None if res.divergent else res.value
        log_norm = None if res.divergent else res.log_abs_value
    rec = {"family": v.describe(), "p": p.p, "n": n, "member": verdict.member,
           "threshold_M": verdict.threshold_M, "witness_t0": verdict.witness_t0,
           "t0": t0 if t0 is not None else verdict.witness_t0, "norm": norm,
           "log_norm": log_norm, "numeric_finite": verdict.numeric_finite,
           "evidence": [[r, lg] for r, lg in verdict.evidence],
           "interpretation": verdict.interpretation}
    return [rec], None, (EXIT_OK if verdict.member else EXIT_NON_MEMBER)


def cmd_converge(cfg: dict):
    kind, f, x = _kernel_and_datum(cfg)
    try:
        rep = converge(kind, f, x, float(cfg["t0"]), int(cfg["steps"]), float(cfg["shrink"]),
                       float(cfg["threshold"]), quad_config(cfg))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"k": k, "t_k": t, "u": u, "f": rep.target, "abs_err": e}
            for k, (t, u, e) in enumerate(zip(rep.times, rep.values, rep.errors))]
    summary = {"converged": rep.converged, "divergence_index": rep.divergence_index,
               "quadrature_converged": all(rep.quadrature_converged)}
    if rep.divergence_index is not None:
        code = EXIT_DIVERGENT
    else:
        code = EXIT_OK if rep.converged else EXIT_NOT_CONVERGED
    return rows, summary, code


def cmd_maximal(cfg: dict):
    kind, f, x = _kernel_and_datum(cfg)
    try:
        rep = maximal(kind, f, x, float(cfg["R"]), int(cfg["J"]), quad_config(cfg))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [{"j": j, "t_j": t, "abs_u": v}
            for j, (t, v) in enumerate(zip(rep.time_grid, rep.values), start=1)]
    summary = {"sup_value": rep.sup_value, "argmax_time": rep.argmax_time,
               "finite": rep.finite, "all_converged": rep.all_converged}
    return rows, summary, (EXIT_OK if rep.finite else EXIT_DIVERGENT)


def cmd_verify(cfg: dict):
    names = cfg["names"]
    if isinstance(names, str):
        names = [names]
    unknown = [nm for nm in names if nm != "all" and nm not in CHECKS]
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(unknown)}")
    samples = cfg["samples"]
    if samples is not None and samples < 1:
        raise UsageError("--samples must be positive")
    reports = run_checks(names, samples, int(cfg["seed"]), quad_config(cfg))
    rows = [asdict(r) for r in reports]
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_NOT_CONVERGED
    return rows, None, code


COMMANDS = {"eval": cmd_eval, "weight": cmd_weight, "converge": cmd_converge,
            "maximal": cmd_maximal, "verify": cmd_verify}


def _clean(v):
    # numpy scalars and arrays to plain Python for the report writers
    if hasattr(v, "tolist"):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse: 0 for --help/--version, 2 for usage errors
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = resolve(args)
        records, summary, code = COMMANDS[args.command](cfg)
        if cfg["format"] not in ("csv", "json"):
            raise UsageError("format must be csv or json")
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"heatkernels {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    records = [_clean(r) for r in records]
    head = header(argv, _clean(cfg), _clean(summary) if summary is not None else None)
    if cfg["format"] == "json":
        text = render_json(head, records)
    else:
        text = render_csv(head, COLUMNS[args.command], records)
    try:
        emit(text, cfg["out"])
    except OSError as exc:
        print(f"heatkernels: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
