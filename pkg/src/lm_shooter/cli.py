"""Command-line entry point: ``lm-shooter <subcommand> [options]``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime failures.
Every subcommand except ``sweep`` accepts an optional ``--config`` JSON file
whose keys are the long option names (``rmax``, ``rel_tol``, ...); options
given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import export
from .classify import ClassifyCriteria, classify, envelope, find_zeros
from .decay import d12_proxy, fit_tail_exponent, tail_table
from .diagnostics import diagnose, dPdr_series, P_series
from .integrator import IntegratorConfig, integrate
from .model import DomainError, Parameters
from .rescale import (
    EPS_SEQUENCE,
    EpsFamilyParams,
    closeness,
    map_from_eps,
    map_to_eps,
    solve_eps_family,
    solve_lane_emden,
)
from .sweep import SweepConfig, classify_xi, estimate_threshold, run_sweep

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _positive(x: str) -> float:
    v = float(x)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {x!r}")
    return v


def _dimension(x: str) -> int:
    try:
        v = int(x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be an integer, got {x!r}") from None
    if v < 3:
        raise argparse.ArgumentTypeError(f"N must be >= 3, got {v}")
    return v


def _exponent(x: str) -> float:
    v = float(x)
    if not (math.isfinite(v) and v > 1):
        raise argparse.ArgumentTypeError(f"p must be > 1, got {x!r}")
    return v


class _Options:
    """Options registered with ``default=None`` so config files can fill the gaps."""

    def __init__(self, parser: argparse.ArgumentParser):
        self.parser = parser
        self.defaults: dict[str, object] = {}

    def add(self, *names, default=None, help="", **kw):
        dest = kw.pop("dest", None) or names[-1].lstrip("-").replace("-", "_")
        self.defaults[dest] = default
        if default is not None:
            help = f"{help} (default: {default})"
        self.parser.add_argument(*names, dest=dest, default=None, help=help, **kw)
        self.parser.set_defaults(_defaults=self.defaults)


def _common(sub, problem=True, xi=True, rmax=100.0):
    o = _Options(sub)
    if problem:
        o.add("-N", dest="N", type=_dimension, default=3, help="space dimension, >= 3")
        o.add("-p", dest="p", type=_exponent, default=3.0, help="exponent of the nonlinearity, > 1")
    if xi:
        o.add("--xi", type=_positive, default=1.0, help="initial value u(0)")
    o.add("--rmax", type=_positive, default=rmax, help="integration horizon")
    o.add("--rel-tol", type=_positive, default=1e-10, help="relative step tolerance")
    o.add("--abs-tol", type=_positive, default=1e-12, help="absolute step tolerance")
    o.add("--event-tol", type=_positive, default=1e-12, help="event location tolerance in r")
    o.add("--h0", type=_positive, default=None, help="starting radius (default: 1e-6*max(1, xi^(-(p-1)/2)))")
    o.add("--max-steps", type=int, default=2_000_000, help="step budget")
    o.add("--grid", choices=("steps", "log"), default="steps", help="stored nodes")
    o.add("--format", choices=("csv", "json"), default="csv", help="output format")
    sub.add_argument("--out", default="-", help="output path, '-' for stdout (default: -)")
    sub.add_argument("--config", default=None, help="JSON file with option values")
    return o


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lm-shooter",
        description="Radial shooting for the Lorentz-Minkowski mean curvature equation with power nonlinearity.",
    )
    subs = parser.add_subparsers(dest="command", metavar="subcommand", required=True)

    s = subs.add_parser("integrate", help="integrate the Cauchy problem and export the nodes")
    _common(s)

    s = subs.add_parser("classify", help="ground state / sign-changing verdict")
    o = _common(s)
    o.add("--tail-threshold", type=_positive, default=1e-2, help="u(r_max)/xi below which a positive run is a candidate")
    o.add("--extensions", type=int, default=0, help="horizon x10 retries while undetermined")
    o.add("--series", choices=("envelope", "zeros"), default="envelope", help="CSV series to export")

    s = subs.add_parser("diagnose", help="first integral, P-function and J diagnostics")
    _common(s)

    s = subs.add_parser("lane-emden", help="integrate the eps-family with w(0)=1 (eps=0: Lane-Emden)")
    o = _common(s, xi=False, rmax=20.0)
    o.add("--eps", type=float, default=0.0, help="family parameter, >= 0")

    s = subs.add_parser("rescale-check", help="round trip of the scaling maps and eps -> 0 convergence")
    o = _common(s, rmax=50.0)
    o.add("--lam", type=_positive, default=2.0, help="scaling parameter lambda")
    o.add("--le-horizon", type=_positive, default=20.0, help="horizon of the Lane-Emden comparison")

    s = subs.add_parser("decay-fit", help="fit the tail exponent of a ground-state candidate")
    o = _common(s, rmax=1e12)
    o.add("--window", type=_positive, nargs=2, default=None, metavar=("LO", "HI"),
          help="fit window (default: last two decades of the run)")

    s = subs.add_parser("sweep", help="classify a grid of initial values (config file required)")
    s.add_argument("--config", required=True, help="sweep configuration JSON")
    s.add_argument("--out", default="-", help="output path, '-' for stdout (default: -)")
    s.add_argument("--format", choices=("csv", "json"), default=None, help="output format (default: csv)")
    s.add_argument("--workers", type=int, default=None, help="worker processes (default: LM_SHOOTER_THREADS or CPU count)")
    s.set_defaults(_defaults={"format": "csv"})

    s = subs.add_parser("threshold", help="bisect the ground-state / sign-changing boundary in xi")
    o = _common(s, xi=False)
    o.add("--lo", type=_positive, default=0.1, help="ground-state end of the bracket")
    o.add("--hi", type=_positive, default=50.0, help="sign-changing end of the bracket")
    o.add("--iters", type=int, default=20, help="bisection steps")
    o.add("--resolution", type=float, default=0.0, help="stop once the bracket is this narrow")
    o.add("--probes", type=int, default=0, help="monotonicity probes inside the bracket")
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    """Merge command-line flags over config-file values over defaults."""
    cfg = {}
    if getattr(args, "config", None) and args.command != "sweep":
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    defaults = getattr(args, "_defaults", {})
    unknown = set(cfg) - set(defaults)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        val = getattr(args, key, None)
        out[key] = val if val is not None else cfg.get(key, default)
    # validate values that came from the config file the same way as flags
    checks = {"N": _dimension, "p": _exponent, "xi": _positive, "rmax": _positive}
    for key, fn in checks.items():
        if key in out and key in cfg and getattr(args, key, None) is None:
            try:
                out[key] = fn(str(out[key]))
            except argparse.ArgumentTypeError as exc:
                raise UsageError(str(exc)) from None
    if "eps" in out and out["eps"] < 0:
        raise UsageError("eps must be >= 0")
    for key in ("max_steps", "iters", "extensions", "probes"):
        if key in out and out[key] is not None and out[key] < 0:
            raise UsageError(f"{key} must be >= 0")
    return out


def _icfg(o: dict) -> IntegratorConfig:
    return IntegratorConfig(
        r_max=o["rmax"],
        rel_tol=o["rel_tol"],
        abs_tol=o["abs_tol"],
        event_tol=o["event_tol"],
        h0=o["h0"],
        max_steps=o["max_steps"],
        output=o["grid"],
    )


def _cmd_integrate(o):
    traj = integrate(Parameters(o["N"], o["p"], o["xi"]), _icfg(o))
    if o["format"] == "csv":
        return export.trajectory_csv(traj)
    return export.dumps({
        "params": traj.params,
        "termination": traj.termination,
        "reason": traj.reason,
        "events": list(traj.events),
        "r": traj.r, "u": traj.u, "up": traj.up, "w": traj.w, "rho": traj.rho,
        "E_resid": traj.E_resid, "P": P_series(traj), "M_partial": traj.M,
    })


def _cmd_classify(o):
    params = Parameters(o["N"], o["p"], o["xi"])
    crit = ClassifyCriteria(horizon=o["rmax"], tail_threshold=o["tail_threshold"])
    cls, traj, _ = classify_xi(params, _icfg(o), crit, horizon=o["rmax"], max_extensions=o["extensions"])
    if o["format"] == "json":
        return export.dumps(cls)
    if o["series"] == "zeros":
        z = find_zeros(traj)
        up = np.array([e.w / math.sqrt(1 + e.w * e.w) for e in traj.events if e.kind.value == "ZeroOfU"])
        return export.xy_csv(("r", "value"), z, up[: len(z)])
    env = envelope(traj)
    return export.xy_csv(("r", "value"), [e[0] for e in env], [e[1] for e in env])


def _cmd_diagnose(o):
    traj = integrate(Parameters(o["N"], o["p"], o["xi"]), _icfg(o))
    if o["format"] == "json":
        return export.dumps(diagnose(traj))
    header = ("r", "P", "dPdr", "E_resid")
    cols = [traj.r, P_series(traj), dPdr_series(traj), traj.E_resid]
    return export._csv(header, cols)


def _cmd_lane_emden(o):
    cfg = _icfg(o)
    traj = solve_lane_emden(o["N"], o["p"], cfg) if o["eps"] == 0 else \
        solve_eps_family(EpsFamilyParams(o["eps"], o["N"], o["p"]), cfg)
    if o["format"] == "csv":
        return export.xy_csv(("r", "u"), traj.r, traj.u)
    return export.dumps({"eps": traj.eps, "zeros": traj.zeros, "r": traj.r, "u": traj.u, "w": traj.w})


def _cmd_rescale_check(o):
    N, p = o["N"], o["p"]
    cfg = _icfg(o)
    traj = integrate(Parameters(N, p, o["xi"]), cfg)
    lam = o["lam"]
    mapped = map_to_eps(traj, lam)
    back = map_from_eps(mapped, mapped.eps)
    round_trip = float(max(np.max(np.abs(back.u - traj.u)), np.max(np.abs(back.w - traj.w)),
                           np.max(np.abs(back.r - traj.r) / traj.r)))
    le = solve_lane_emden(N, p, cfg.with_(r_max=o["le_horizon"]))
    R = le.first_zero if math.isfinite(le.first_zero) else o["le_horizon"]
    rows = []
    for eps in EPS_SEQUENCE:
        w = solve_eps_family(EpsFamilyParams(eps, N, p), cfg.with_(r_max=o["le_horizon"]))
        rows.append({"eps": eps, "distance": closeness(le, w, (0.0, 0.9 * R))})
    result = {
        "lambda": lam,
        "eps": mapped.eps,
        "round_trip_error": round_trip,
        "mapped_first_integral_residual": float(np.max(np.abs(mapped.E_resid))),
        "lane_emden_first_zero": le.first_zero if math.isfinite(le.first_zero) else None,
        "eps_family": rows,
    }
    if o["format"] == "json":
        return export.dumps(result)
    return export.xy_csv(("eps", "distance"), [r["eps"] for r in rows], [r["distance"] for r in rows])


def _cmd_decay_fit(o):
    cfg = _icfg(o)
    traj = integrate(Parameters(o["N"], o["p"], o["xi"]), cfg)
    r_end = float(traj.r[-1])
    window = tuple(o["window"]) if o["window"] else (r_end / 100.0, r_end)
    fit = fit_tail_exponent(traj, window)
    if o["format"] == "json":
        return export.dumps({"fit": fit, "d12_proxy": d12_proxy(traj)})
    lo, hi = fit.window
    if not (lo >= traj.r[0] and hi <= traj.r[-1] and hi > lo):
        return "log_r,log_u\n"
    x, y = tail_table(traj, (lo, hi))
    return export.xy_csv(("log_r", "log_u"), x, y)


def _cmd_sweep(args):
    with open(args.config, encoding="utf-8") as fh:
        d = json.load(fh)
    if not isinstance(d, dict):
        raise UsageError("sweep config must hold a JSON object")
    fmt = args.format or d.pop("format", "csv")
    d.pop("format", None)
    if args.workers is not None:
        d["workers"] = args.workers
    try:
        cfg = SweepConfig.from_dict(d)
    except (TypeError, KeyError, DomainError) as exc:
        raise UsageError(f"invalid sweep config: {exc}") from None
    report = run_sweep(cfg)
    return report.to_csv() if fmt == "csv" else export.dumps(report)


def _cmd_threshold(o):
    res = estimate_threshold(
        o["N"], o["p"], (o["lo"], o["hi"]), iters=o["iters"], resolution=o["resolution"],
        cfg=_icfg(o), n_probes=o["probes"],
    )
    if o["format"] == "json":
        return export.dumps(res)
    return export._csv(("xi_lo", "xi_hi", "width", "iterations", "non_monotone"),
                       [[res.xi_lo], [res.xi_hi], [res.width], [res.iterations], [res.non_monotone]])


_COMMANDS = {
    "integrate": _cmd_integrate,
    "classify": _cmd_classify,
    "diagnose": _cmd_diagnose,
    "lane-emden": _cmd_lane_emden,
    "rescale-check": _cmd_rescale_check,
    "decay-fit": _cmd_decay_fit,
    "threshold": _cmd_threshold,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "sweep":
            text = _cmd_sweep(args)
            target = args.out
        else:
            opts = _resolve(args)
            text = _COMMANDS[args.command](opts)
            target = args.out
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lm-shooter: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"lm-shooter: error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        print(f"lm-shooter: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"lm-shooter: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    try:
        export.write_text(text, target)
    except OSError as exc:
        print(f"lm-shooter: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
