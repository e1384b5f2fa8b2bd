"""Command-line interface.

Subcommands: moments, concurrence, sweep, limit-temp, limit-field, figure,
compare. Energies are in units of v unless --v is given (k = 1 throughout).

Exit codes: 0 ok, 2 invalid arguments, 3 numerical failure
(breakdown/quadrature/convergence), 4 tier not applicable at every point.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import (BreakdownError, ConvergenceError, DomainError,
                     QuadratureError, XxzentError)
from .model import ModelParams
from .sweep import (CSV_COLUMNS, GridAxis, SweepSpec, evaluate_point,
                    limit_field, limit_temperature, points_to_csv,
                    points_to_json, run_sweep, TIERS)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_NOT_APPLICABLE = 4


def _read_config(path):
    """key=value lines; '#' comments; keys match the long CLI flags."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"bad config line: {raw.rstrip()}")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _parse_grid(text) -> GridAxis:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise argparse.ArgumentTypeError(
            "grid must be axis:min:max:count[:log], e.g. b:0:1.1:50")
    name = parts[0]
    try:
        lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None
    scale = "lin"
    if len(parts) == 5:
        if parts[4] not in ("log", "lin"):
            raise argparse.ArgumentTypeError("grid scale must be lin or log")
        scale = parts[4]
    try:
        return GridAxis(name=name, lo=lo, hi=hi, count=count, scale=scale)
    except DomainError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _add_model_args(p, with_t=True, with_b=True):
    p.add_argument("--n", type=int, required=True, help="number of spins")
    p.add_argument("--v", type=float, default=1.0,
                   help="coupling strength (energy unit; default 1)")
    p.add_argument("--gamma", type=float, default=1.0, help="anisotropy <= 1")
    if with_b:
        p.add_argument("--b", type=float, default=0.0, help="transverse field")
    if with_t:
        p.add_argument("--T", type=float, default=0.0,
                       help="temperature (0 selects the ground state)")


def _add_common(p):
    p.add_argument("--tier", choices=TIERS, default="exact")
    p.add_argument("--mode", choices=["cspa", "spa", "cmfa", "mfa"],
                   help="alias for --tier for the approximation tiers")
    p.add_argument("--config", help="key=value file with default options")
    p.add_argument("--out-format", choices=["csv", "json"], default="csv")
    p.add_argument("--out-dir", help="write output files here instead of stdout")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="xxzent",
        description="Thermal pairwise entanglement in the fully connected "
                    "XXZ model (exact / CSPA / CMFA tiers and their degraded "
                    "SPA / MFA modes).")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", help="collective moments at one point")
    _add_model_args(p)
    _add_common(p)

    p = sub.add_parser("concurrence", help="concurrence at one point")
    _add_model_args(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="evaluate a tier over a (b, T) grid")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--grid", action="append", type=_parse_grid, required=True,
                   metavar="AXIS:MIN:MAX:COUNT[:log]",
                   help="sweep axis; repeat for a 2D grid")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("limit-temp", help="largest T with C > 0 at fixed b")
    _add_model_args(p, with_t=False)
    _add_common(p)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--probes", type=int, default=60)

    p = sub.add_parser("limit-field", help="largest b with C > 0 at fixed T")
    _add_model_args(p, with_b=False)
    _add_common(p)
    p.add_argument("--b-min", type=float, default=0.0)
    p.add_argument("--b-max", type=float)
    p.add_argument("--probes", type=int, default=60)

    p = sub.add_parser("figure", help="emit CSV + gnuplot data for figure 1-5")
    p.add_argument("--id", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help=argparse.SUPPRESS)

    p = sub.add_parser("compare",
                       help="run two tiers on one grid, report C differences")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--tier-b", choices=TIERS, required=True,
                   help="second tier (first one comes from --tier)")
    p.add_argument("--grid", action="append", type=_parse_grid, required=True)
    p.add_argument("--workers", type=int, default=1)
    return ap


def _apply_config(args, argv):
    if getattr(args, "config", None):
        cfg = _read_config(args.config)
        given = set(argv)
        for key, raw in cfg.items():
            if not hasattr(args, key):
                raise DomainError(f"unknown config key {key!r}")
            cur = getattr(args, key)
            if f"--{key.replace('_', '-')}" in given or f"--{key}" in given:
                continue  # explicit flags win over the config file
            if key == "grid":
                setattr(args, key, [_parse_grid(g) for g in raw.split()])
                continue
            typ = type(cur) if cur is not None else str
            setattr(args, key, typ(raw) if cur is not None else raw)
    return args


def _params_from(args, t_default=0.0):
    return ModelParams(n=args.n, v=args.v, gamma=args.gamma,
                       b=getattr(args, "b", 0.0),
                       T=getattr(args, "T", t_default))


def _tier_from(args):
    return args.mode if getattr(args, "mode", None) else args.tier


def _emit(args, text, name):
    if getattr(args, "out_dir", None):
        os.makedirs(args.out_dir, exist_ok=True)
        path = os.path.join(args.out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(path)
    else:
        sys.stdout.write(text)


def _points_out(args, points, spec=None, name="points"):
    if args.out_format == "json":
        _emit(args, points_to_json(points, spec), f"{name}.json")
    else:
        _emit(args, points_to_csv(points), f"{name}.csv")


def _status_exit(points):
    statuses = {pt.status for pt in points}
    if statuses and statuses <= {"not-applicable"}:
        return EXIT_NOT_APPLICABLE
    if statuses and statuses <= {"breakdown", "error", "not-applicable"}:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_point(args, with_c):
    tier = _tier_from(args)
    pt = evaluate_point(tier, _params_from(args))
    if pt.status == "not-applicable":
        print(f"status: {pt.status} ({pt.message})", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    if pt.status in ("breakdown", "error"):
        print(f"status: {pt.status} ({pt.message})", file=sys.stderr)
        return EXIT_NUMERICAL
    cols = CSV_COLUMNS if with_c else tuple(
        c for c in CSV_COLUMNS if c not in ("C", "nC", "EoF"))
    if args.out_format == "json":
        _points_out(args, [pt], name="point")
    else:
        _emit(args, points_to_csv([pt], columns=cols), "point.csv")
    return EXIT_OK


def _cmd_sweep(args):
    spec = SweepSpec(tier=_tier_from(args), fixed=_params_from(args),
                     axes=tuple(args.grid))
    points = run_sweep(spec, workers=args.workers)
    _points_out(args, points, spec, name="sweep")
    return _status_exit(points)


def _limit_text(res, axis):
    lines = []
    if res.limit is None and not res.intervals:
        lines.append(f"no entanglement found on the {axis} probe grid "
                     "(zero-entanglement marker)")
    for lo, hi in res.intervals:
        hi_s = "open" if hi is None else f"{hi:.8g}"
        lines.append(f"band: {lo:.8g} .. {hi_s}")
    if res.limit is not None:
        lines.append(f"limit: {res.limit:.8g}")
    return "\n".join(lines) + "\n"


def _cmd_limit(args, which):
    tier = _tier_from(args)
    if which == "T":
        params = _params_from(args, t_default=1.0)
        res = limit_temperature(tier, params, t_min=args.t_min,
                                t_max=args.t_max, probes=args.probes)
    else:
        params = _params_from(args, t_default=getattr(args, "T", 0.1))
        res = limit_field(tier, params, b_min=args.b_min, b_max=args.b_max,
                          probes=args.probes)
    if args.out_format == "json":
        import json
        doc = {"tier": tier, "axis": which,
               "intervals": [[lo, hi] for lo, hi in res.intervals],
               "limit": res.limit}
        _emit(args, json.dumps(doc, indent=1) + "\n", "limit.json")
    else:
        _emit(args, _limit_text(res, which), "limit.txt")
    if all(s == "undefined" for s in res.statuses):
        return EXIT_NOT_APPLICABLE
    return EXIT_OK


def _cmd_figure(args):
    from .figures import reproduce_figure
    files = reproduce_figure(args.id, args.out_dir)
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_compare(args):
    spec_a = SweepSpec(tier=_tier_from(args), fixed=_params_from(args),
                       axes=tuple(args.grid))
    spec_b = SweepSpec(tier=args.tier_b, fixed=_params_from(args),
                       axes=tuple(args.grid))
    pa = run_sweep(spec_a, workers=args.workers)
    pb = run_sweep(spec_b, workers=args.workers)
    diffs = []
    for a, b in zip(pa, pb):
        if a.status == "ok" and b.status == "ok":
            diffs.append(abs(a.result.concurrence - b.result.concurrence))
    if not diffs:
        print("no grid point where both tiers are ok", file=sys.stderr)
        return EXIT_NOT_APPLICABLE
    print(f"points compared: {len(diffs)} / {len(pa)}")
    print(f"max |dC|:  {max(diffs):.6e}")
    print(f"mean |dC|: {sum(diffs) / len(diffs):.6e}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, argv)
        if args.command == "moments":
            return _cmd_point(args, with_c=False)
        if args.command == "concurrence":
            return _cmd_point(args, with_c=True)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "limit-temp":
            return _cmd_limit(args, "T")
        if args.command == "limit-field":
            return _cmd_limit(args, "b")
        if args.command == "figure":
            return _cmd_figure(args)
        if args.command == "compare":
            return _cmd_compare(args)
        parser.error(f"unknown command {args.command!r}")
    except (BreakdownError, QuadratureError, ConvergenceError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as err:
        print(f"invalid arguments: {err}", file=sys.stderr)
        return EXIT_USAGE
    except XxzentError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
