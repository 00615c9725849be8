"""Command-line front end: ``abel <subcommand> [flags]``.

Reports are JSON on standard output (or ``--out``); ``continue``, ``gamma``
and ``model monodromy`` can emit CSV instead. Exit codes: 0 success,
1 domain error (JSON on standard error), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

from .bounds import BoundParams, regularity_radius, safe_disk_radius_at_origin, solution_majorant
from .continuation import (ToleranceOptions, integrate_along_path, locate_movable_singularity,
                           singular_solution_puiseux)
from .core import AbelEquation, ComplexPath, as_complex, complex_to_pair, line
from .errors import AbelError
from .model import (limit_cycle_roots, model_params, quarter_case_cycles, verify_limit_cycle)
from .monodromy import generator_loops, monodromy, track_branches
from .poincare import (continue_poincare_along_sigma, fixed_point_search, poincare_map,
                       singular_locus_gamma)

log = logging.getLogger("abel")


class UsageError(Exception):
    pass


def _sanitize(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, complex):
        return [_sanitize(obj.real), _sanitize(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def dumps(report) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(_sanitize(report), indent=2, sort_keys=True) + "\n"


def _load_json(value: str):
    path = Path(value)
    if path.exists():
        with path.open("r", encoding="utf-8") as handle:
            return json.load(handle)
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{value!r} is neither a file nor inline JSON") from exc


def _complex_arg(text: str) -> complex:
    try:
        return as_complex(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}") from exc


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _nonneg(text: str) -> float:
    v = float(text)
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return v


def _equation(args) -> AbelEquation:
    if args.eq is None:
        raise UsageError("--eq is required")
    return AbelEquation.from_json(_load_json(args.eq))


def _path(args, flag="path") -> ComplexPath:
    value = getattr(args, flag)
    if value is None:
        if args.a is not None and args.b is not None:
            return line(args.a, args.b)
        raise UsageError(f"--{flag} (or --a and --b) is required")
    return ComplexPath.from_json(_load_json(value))


def _options(args) -> ToleranceOptions:
    return ToleranceOptions().with_overrides(rel_tol=args.rel_tol)


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def cmd_bounds(args):
    params = BoundParams(args.abs_a, args.abs_ya, args.K, args.m)
    rho = regularity_radius(params)
    ts = args.t if args.t else ([] if math.isinf(rho) else [rho * k / 8 for k in range(8)])
    report = {"params": vars(params), "rho": rho,
              "majorant": [[t, solution_majorant(params, t)] for t in ts]}
    if args.abs_ya > 0:
        report["safe_radius"] = safe_disk_radius_at_origin(args.abs_ya, args.K, args.m)
    return report


def cmd_continue(args):
    eq = _equation(args)
    res = integrate_along_path(eq, args.y0, _path(args), _options(args))
    if args.format == "csv":
        return res.to_csv()
    return res.to_json()


def cmd_singularity(args):
    eq = _equation(args)
    if args.a is None:
        raise UsageError("--a (the point where y0 is given) is required")
    rec = locate_movable_singularity(eq, args.a, args.y0, _options(args))
    series = singular_solution_puiseux(eq, rec.location, args.terms)
    out = rec.to_json()
    out["puiseux"] = series.to_json()
    return out


def cmd_poincare(args):
    eq = _equation(args)
    path = _path(args)
    return poincare_map(eq, path.start, path.end, path, args.y0, _options(args)).to_json()


def cmd_gamma(args):
    eq = _equation(args)
    path = _path(args)
    region = [float(v) for v in args.region.split(",")]
    if len(region) != 4:
        raise UsageError("--region needs RE_MIN,RE_MAX,IM_MIN,IM_MAX")
    sample = singular_locus_gamma(eq, path.start, path.end, path, region, args.grid, _options(args))
    if args.format == "csv":
        return sample.to_csv()
    return sample.to_json()


def cmd_deform(args):
    eq = _equation(args)
    path = _path(args)
    if args.sigma is None:
        raise UsageError("--sigma is required")
    sigma = ComplexPath.from_json(_load_json(args.sigma))
    germ, trace = continue_poincare_along_sigma(eq, path.start, path.end, path, sigma, _options(args))
    return {"germ": germ.to_json(), "trace": trace.to_json()}


def cmd_fixed_points(args):
    eq = _equation(args)
    path = _path(args)
    seeds = [as_complex(s) for s in args.seeds.split(";")] if args.seeds else []
    return fixed_point_search(eq, path.start, path.end, path, seeds, _options(args)).to_json()


def cmd_model_params(args):
    return model_params(args.n).to_json()


def cmd_model_cycles(args):
    roots = limit_cycle_roots(args.n, args.b if args.b is not None else 1.0)
    return {"n": args.n, "roots": [complex_to_pair(r) for r in roots]}


def cmd_model_monodromy(args):
    params = model_params(args.n)
    y0 = args.y0
    if args.path is not None:
        loop = ComplexPath.from_json(_load_json(args.path))
    else:
        loop = generator_loops(params, y0)[args.loop]
    if args.format == "csv":
        _, track = track_branches(params, y0, loop, record=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "label", "re_u", "im_u"])
        for t, roots in track:
            for k, u in enumerate(roots):
                w.writerow([repr(t), k, repr(u.real), repr(u.imag)])
        return buf.getvalue()
    return monodromy(params, y0, loop).to_json()


def cmd_model_quarter(args):
    return {"k": args.k, "cycles": [c.to_json() for c in quarter_case_cycles(args.k)]}


def cmd_model_verify_cycle(args):
    params = model_params(args.n)
    b = args.b if args.b is not None else 1.0
    roots = [args.y0] if args.y0_given else limit_cycle_roots(args.n, b)
    opts = ToleranceOptions(rel_tol=args.rel_tol or 1e-12)
    return {"n": args.n, "witnesses": [verify_limit_cycle(params, r, b, opts).to_json() for r in roots]}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p, eq=True, path=True):
    if eq:
        p.add_argument("--eq", help="equation JSON file or inline JSON {\"p\": [...], \"q\": [...]}")
    if path:
        p.add_argument("--path", help="path JSON file or inline JSON list of segments")
    p.add_argument("--y0", type=_complex_arg, default=0j, help="initial value RE,IM")
    p.add_argument("--a", type=_complex_arg, default=None, help="start point RE,IM")
    p.add_argument("--b", type=_complex_arg, default=None, help="end point RE,IM")
    p.add_argument("--rel-tol", type=_positive, default=None)
    p.add_argument("--out", help="write the report to this file")
    p.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="regularity radius, majorant and safe disk")
    p.add_argument("--abs-a", type=_nonneg, required=True)
    p.add_argument("--abs-ya", type=_nonneg, required=True)
    p.add_argument("--K", type=_positive, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--t", type=_nonneg, action="append", help="sample point (repeatable)")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("continue", help="continue a solution along a path")
    _common(p)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("singularity", help="locate a movable singularity and its Puiseux series")
    _common(p, path=False)
    p.add_argument("--terms", type=int, default=6)
    p.set_defaults(func=cmd_singularity)

    p = sub.add_parser("poincare", help="evaluate the Poincare map and its derivative")
    _common(p)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("gamma", help="sample the singular locus of the Poincare map")
    _common(p)
    p.add_argument("--region", required=True, help="RE_MIN,RE_MAX,IM_MIN,IM_MAX")
    p.add_argument("--grid", type=int, default=9)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("deform", help="continue the Poincare map along a curve of initial values")
    _common(p)
    p.add_argument("--sigma", help="curve of initial values as a path JSON")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("fixed-points", help="periodic solutions by Newton's method")
    _common(p)
    p.add_argument("--seeds", default="", help="seeds as RE,IM;RE,IM;...")
    p.set_defaults(func=cmd_fixed_points)

    model = sub.add_parser("model", help="the model y' = c x y^3 + y^2")
    msub = model.add_subparsers(dest="model_command", required=True)

    p = msub.add_parser("params")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_model_params)

    p = msub.add_parser("cycles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=_complex_arg, default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_model_cycles)

    p = msub.add_parser("monodromy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--y0", type=_complex_arg, default=1 + 0j)
    p.add_argument("--loop", choices=["z", "w", "both"], default="z",
                   help="z: around 0, w: around the movable singularity, both: around both")
    p.add_argument("--path", help="explicit closed loop JSON (overrides --loop)")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_model_monodromy)

    p = msub.add_parser("quarter")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_model_quarter)

    p = msub.add_parser("verify-cycle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=_complex_arg, default=None)
    p.add_argument("--y0", type=_complex_arg, default=None,
                   help="root to verify (default: all roots)")
    p.add_argument("--rel-tol", type=_positive, default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_model_verify_cycle)
    return parser


def _setup_logging():
    level = os.environ.get("ABEL_LOG", "off").lower()
    levels = {"info": logging.INFO, "debug": logging.DEBUG}
    if level in levels:
        logging.basicConfig(stream=sys.stderr, level=levels[level],
                            format="%(levelname)s %(name)s: %(message)s")


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, dispatch, emit the report; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "command", None) == "model" and args.model_command == "verify-cycle":
        args.y0_given = args.y0 is not None
    try:
        report = args.func(args)
    except UsageError as exc:
        parser.print_usage(stderr)
        stderr.write(f"abel: error: {exc}\n")
        return 2
    except (AbelError, ValueError, KeyError, TypeError) as exc:
        payload = exc.to_dict() if isinstance(exc, AbelError) else {"error": type(exc).__name__,
                                                                     "message": str(exc)}
        stderr.write(dumps(payload))
        return 1
    text = report if isinstance(report, str) else dumps(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


def main() -> int:
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
