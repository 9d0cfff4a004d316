"""``mixtrace`` command line."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import config as config_mod
from .errors import ConfigError, DomainError, MixtraceError
from .exponents import ExponentConfig
from .families import FAMILY_KINDS, family_defaults, instantiate
from .hardy import HARDY_SHAPES, HardyParams, hardy_check
from .harness import (
    CheckKind,
    Instance,
    besov_trace_check,
    refinement_study,
    write_jsonl,
    write_summary_csv,
)
from .norms import (
    BesovVariant,
    besov_norm,
    besov_seminorm,
    gradient_norm,
    mixed_lebesgue_norm,
    modulus,
    sobolev_norm,
    weighted_mixed_norm,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .reports import FAIL, ComparisonReport
from .smoothing import DEFAULT_KMAX, extend, extension_gap, trace_restrict

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

NORM_KINDS = ("lp", "gradient", "modulus", "besov", "seminorm", "weighted", "sobolev")

EPILOG = "Environment: MIXTRACE_WORKERS sets the campaign worker count (default: CPU count)."


class _Formatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def _number(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def _family_spec(name: str, d: int, params: str | None) -> dict:
    extra = json.loads(params) if params else {}
    if not isinstance(extra, dict):
        raise ConfigError("--params must be a JSON object")
    if name in FAMILY_KINDS:
        defaults = family_defaults(name)
        if "d" in defaults:
            extra.setdefault("d", d)
        if "eta" in defaults:
            extra.setdefault("eta", {"kind": "bump", "params": {"d": d}})
    return {"kind": name, "params": extra}


def _cfg(args) -> ExponentConfig:
    p = tuple(args.p)
    if len(p) == 1 and args.d > 1:
        p = p * args.d
    return ExponentConfig(args.d, p, args.q, args.alpha)


SPEC_FLAGS = {
    "box_radius": "box_radius",
    "panels": "panels_per_axis",
    "gauss_order": "points_per_panel",
    "vertical_panels": "vertical_panels",
    "octaves": "radial_octaves",
    "directions": "directions",
    "seed": "seed",
}


def _spec(args, base: QuadratureSpec = DEFAULT_SPEC) -> QuadratureSpec:
    """``base`` with every quadrature flag the user set."""
    changes = {field: getattr(args, flag) for flag, field in SPEC_FLAGS.items()
               if getattr(args, flag, None) is not None}
    return replace(base, **changes) if changes else base


def _fmt(x: float) -> str:
    return repr(float(f"{x:.12g}"))


def _print_report(rep: ComparisonReport) -> None:
    print(f"lhs {_fmt(rep.lhs)}")
    print(f"rhs {_fmt(rep.rhs)}")
    print(f"lhs/rhs {_fmt(rep.lhs / rep.rhs) if rep.rhs else 'nan'}")
    print(f"constant {_fmt(rep.constant)}")
    print(f"ratio {_fmt(rep.ratio)}")
    print(f"status {rep.status}")


def _status_code(reports) -> int:
    return EXIT_FAIL if any(r.status == FAIL for r in reports) else EXIT_OK


# ---------------------------------------------------------------------------
# subcommands


def cmd_norm(args) -> int:
    f = instantiate(_family_spec(args.family, args.d, args.params))
    cfg = _cfg(args)
    spec = _spec(args)
    kind = args.kind
    if kind == "lp":
        value = mixed_lebesgue_norm(f, cfg, spec)
    elif kind == "gradient":
        value = gradient_norm(f, cfg, spec)
    elif kind == "modulus":
        value = modulus(f, args.delta, cfg, spec)
    elif kind == "besov":
        value = besov_norm(f, cfg, BesovVariant.parse(args.variant), spec)
    elif kind == "seminorm":
        value = besov_seminorm(f, cfg, BesovVariant.parse(args.variant), spec).value
    elif kind == "weighted":
        value = weighted_mixed_norm(f, cfg, spec)
    else:
        value = sobolev_norm(f, cfg, spec)
    print(_fmt(value))
    return EXIT_OK


def cmd_hardy(args) -> int:
    params = HardyParams(args.q, args.sigma, args.a)
    rep = hardy_check(args.family, params, _spec(args), eps=args.eps)
    _print_report(rep)
    return _status_code([rep])


def cmd_besov(args) -> int:
    f = instantiate(_family_spec(args.family, args.d, args.params))
    cfg = _cfg(args)
    spec = _spec(args)
    names = ("direct", f"integral:{args.a}", "dyadic")
    values = {n: besov_norm(f, cfg, BesovVariant.parse(n), spec) for n in names}
    print(f"ell {_fmt(cfg.ell)}")
    for n, v in values.items():
        print(f"{n} {_fmt(v)}")
    worst = 0.0
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            r = values[a] / values[b] if values[b] else math.nan
            worst = max(worst, r, 1 / r if r else math.inf)
            print(f"{a}/{b} {_fmt(r)}")
    print(f"worst {_fmt(worst)}")
    return EXIT_OK


def cmd_extend(args) -> int:
    g = instantiate(_family_spec(args.family, args.d, args.params))
    cfg = _cfg(args)
    spec = _spec(args)
    E = extend(g, cfg, args.kmax, spec)
    rows = []
    for s in range(args.s_min, args.s_max + 1):
        y = 2.0**-s
        raw = extension_gap(E, y, spec)
        rows.append((y, raw, 2.0 ** (s * cfg.ell) * raw))
    out = sys.stdout if args.emit_slices == "-" else open(args.emit_slices, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["y", "raw", "scaled"])
        for row in rows:
            w.writerow([repr(v) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()
    if args.sobolev:
        print(f"sobolev {_fmt(sobolev_norm(E, cfg, spec))}", file=sys.stderr)
    return EXIT_OK


def cmd_trace(args) -> int:
    u = instantiate(_family_spec(args.family, args.d, args.params))
    cfg = _cfg(args)
    spec = _spec(args)
    g = trace_restrict(u)
    print(f"trace_lp {_fmt(mixed_lebesgue_norm(g, cfg, spec))}")
    rep = besov_trace_check(u, cfg, spec, {"besov-trace": args.ceiling})
    _print_report(rep)
    return _status_code([rep])


def cmd_verify(args) -> int:
    cfg = config_mod.load(args.config)
    cfg = replace(cfg, quadrature=_spec(args, cfg.quadrature))
    from .suite import run_suite

    result = run_suite(cfg)
    out = args.out or cfg.output.jsonl
    write_jsonl(result.reports, out)
    summary = args.summary or cfg.output.summary
    if summary != "-":
        write_summary_csv(result.summaries, summary)
    for s in result.summaries:
        print(f"{s.kind}: {s.passed}/{s.total} PASS, {s.failed} FAIL, {s.inconclusive} INCONCLUSIVE, "
              f"{s.excluded} excluded, C_emp {s.empirical_constant:.6g}")
    for r in result.failed:
        print(f"FAIL {r.to_json()}", file=sys.stderr)
    return _status_code(result.reports)


def cmd_refine(args) -> int:
    kind = CheckKind(args.kind)
    spec = _spec(args)
    if kind == CheckKind.HARDY:
        inst = Instance(kind, args.family, HardyParams(args.q, args.sigma, args.a), (("eps", args.eps),))
    else:
        fam = _family_spec(args.family, args.d, args.params)
        opts = (("delta", args.delta),) if kind == CheckKind.CONVOLUTION else ()
        inst = Instance(kind, fam, _cfg(args), opts)
    rep = refinement_study(kind, inst, args.levels, spec)
    for name, drift in rep.check["drifts"].items():
        print(f"{name} {drift:.3e}")
    print(f"max_drift {rep.lhs:.3e}")
    print(f"status {rep.status}")
    return _status_code([rep])


# ---------------------------------------------------------------------------
# parser


def _add_family(p, default: str, halfspace: bool = False) -> None:
    what = "half-space family kind" if halfspace else "family kind"
    p.add_argument("--family", default=default, help=f"{what} from the registry")
    p.add_argument("--params", default=None,
                   help="extra family parameters as a JSON object; unset keeps the registry defaults")


def _add_cfg(p, alpha: float = 0.0) -> None:
    p.add_argument("--d", type=int, default=1, help="boundary dimension")
    p.add_argument("--p", type=float, nargs="+", default=[2.0],
                   help="mixed exponents p_1 .. p_d (one value is repeated d times)")
    p.add_argument("--q", type=float, default=2.0, help="outer exponent")
    p.add_argument("--alpha", type=float, default=alpha, help="weight exponent of y^alpha")


def _add_spec_flags(p) -> None:
    """Quadrature overrides; accepted before or after the subcommand."""
    default = argparse.SUPPRESS
    unset = "(default: config or built-in value)"
    p.add_argument("--seed", type=int, default=default, help=f"seed for direction sets {unset}")
    p.add_argument("--box-radius", type=float, default=default,
                   help=f"half-width R of the truncation box {unset}")
    p.add_argument("--panels", type=int, default=default, help=f"panels per axis {unset}")
    p.add_argument("--gauss-order", type=int, default=default, help=f"Gauss points per panel {unset}")
    p.add_argument("--vertical-panels", type=int, default=default, help=f"vertical panels {unset}")
    p.add_argument("--octaves", type=int, default=default, help=f"radial octaves J {unset}")
    p.add_argument("--directions", type=int, default=default,
                   help=f"direction count for d >= 2 {unset}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixtrace", formatter_class=_Formatter, epilog=EPILOG,
        description="Numerical checks of trace and extension inequalities on weighted half-spaces.",
    )
    _add_spec_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, helptext):
        p = sub.add_parser(name, help=helptext, description=helptext, formatter_class=_Formatter,
                           epilog=EPILOG)
        _add_spec_flags(p)
        return p

    p = command("norm", "compute one norm of a family member")
    _add_family(p, "hat")
    _add_cfg(p)
    p.add_argument("--kind", choices=NORM_KINDS, default="lp", help="which norm")
    p.add_argument("--variant", default="direct",
                   help="Besov variant: direct, integral:<a> or dyadic")
    p.add_argument("--delta", type=float, default=0.25, help="radius for --kind modulus")
    p.set_defaults(func=cmd_norm)

    p = command("hardy", "running-average inequality on (0, a)")
    p.add_argument("--q", type=float, default=2.0, help="exponent q >= 1")
    p.add_argument("--sigma", type=float, default=0.0, help="weight exponent, below 1 - 1/q")
    p.add_argument("--a", type=_number, default=1.0, help="interval end; 'inf' allowed")
    p.add_argument("--family", choices=HARDY_SHAPES, default="near-extremal", help="test shape")
    p.add_argument("--eps", type=float, default=0.1, help="offset of the near-extremal power")
    p.set_defaults(func=cmd_hardy)

    p = command("besov", "direct, integral and dyadic Besov norms with their ratios")
    _add_family(p, "hat")
    _add_cfg(p)
    p.add_argument("--a", type=_number, default=1.0, help="upper radius of the integral variant")
    p.set_defaults(func=cmd_besov)

    p = command("extend", "build E(g) and emit slice gaps as CSV")
    _add_family(p, "hat")
    _add_cfg(p)
    p.add_argument("--kmax", type=int, default=DEFAULT_KMAX, help="finest dyadic level")
    p.add_argument("--s-min", type=int, default=4, help="first slice level s, y = 2^-s")
    p.add_argument("--s-max", type=int, default=9, help="last slice level")
    p.add_argument("--emit-slices", default="-", help="CSV path (y, raw, scaled); '-' is stdout")
    p.add_argument("--sobolev", action="store_true", help="also print the Sobolev norm of E(g)")
    p.set_defaults(func=cmd_extend)

    p = command("trace", "boundary restriction and the Besov trace bound")
    _add_family(p, "ramp-cutoff", halfspace=True)
    _add_cfg(p)
    p.add_argument("--ceiling", type=float, default=50.0, help="constant the ratio is judged against")
    p.set_defaults(func=cmd_trace)

    p = command("verify", "run the campaigns named in a config file")
    p.add_argument("--config", default=str(config_mod.default_config_path()), help="TOML config")
    p.add_argument("--out", default=None, help="JSONL report path; unset uses output.jsonl of the config")
    p.add_argument("--summary", default=None,
                   help="CSV summary path, '-' to skip; unset uses output.summary of the config")
    p.set_defaults(func=cmd_verify)

    p = command("refine", "mesh-refinement stability of one instance")
    p.add_argument("--kind", choices=[k.value for k in CheckKind], default="besov-equivalence",
                   help="check kind")
    _add_family(p, "hat")
    _add_cfg(p)
    p.add_argument("--levels", type=int, default=2, help="number of meshes, 2 to 4")
    p.add_argument("--delta", type=float, default=0.25, help="mollifier radius for convolution")
    p.add_argument("--sigma", type=float, default=0.0, help="Hardy weight exponent")
    p.add_argument("--a", type=_number, default=1.0, help="Hardy interval end")
    p.add_argument("--eps", type=float, default=0.1, help="near-extremal offset")
    p.set_defaults(func=cmd_refine)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, DomainError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MixtraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def cli_dispatch(argv: Sequence[str]) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
