"""Command-line entry point: ``ecsieve {constant,census,bounds,gl2,verify,plot-data}``.

Exit status is 0 on success, 2 on a usage error and 1 when a computation
fails; failures print one line ``ErrorName: message`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import census as census_mod
from .ec_reduction import parse_curve
from .gl2 import (
    CapExceeded,
    GaloisImageSpec,
    NotInvertible,
    count_C,
    count_Omega,
    density_C,
    gl2_order,
    parse_generators,
    prob_coprime,
)
from .koblitz import koblitz_constant, twin_constant_classical
from .sieve_theory import DEFAULT_EPS, OutOfRange, SieveParams, bounds_table, r_of_theta
from .verify import run_checks

logger = logging.getLogger("ecsieve")


class UsageError(ValueError):
    pass


def _theta(text: str) -> Fraction:
    try:
        th = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad theta {text!r}")
    return th


def _image_arg(args) -> GaloisImageSpec:
    spec = args.image or "full"
    if spec == "full":
        return GaloisImageSpec.full(args.me)
    if spec.startswith("gens:"):
        path = Path(spec[5:])
        if not path.exists():
            raise UsageError(f"generator file {path} not found")
        try:
            gens = parse_generators(path.read_text().splitlines(), args.me)
        except NotInvertible:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        return GaloisImageSpec(args.me, gens)
    raise UsageError(f"--image must be 'full' or 'gens:<file>', got {spec!r}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _flatten(obj, prefix="") -> list[tuple[str, object]]:
    if isinstance(obj, dict):
        rows = []
        for k, v in obj.items():
            rows += _flatten(v, f"{prefix}{k}.")
        return rows
    if isinstance(obj, list) and obj and isinstance(obj[0], dict):
        rows = []
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}{i}.")
        return rows
    return [(prefix.rstrip("."), json.dumps(obj) if isinstance(obj, list) else obj)]


def _as_csv(obj: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("field", "value"))
    w.writerows(_flatten(obj))
    return buf.getvalue()


def _format(obj: dict, fmt: str) -> str:
    return _dumps(obj) if fmt == "json" else _as_csv(obj)


def cmd_constant(args) -> int:
    if args.classical:
        est = twin_constant_classical(args.cutoff)
    else:
        est = koblitz_constant(_image_arg(args), args.cutoff)
    out = est.to_dict()
    out["tail_bound_note"] = "elementary tail estimate from 1 - E(l) <= 2/l^2"
    _emit(_format(out, args.format), args.out)
    return 0


def cmd_bounds(args) -> int:
    table = bounds_table(args.theta, args.eps)
    out = dict(vars(table))
    out["theta"] = str(args.theta)
    _emit(_format(out, args.format), args.out)
    return 0


def cmd_gl2(args) -> int:
    out: dict = {}
    if args.count_C is not None:
        n = args.count_C
        out.update(n=n, count_C=count_C(n), gl2_order=gl2_order(n))
        try:
            out["closed_form_density"] = str(density_C(n))
        except ValueError:
            pass
    if args.order is not None:
        out["order"] = {"n": args.order, "gl2_order": gl2_order(args.order)}
    if args.omega:
        image = _image_arg(args)
        out["omega"] = {"m_e": image.m_e, "image_mode": image.label,
                        "group_order": image.group_order, "count_Omega": count_Omega(image),
                        "prob_coprime": str(prob_coprime(image))}
    if not out:
        raise UsageError("gl2 needs --count-C N, --order N or --omega")
    _emit(_format(out, args.format), args.out)
    return 0


def _census_config(args) -> census_mod.CensusConfig:
    if args.curve is None:
        raise UsageError("census needs --curve a1,a2,a3,a4,a6")
    if args.x is None:
        raise UsageError("census needs --x N")
    th = args.theta
    params = SieveParams(theta=float(th), epsilon=args.eps, r=r_of_theta(th))
    kwargs = {}
    if args.interval:
        kwargs["checkpoint_interval"] = args.interval
    if args.probes:
        kwargs["ell_probe_set"] = tuple(int(s) for s in args.probes.split(","))
    try:
        curve = parse_curve(args.curve)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return census_mod.CensusConfig(curve, _image_arg(args), args.x,
                                   params=params, constant_cutoff=args.cutoff, **kwargs)


def cmd_census(args) -> int:
    config = _census_config(args)
    try:
        config.validate()
    except census_mod.ConfigError as exc:
        raise UsageError(str(exc)) from exc
    report = census_mod.run_census(config, checkpoint=args.checkpoint, dump=args.dump_primes,
                                   workers=args.workers, max_blocks=args.max_blocks)
    if report is None:
        print("census interrupted; resume with the same --checkpoint", file=sys.stderr)
        return 0
    _emit(report.to_json() if args.format == "json" else _as_csv(report.to_dict()), args.out)
    return 0


def cmd_plot_data(args) -> int:
    data = json.loads(Path(args.report).read_text())
    _emit(census_mod.plot_data(data), args.out)
    return 0


def cmd_verify(args) -> int:
    results = run_checks()
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
        failed += not ok
    return 1 if failed else 0


def _read_config(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--curve", help="a1,a2,a3,a4,a6")
    common.add_argument("--me", type=int, default=1, help="Serre modulus M_E")
    common.add_argument("--image", default="full", help="full | gens:<file>")
    common.add_argument("--theta", type=_theta, default=Fraction(1, 2))
    common.add_argument("--eps", type=float, default=DEFAULT_EPS)
    common.add_argument("--x", type=int)
    common.add_argument("--cutoff", type=int, default=10**6)
    common.add_argument("--out")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--dump-primes")
    common.add_argument("--checkpoint")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ecsieve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constant", parents=[common], help="Koblitz or twin-prime constant")
    p.add_argument("--classical", action="store_true", help="classical twin-prime constant")
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("bounds", parents=[common], help="sieve constants for theta")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gl2", parents=[common], help="matrix counts in GL_2(Z/nZ)")
    p.add_argument("--count-C", type=int, dest="count_C")
    p.add_argument("--order", type=int)
    p.add_argument("--omega", action="store_true", help="|Omega(M_E)| for --me/--image")
    p.set_defaults(func=cmd_gl2)

    p = sub.add_parser("census", parents=[common], help="prime census for a curve")
    p.add_argument("--interval", type=int, help="block width in x (one checkpoint per block)")
    p.add_argument("--probes", help="comma-separated probe primes (default 2,3,5,7)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-blocks", type=int, help="stop after this many blocks")
    p.set_defaults(func=cmd_census, cutoff=census_mod.DEFAULT_CONSTANT_CUTOFF)

    p = sub.add_parser("verify", parents=[common], help="quick self-checks")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot-data", parents=[common], help="CSV series from a census report")
    p.add_argument("report")
    p.set_defaults(func=cmd_plot_data)
    parser.set_defaults(subcommands=sub.choices)
    return parser


_CONVERT = {"me": int, "x": int, "cutoff": int, "eps": float, "theta": _theta,
            "interval": int, "workers": int, "max_blocks": int}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            # re-parse with file values as defaults so explicit flags still win
            values = _read_config(args.config)
            args.subcommands[args.command].set_defaults(**{k: _CONVERT.get(k, str)(v) for k, v in values.items()})
            args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, OutOfRange, argparse.ArgumentTypeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (CapExceeded, NotInvertible, OverflowError, ArithmeticError,
            census_mod.MissingCheckpoints, ValueError, AssertionError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
