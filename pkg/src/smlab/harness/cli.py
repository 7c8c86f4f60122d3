"""``smlab`` command line: norm, calc, rbound and experiment subcommands.

Exit status: 0 on success (for ``experiment``: every row passed), 1 when an
experiment has failing rows, 2 on invalid input.
"""

import argparse
import json
import math
import sys

from ..errors import ConfigError, SMLabError
from .config import EXPERIMENT_IDS, load_config


def _json_arg(text):
    """Inline JSON, or the path of a file holding it."""
    text = text.strip()
    if text[:1] in "{[":
        return text
    try:
        with open(text, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {text}: {exc}") from None


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _grid(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) == 1:
        return {"spacing": vals[0]}
    if len(vals) == 2:
        return {"spacing": vals[0], "s_range": (-vals[1], vals[1])}
    if len(vals) == 3:
        return {"spacing": vals[0], "s_range": (vals[1], vals[2])}
    raise ConfigError("--grid takes h, h,R or h,s_min,s_max")


def cmd_norm(args):
    from ..function_spaces import MultiplierFunction, hoermander_norm

    f = MultiplierFunction.from_json(_json_arg(args.func))
    kw = _grid(args.grid) if args.grid else {}
    value = hoermander_norm(f, args.alpha, args.p, **kw)
    _emit(json.dumps({"norm": value, "alpha": args.alpha, "p": args.p, "function": f.to_dict()}, sort_keys=True), args.out)
    return 0


def cmd_calc(args):
    from ..calculus import apply
    from ..function_spaces import MultiplierFunction
    from ..operator_models import OperatorModel

    A = OperatorModel.from_json(_json_arg(args.op))
    f = MultiplierFunction.from_json(_json_arg(args.func))
    kw = {}
    if args.sigma is not None:
        if args.engine != "cauchy":
            raise ConfigError("--sigma applies to the cauchy engine only")
        kw["sigma"] = args.sigma
    if args.alpha is not None:
        if args.engine != "br":
            raise ConfigError("--alpha applies to the br engine only")
        kw["alpha"] = args.alpha
    _emit(apply(A, f, args.engine, **kw).to_json(), args.out)
    return 0


def cmd_rbound(args):
    from ..operator_models import OperatorFamily
    from ..rbound import SearchConfig, rbound_lower, semi_rbound_lower

    F = OperatorFamily.from_json(_json_arg(args.family))
    kw = {"seed": args.seed}
    if args.samples is not None:
        kw["samples"] = args.samples
    if args.tuples:
        kw["tuples"] = tuple(int(k) for k in args.tuples.split(","))
    cfg = SearchConfig(**kw)
    est = semi_rbound_lower(F, cfg) if args.semi else rbound_lower(F, cfg)
    _emit(est.to_json(), args.out)
    return 0


def cmd_experiment(args):
    from .experiments import run

    cfg = load_config(args.config, args.id, args.out)
    rep = run(cfg)
    if cfg.out:
        rep.write(cfg.out)
    else:
        sys.stdout.write(rep.to_csv())
    failed = [r for r in rep.rows if not r.passed]
    for r in failed:
        print(f"FAIL {rep.experiment} {r.check}: {r.value} (target {r.target})", file=sys.stderr)
    return 0 if rep.passed else 1


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _p(text):
    v = math.inf if text.lower() in ("inf", "infinity") else float(text)
    if not v >= 1:
        raise argparse.ArgumentTypeError("p must be >= 1")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="smlab", description="Spectral multiplier laboratory.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="Hoermander norm of a multiplier")
    p.add_argument("--func", required=True, help="multiplier JSON (inline or file)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--p", type=_p, default=2.0)
    p.add_argument("--grid", help="h, h,R or h,s_min,s_max")
    p.add_argument("--out")
    p.set_defaults(func_=cmd_norm)

    p = sub.add_parser("calc", help="evaluate f(A) with one engine")
    p.add_argument("--op", required=True, help="operator model JSON (inline or file)")
    p.add_argument("--func", required=True, help="multiplier JSON (inline or file)")
    p.add_argument("--engine", default="spectral", choices=["spectral", "cauchy", "wave", "mellin", "br"])
    p.add_argument("--sigma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--out")
    p.set_defaults(func_=cmd_calc)

    p = sub.add_parser("rbound", help="R-bound lower estimate of an operator family")
    p.add_argument("--family", required=True, help="operator family JSON (inline or file)")
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--tuples", help="comma-separated tuple lengths")
    p.add_argument("--semi", action="store_true", help="semi-R-bound instead")
    p.add_argument("--out")
    p.set_defaults(func_=cmd_rbound)

    p = sub.add_parser("experiment", help="run one of the experiments E1-E7")
    p.add_argument("id", type=str.upper, choices=EXPERIMENT_IDS)
    p.add_argument("--config", required=True, help="flat TOML config (must set seed)")
    p.add_argument("--out", help="report path (.csv or .json)")
    p.set_defaults(func_=cmd_experiment)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func_(args)
    except (ConfigError, json.JSONDecodeError, KeyError) as exc:
        print(f"smlab: configuration error: {exc}", file=sys.stderr)
        return 2
    except SMLabError as exc:
        print(f"smlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
