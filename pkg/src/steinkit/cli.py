"""steinkit command line: kernel | score | solve | compare | case | verify.

Exit codes: 0 ok, 1 unexpected failure, 2 parse error, 3 incompatible inputs,
4 enumeration budget exceeded, 5 soundness violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .casestudies import STUDIES
from .compare import kernel_bound, score_bound
from .errors import (BudgetError, CenteringError, ClassMembershipError, ExpressionDomainError,
                     ExpressionSyntaxError, IncompatibleError, NormalizationError,
                     SoundnessError)
from .expression import parse_expression
from .functions import Indicator, IntervalIndicator
from .measure import density_from_spec
from .operators import OperatorSpec, pair
from .solve import solve
from .verify import default_tol, run_suite

SCHEMA_VERSION = 1
EXIT_PARSE, EXIT_INCOMPATIBLE, EXIT_BUDGET, EXIT_SOUNDNESS = 2, 3, 4, 5


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    specs: list = field(default_factory=list)
    metric: str = "tv"
    test_class: str = "tv"
    sweep: dict = field(default_factory=dict)
    output: str | None = None
    fmt: str = "csv"
    tol: float | None = None

    def __post_init__(self):
        for k, v in self.sweep.items():
            if not v:
                raise UsageError(f"sweep over {k!r} is empty")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tolerances must be positive")


# ---- parsing helpers -------------------------------------------------------------------


def _number(text):
    text = text.strip()
    try:
        v = int(text)
    except ValueError:
        try:
            v = float(text)
        except ValueError:
            raise UsageError(f"not a number: {text!r}") from None
    return v


def _numbers(text):
    return [_number(t) for t in str(text).split(",") if t.strip()]


def parse_params(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        vals = [_number(t) for t in v.replace(";", ",").split(",") if t.strip()]
        out[k.strip()] = vals[0] if len(vals) == 1 else vals
    return out


def parse_density_arg(text):
    """'family', 'family:k=v,k=v', a JSON object, or @path to a JSON file."""
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return json.load(fh)
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad JSON density spec: {exc}") from None
    family, _, rest = text.partition(":")
    params = parse_params([t for t in rest.split(",") if t]) if rest else {}
    return {"family": family, "params": params} if params else {"family": family}


def spec_from_args(args):
    if getattr(args, "spec_file", None):
        with open(args.spec_file, encoding="utf-8") as fh:
            return json.load(fh)
    if args.dist is None:
        raise UsageError("--dist is required")
    if args.dist == "table":
        if not args.pmf:
            raise UsageError("a table density needs --pmf")
        return {"family": "table", "pmf": _numbers(args.pmf),
                "lattice": {"origin": args.origin, "spacing": args.spacing}}
    if args.dist == "expr":
        if not args.formula or not args.support:
            raise UsageError("an expression density needs --formula and --support")
        return {"family": "expr", "formula": args.formula, "support": _numbers(args.support)}
    spec = parse_density_arg(args.dist)
    extra = parse_params(args.param)
    if extra:
        spec.setdefault("params", {}).update(extra)
    return spec


def parse_grid(text):
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError("grid needs lo <= hi and a positive step")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _operator(args, d):
    kind = getattr(args, "operator", None)
    if kind is None:
        return None
    spacing = d.support.spacing if d.is_lattice else 1.0
    if kind == "span":
        spacing = spacing / 2
    return OperatorSpec(kind, spacing, bool(getattr(args, "scaled", False)))


def parse_test_function(text):
    """'indicator:z', 'interval:a,b' or a formula in x."""
    kind, _, rest = text.partition(":")
    if kind == "indicator" and rest:
        return Indicator(_number(rest))
    if kind == "interval" and rest:
        a, b = _numbers(rest)
        return IntervalIndicator(a, b)
    return parse_expression(text)


# ---- output -------------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt(t) for t in v)
    return str(v)


def write_csv(rows, header, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(h)) for h in header])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_json(payload, out):
    body = {"schema_version": SCHEMA_VERSION, **_jsonable(payload)}
    json.dump(body, out, indent=2, sort_keys=True)
    out.write("\n")


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---- commands --------------------------------------------------------------------------


def _pair_from(args):
    d = density_from_spec(spec_from_args(args))
    return pair(d, _operator(args, d))


def _grid_for(args, d):
    if args.grid:
        return parse_grid(args.grid)
    return d.probe_grid(101, 0.01, 0.99)


def cmd_kernel(args):
    sp = _pair_from(args)
    xs = _grid_for(args, sp.density)
    tau = np.asarray(sp.kernel(xs), float)
    score = np.asarray(sp.score_values(xs), float)
    rows = [{"x": x, "tau": t, "score": u} for x, t, u in zip(xs, tau, score)]
    buf = io.StringIO()
    write_csv(rows, ["x", "tau", "score"], buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_score(args):
    sp = _pair_from(args)
    xs = _grid_for(args, sp.density)
    rows = [{"x": x, "score": u} for x, u in zip(xs, np.asarray(sp.score_values(xs), float))]
    buf = io.StringIO()
    write_csv(rows, ["x", "score"], buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_solve(args):
    sp = _pair_from(args)
    h = parse_test_function(args.h)
    fixed_f = parse_expression(args.fixed_f) if args.fixed_f else 1.0
    sol = solve(sp, h, fixed_f=fixed_f)
    xs = _grid_for(args, sp.density)
    rows = [{"x": x, "f": f, "g": g, "residual": r} for x, f, g, r in
            zip(xs, np.broadcast_to(np.asarray(sol.f(xs), float), xs.shape),
                np.asarray(sol.g(xs), float), np.asarray(sol.residual(xs), float))]
    buf = io.StringIO()
    write_csv(rows, ["x", "f", "g", "residual"], buf)
    _emit(buf.getvalue(), args.out)
    return 0


_METRIC_CLASS = {"tv": "tv", "kolmogorov": "kolmogorov", "wasserstein": "lipschitz"}


def cmd_compare(args):
    d1 = density_from_spec(parse_density_arg(args.a))
    d2 = density_from_spec(parse_density_arg(args.b))
    if d1.is_lattice != d2.is_lattice:
        raise IncompatibleError("compare needs two continuous or two lattice densities")
    sp1, sp2 = pair(d1), pair(d2)
    cls = _METRIC_CLASS[args.metric]
    if args.method == "score":
        f = parse_expression(args.f) if args.f else 1.0
        rep = score_bound(sp1, sp2, f, cls=cls)
    else:
        omega = parse_expression(args.omega) if args.omega else None
        rep = kernel_bound(sp1, sp2, omega, cls=cls)
    buf = io.StringIO()
    dump_json({"method": args.method, **rep.to_dict()}, buf)
    _emit(buf.getvalue(), args.out)
    rep.require_sound()
    return 0


_CASE_KEYS = {
    "frechet": ("n", "alpha"),
    "exp-max-uniform": ("n", "t"),
    "gumbel": ("n",),
    "gauss-gauss": ("sigma1", "sigma2"),
    "student-gauss": ("nu",),
    "rademacher": ("n",),
}


def _run_point(name, kwargs):
    res = STUDIES[name](**kwargs)
    return {"rows": list(res.rows()), "result": res.to_dict(), "sound": res.sound}


def case_points(args):
    name = args.study
    if name == "poisson-binomial":
        if not args.p:
            raise UsageError("poisson-binomial needs --p")
        return [{"p": _numbers(args.p)}]
    keys = _CASE_KEYS[name]
    sweep = {}
    for k in keys:
        raw = getattr(args, k.replace("-", "_"), None)
        if raw is not None:
            sweep[k] = _numbers(raw)
    RunConfig("case", sweep=sweep)
    points = [dict(zip(sweep, combo)) for combo in itertools.product(*sweep.values())]
    if name == "exp-max-uniform" and args.eps is not None:
        eps = _numbers(args.eps)
        if not eps:
            raise UsageError("sweep over 'eps' is empty")
        for p in points:
            p["eps"] = eps
    missing = [k for k in keys if k not in sweep and name not in ("exp-max-uniform",)]
    if missing:
        raise UsageError(f"study {name!r} needs --{' --'.join(missing)}")
    return points


def cmd_case(args):
    points = case_points(args)
    jobs = max(1, int(args.jobs or 1))
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_point, [args.study] * len(points), points))
    else:
        outs = [_run_point(args.study, p) for p in points]
    rows = [r for o in outs for r in o["rows"]]
    header = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    buf = io.StringIO()
    write_csv(rows, header, buf)
    _emit(buf.getvalue(), args.out)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            dump_json({"study": args.study, "points": [o["result"] for o in outs]}, fh)
    if not all(o["sound"] for o in outs):
        raise SoundnessError("an oracle distance exceeds its bound")
    return 0


def cmd_verify(args):
    tol = args.tol if args.tol is not None else default_tol()
    RunConfig("verify", tol=tol)
    results = run_suite(args.suite, tol)
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if failed == 0 else 1


# ---- argument parser ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_density(p):
    p.add_argument("--dist", help="family, family:k=v,..., a JSON object, @file.json, "
                                  "'table' or 'expr'")
    p.add_argument("--param", action="append", help="k=v parameter, repeatable")
    p.add_argument("--spec-file", help="JSON density spec")
    p.add_argument("--pmf", help="comma separated probabilities for a table density")
    p.add_argument("--origin", type=float, default=0.0)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--formula", help="unnormalized density formula in x")
    p.add_argument("--support", help="lo,hi for an expression density")
    p.add_argument("--operator", choices=["derivative", "forward", "backward", "span"])
    p.add_argument("--scaled", action="store_true", help="divide differences by the step")
    p.add_argument("--grid", help="lo:hi:step evaluation grid")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser():
    parser = _Parser(prog="steinkit", description="Stein operators, kernels and bounds")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("kernel", help="tabulate the Stein kernel and score")
    _add_density(p)
    p = sub.add_parser("score", help="tabulate the score function")
    _add_density(p)
    p = sub.add_parser("solve", help="solve the Stein equation for a test function")
    _add_density(p)
    p.add_argument("--h", required=True, help="indicator:z, interval:a,b or a formula")
    p.add_argument("--fixed-f", help="formula for the fixed f (default 1)")
    p = sub.add_parser("compare", help="score or kernel comparison bound with oracle")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--method", choices=["score", "kernel"], default="kernel")
    p.add_argument("--metric", choices=["tv", "kolmogorov", "wasserstein"], default="tv")
    p.add_argument("--f", help="formula for f in the score comparison (default 1)")
    p.add_argument("--omega", help="formula for omega in the kernel comparison")
    p.add_argument("--out")
    p = sub.add_parser("case", help="run a case study sweep")
    p.add_argument("study", choices=sorted(STUDIES))
    for k in ("n", "alpha", "t", "eps", "sigma1", "sigma2", "nu", "p"):
        p.add_argument(f"--{k}", help="comma separated values")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", help="write the full StudyResult JSON here")
    p.add_argument("--out")
    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all",
                   choices=["operators", "kernels", "solutions", "bounds", "oracles", "all"])
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    return parser


COMMANDS = {"kernel": cmd_kernel, "score": cmd_score, "solve": cmd_solve,
            "compare": cmd_compare, "case": cmd_case, "verify": cmd_verify}


def _glue_negative_values(argv):
    """Let '--grid -5:5:0.1' through argparse, which reads '-5...' as an option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--grid", "--support"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and \
                    (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
        return COMMANDS[args.command](args)
    except SoundnessError as exc:
        print(f"soundness violation: {exc}", file=sys.stderr)
        return EXIT_SOUNDNESS
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (IncompatibleError, ClassMembershipError, CenteringError) as exc:
        print(f"incompatible input: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except (UsageError, ExpressionSyntaxError, ExpressionDomainError, NormalizationError,
            json.JSONDecodeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
