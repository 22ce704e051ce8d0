"""Command-line front end.

    hgm1f1 cdf      --m 5 --n 7 --beta 1,2,3,4,5 --x 20 --x0 0.01 --step 1e-4
    hgm1f1 quantile --m 2 --n 3 --beta 1,2 --p 0.5,0.9,0.95,0.99
    hgm1f1 table    --m 5 --n 7 --beta 1,2,3,4,5 --xmax 20 --points 200
    hgm1f1 compare  --m 2 --n 3 --beta 1,2 --xmax 5 --K 150
    hgm1f1 selftest
    hgm1f1 dump-tables   --m 3 --K 4 [--n 5]
    hgm1f1 dump-pfaffian --m 2 --n 3 --y 0.5,1.5 --i 1

Output columns
    cdf       x  prob  lower  upper  seconds
    quantile  p  x  seconds
    table     x  prob
    compare   x  hgm  series  absdiff
    selftest  check  status  detail

Lines starting with '#' carry the configuration.  Exit status: 0 ok,
1 invalid input, 2 numerical failure, 3 self-test failure.
"""
import argparse
import csv
import json
import logging
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np

from . import __version__, _accel, pfaffian, series, wishart
from .errors import HgmError, PoleError, SingularPointError
from .wishart import HgmConfig, WishartProblem

log = logging.getLogger("hgm1f1")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_SELFTEST = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _floats(text):
    try:
        vals = [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _pos_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _pos_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


# flag name -> type, shared by the parser and the --config reader
FLAG_TYPES = {
    "m": _pos_int, "n": _pos_float, "beta": _floats, "sigma": _floats,
    "x": _floats, "x0": _pos_float, "step": _pos_float, "K": _pos_int,
    "p": _floats, "xmin": _pos_float, "xmax": _pos_float, "points": _pos_int,
    "method": str, "rel_tol": _pos_float, "tie_policy": str, "format": str,
    "jobs": _pos_int, "y": _floats, "i": _pos_int, "no_bounds": bool,
}


def read_config(path):
    """Parse a key=value file; keys are flag names with '-' or '_'."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in FLAG_TYPES:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            conv = FLAG_TYPES[key]
            try:
                if conv is bool:
                    out[key] = val.lower() in ("1", "true", "yes", "on")
                else:
                    out[key] = conv(val)
            except argparse.ArgumentTypeError as e:
                raise UsageError(f"{path}:{lineno}: {e}")
    return out


def _common(p):
    g = p.add_argument_group("problem")
    g.add_argument("--m", type=_pos_int, help="dimension")
    g.add_argument("--n", type=_pos_float, help="degrees of freedom")
    g.add_argument("--beta", type=_floats, help="b1,b2,...: diagonal of Sigma^-1 / 2")
    g.add_argument("--sigma", type=_floats, help="s1,s2,...: diagonal variances of Sigma (alternative to --beta)")
    h = p.add_argument_group("numerics")
    h.add_argument("--x0", type=_pos_float, help="start of the integration (default max(0.01, 0.002 m^2), at most 1 / max beta)")
    h.add_argument("--step", type=_pos_float, help="fixed step size (default: adaptive)")
    h.add_argument("--K", type=_pos_int, help="series truncation degree (default: automatic)")
    h.add_argument("--method", choices=("euler", "rk4", "rk4_adaptive"))
    h.add_argument("--rel-tol", dest="rel_tol", type=_pos_float, help="adaptive tolerance (default 1e-9)")
    h.add_argument("--tie-policy", dest="tie_policy", choices=wishart.TIE_POLICIES)
    o = p.add_argument_group("output")
    o.add_argument("--format", choices=wishart.OUTPUT_FORMATS)
    o.add_argument("--config", help="key=value file with defaults for any flag")
    o.add_argument("--jobs", type=_pos_int, help="worker processes for independent items")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="hgm1f1", description=__doc__.split("\n\n")[0],
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="\n\n".join(__doc__.split("\n\n")[1:]))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("cdf", help="Pr[l1 < x] with bounds")
    _common(p)
    p.add_argument("--x", type=_floats, help="x or x1,x2,...")
    p.add_argument("--no-bounds", dest="no_bounds", action="store_true", default=None)

    p = sub.add_parser("quantile", help="percentage points")
    _common(p)
    p.add_argument("--p", type=_floats, help="p1,p2,... in (0, 1)")

    p = sub.add_parser("table", help="CDF on a grid in one integration pass")
    _common(p)
    p.add_argument("--xmin", type=_pos_float)
    p.add_argument("--xmax", type=_pos_float)
    p.add_argument("--points", type=_pos_int)

    p = sub.add_parser("compare", help="HGM against the truncated series on a grid")
    _common(p)
    p.add_argument("--xmin", type=_pos_float)
    p.add_argument("--xmax", type=_pos_float)
    p.add_argument("--points", type=_pos_int)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--format", choices=wishart.OUTPUT_FORMATS)
    p.add_argument("--config")
    p.add_argument("--jobs", type=_pos_int)

    p = sub.add_parser("dump-tables", help="exact zonal and q coefficient tables")
    p.add_argument("--m", type=_pos_int)
    p.add_argument("--K", type=_pos_int)
    p.add_argument("--n", type=_pos_float, help="also dump q for a=(m+1)/2, c=(n+m+1)/2")
    p.add_argument("--config")

    p = sub.add_parser("dump-pfaffian", help="dense matrix P_i(y)")
    p.add_argument("--m", type=_pos_int)
    p.add_argument("--n", type=_pos_float)
    p.add_argument("--y", type=_floats)
    p.add_argument("--i", type=_pos_int, help="coordinate index, 1-based")
    p.add_argument("--config")
    return ap


def _merge_config(args):
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        values = read_config(path)
    except OSError as e:
        raise UsageError(f"cannot read config: {e}")
    for k, v in values.items():
        if hasattr(args, k) and getattr(args, k) is None:
            setattr(args, k, v)
    return args


def _require(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"missing required flag(s): {' '.join(missing)}")


def _problem(args):
    _require(args, "m", "n")
    if (args.beta is None) == (args.sigma is None):
        raise UsageError("give exactly one of --beta and --sigma")
    if args.beta is not None:
        prob = WishartProblem(args.m, args.n, tuple(args.beta))
    else:
        if len(args.sigma) != args.m:
            raise UsageError(f"--sigma needs {args.m} entries")
        prob = WishartProblem.from_sigma(args.sigma, args.n)
    return prob


def _config(args):
    return HgmConfig(K=args.K, x0=args.x0, step=args.step, method=args.method,
                     rel_tol=args.rel_tol or 1e-9, tie_policy=args.tie_policy or "perturb",
                     output_format=args.format or "tsv")


class Writer:
    """Records in TSV, CSV or JSON lines, after '#' lines describing the run."""

    def __init__(self, fmt, columns, meta, stream=None):
        self.fmt = fmt or "tsv"
        self.columns = columns
        self.out = stream or sys.stdout
        if self.fmt == "json-lines":
            self.out.write(json.dumps({"config": meta}) + "\n")
            return
        for k, v in meta.items():
            self.out.write(f"# {k}={v}\n")
        self._csv = csv.writer(self.out, delimiter="\t" if self.fmt == "tsv" else ",",
                               lineterminator="\n")
        self._csv.writerow(columns)

    def row(self, *values):
        if self.fmt == "json-lines":
            self.out.write(json.dumps(dict(zip(self.columns, values))) + "\n")
        else:
            self._csv.writerow([_fmt(v) for v in values])

    def comment(self, text):
        if self.fmt != "json-lines":
            self.out.write(f"# {text}\n")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _meta(cmd, prob=None, cfg=None, **extra):
    meta = {"command": cmd, "version": __version__, "backend": _accel.backend()}
    if prob is not None:
        meta.update(m=prob.m, n=prob.n, beta=",".join(repr(b) for b in prob.beta))
    if cfg is not None:
        d = asdict(cfg)
        d.pop("output_format")
        d["x0"] = cfg.start(prob.m, max(prob.beta)) if prob is not None else cfg.x0
        meta.update({k: ("auto" if v is None else v) for k, v in d.items()})
    meta.update(extra)
    return meta


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def _timed_cdf(job):
    x, prob, cfg, with_bounds = job
    t = time.perf_counter()
    p = wishart.cdf_largest_root(x, prob, cfg)
    lo, hi = wishart.bounds(x, prob, cfg) if with_bounds else (float("nan"), float("nan"))
    return x, p, lo, hi, time.perf_counter() - t


def cmd_cdf(args, out=None):
    _require(args, "x")
    prob, cfg = _problem(args), _config(args)
    w = Writer(cfg.output_format, ["x", "prob", "lower", "upper", "seconds"], _meta("cdf", prob, cfg), out)
    jobs = [(x, prob, cfg, not args.no_bounds) for x in args.x]
    for rec in _map(_timed_cdf, jobs, args.jobs):
        w.row(*rec)
    return EXIT_OK


def _timed_quantile(job):
    p, prob, cfg = job
    t = time.perf_counter()
    x = wishart.quantile(p, prob, cfg)
    return p, x, time.perf_counter() - t


def cmd_quantile(args, out=None):
    _require(args, "p")
    prob, cfg = _problem(args), _config(args)
    for p in args.p:
        if not 0 < p < 1:
            raise UsageError(f"--p values must lie in (0, 1), got {p}")
    w = Writer(cfg.output_format, ["p", "x", "seconds"], _meta("quantile", prob, cfg), out)
    for rec in _map(_timed_quantile, [(p, prob, cfg) for p in args.p], args.jobs):
        w.row(*rec)
    return EXIT_OK


def _grid(args, default_points, default_min=None):
    _require(args, "xmax")
    points = args.points or default_points
    xmin = args.xmin if args.xmin is not None else (default_min or args.xmax / points)
    if xmin > args.xmax:
        raise UsageError("--xmin must not exceed --xmax")
    return list(np.linspace(xmin, args.xmax, points))


def cmd_table(args, out=None):
    prob, cfg = _problem(args), _config(args)
    xs = _grid(args, 50)
    w = Writer(cfg.output_format, ["x", "prob"], _meta("table", prob, cfg), out)
    probs = wishart.cdf_curve(xs, prob, cfg)
    for x, p in zip(xs, probs):
        w.row(float(x), p)
    return EXIT_OK


def cmd_compare(args, out=None):
    prob = _problem(args)
    K_series = args.K or 150
    args.K = None
    cfg = _config(args)
    xs = _grid(args, 20, 0.5)
    w = Writer(cfg.output_format, ["x", "hgm", "series", "absdiff"],
               _meta("compare", prob, cfg, series_K=K_series), out)
    hgm = wishart.cdf_curve(xs, prob, cfg, clamp=False)
    worst = 0.0
    lc = wishart.log_constant(prob)
    for x, h in zip(xs, hgm):
        y = prob.beta_array * x
        f = series.hyp1f1_series(prob.params, y, series.TruncationConfig(K_series, prob.m))
        s = math.exp(lc - x * sum(prob.beta) + prob.m * prob.n / 2 * math.log(x)) * f
        worst = max(worst, abs(h - s))
        w.row(float(x), h, s, abs(h - s))
    w.comment(f"max_absdiff={worst!r}")
    return EXIT_OK


def selftest_checks():
    """Quick invariant checks: list of (name, ok, detail)."""
    from fractions import Fraction
    from .partitions import partitions_of

    res = []
    prm = pfaffian.wishart_params(2, 3)
    r = wishart.kummer_check(prm, [0.1, 0.25, 0.4], K=30)
    res.append(("kummer", r < 1e-10, f"residual={r:.3g}"))

    worst = 0.0
    for k in range(1, 7):
        parts, rows = series.zonal_to_monomial_coeffs(k, k)
        y = np.array([0.3, 0.7, 1.1, 0.2, 0.5, 0.9][:k])
        tot = sum(series.zonal_eval(kap, y) for kap in parts)
        worst = max(worst, abs(tot - y.sum() ** k) / y.sum() ** k)
    res.append(("zonal_normalization", worst < 1e-12, f"rel_err={worst:.3g}"))

    parts, rows = series.zonal_to_monomial_coeffs(2, 2)
    golden = [[Fraction(1), Fraction(2, 3)], [Fraction(0), Fraction(4, 3)]]
    res.append(("zonal_golden_k2", [list(r) for r in rows] == golden and parts == list(partitions_of(2, 2)), ""))

    y = np.array([0.3, 0.8])
    F = series.squarefree_derivatives_at(prm, y, series.TruncationConfig(40, 2))
    h = 1e-5
    err = 0.0
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        Fp = series.squarefree_derivatives_at(prm, y + e, series.TruncationConfig(40, 2))
        Fm = series.squarefree_derivatives_at(prm, y - e, series.TruncationConfig(40, 2))
        fd = (Fp - Fm) / (2 * h)
        err = max(err, float(np.max(np.abs(fd - pfaffian.apply_pfaffian(i, y, F, prm)))))
    res.append(("pfaffian_fd", err < 1e-6, f"max_err={err:.3g}"))

    prob = WishartProblem(2, 3, (1.0, 2.0))
    p = wishart.cdf_largest_root(4.316, prob)
    res.append(("cdf_m2_95pct", abs(p - 0.95) < 1e-5, f"prob={p:.8f}"))
    xs = np.linspace(0.5, 12, 24)
    ps = wishart.cdf_curve(xs, prob)
    mono = all(b >= a - 1e-12 for a, b in zip(ps[:-1], ps[1:]))
    res.append(("cdf_monotone", mono and 1 - 1e-3 <= ps[-1] <= 1 + 1e-4, f"terminal={ps[-1]:.8f}"))
    lo, hi = wishart.bounds(4.316, prob)
    res.append(("bounds_sandwich", lo <= p <= hi, f"lower={lo:.6f} upper={hi:.6f}"))
    return res


def cmd_selftest(args, out=None):
    w = Writer(args.format, ["check", "status", "detail"], _meta("selftest"), out)
    failed = 0
    for name, ok, detail in selftest_checks():
        failed += not ok
        w.row(name, "pass" if ok else "FAIL", detail)
    return EXIT_SELFTEST if failed else EXIT_OK


def cmd_dump_tables(args, out=None):
    _require(args, "m", "K")
    params = None
    if args.n is not None:
        from fractions import Fraction
        params = series.HypParams(Fraction(args.m + 1, 2), Fraction(args.n + args.m + 1) / 2)
    series.dump_tables(args.K, args.m, params, out or sys.stdout)
    return EXIT_OK


def cmd_dump_pfaffian(args, out=None):
    _require(args, "m", "n", "y", "i")
    if len(args.y) != args.m:
        raise UsageError(f"--y needs {args.m} entries")
    if args.i > args.m:
        raise UsageError(f"--i must be between 1 and {args.m}")
    pfaffian.dump_matrix(args.i - 1, args.y, pfaffian.wishart_params(args.m, args.n), out or sys.stdout)
    return EXIT_OK


COMMANDS = {
    "cdf": cmd_cdf, "quantile": cmd_quantile, "table": cmd_table, "compare": cmd_compare,
    "selftest": cmd_selftest, "dump-tables": cmd_dump_tables, "dump-pfaffian": cmd_dump_pfaffian,
}


def setup_logging():
    level = os.environ.get("HGM_LOG", "warning").strip().upper()
    if level.isdigit():
        lvl = int(level)
    else:
        lvl = getattr(logging, level, None)
        if not isinstance(lvl, int):
            lvl = logging.WARNING
    logging.basicConfig(level=lvl, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)


def main(argv=None, out=None):
    setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    try:
        args = _merge_config(args)
        return COMMANDS[args.cmd](args, out)
    except (PoleError, SingularPointError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (HgmError, ArithmeticError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
