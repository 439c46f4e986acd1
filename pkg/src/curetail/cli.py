"""Command-line entry point: ``curetail {simulate,estimate,asymptotics,curve}``.

All output is CSV with floats written to 12 significant digits. Exit codes:
0 success, 1 I/O failure, 2 usage or schema error, 3 degenerate hypothesis.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from contextlib import contextmanager

import numpy as np

from .asymptotics import ModelIngredients, delta_cov, sigma2_gamma, sigma2_p
from .errors import CureTailError, DataError, DegenerateDenominator, NoMass
from .kernel_beran import KernelSpec, beran_cdf, select_bandwidth
from .models import FAMILIES, CureModel, tau_grid
from .simulation import EstimatorConfig, Scenario, generate, run_study
from .survdata import load_csv, max_followup
from .tail import DEFAULT_GRID, TuningPair, estimate_tail, f_hat, limit_targets

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3

SIMULATE_COLUMNS = (
    "family", "x", "s", "tau_c", "mean_p_hat", "median_p_hat", "mse_p_hat",
    "mean_p_beran", "mse_p_beran", "mean_gamma_hat", "median_gamma_hat",
    "p_true", "gamma_true", "failures",
)
ESTIMATE_COLUMNS = (
    "x", "h", "y1", "y2", "tau_n", "gamma_hat", "p_beran", "p_hat", "p_hat_clipped",
    "cure_beran", "cure_hat", "status",
)


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return format(v, ".12g")


def float_list(text: str) -> list[float]:
    try:
        out = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not out or not all(math.isfinite(v) for v in out):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return out


def t_grid(text: str) -> np.ndarray:
    try:
        lo, step, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:step:hi, got {text!r}")
    if not step > 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(k + 1)


def family_list(text: str) -> list[str]:
    fams = [f.strip().lower() for f in text.split(",") if f.strip()]
    bad = [f for f in fams if f not in FAMILIES]
    if bad or not fams:
        raise argparse.ArgumentTypeError(
            f"family must be one of {', '.join(FAMILIES)}, got {text!r}"
        )
    return fams


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _tuning(args):
    if (args.y1 is None) != (args.y2 is None):
        raise UsageError("--y1 and --y2 must be given together")
    if args.y1 is None:
        return None
    try:
        return TuningPair(args.y1, args.y2)
    except ValueError as exc:
        raise UsageError(str(exc))


def _check_bandwidth(args):
    if args.bandwidth is not None and not args.bandwidth > 0:
        raise UsageError("--bandwidth must be positive")


def _scenario(args, family, s, x_eval, n=None, reps=1):
    try:
        return Scenario(
            family=family, s=s, n=n or args.n, seed=args.seed, reps=reps,
            x_eval=tuple(x_eval), epsilon=args.epsilon, x_ref=args.x_ref,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_simulate(args) -> int:
    tuning = _tuning(args)
    _check_bandwidth(args)
    if args.reps < 1 or args.workers < 1:
        raise UsageError("--reps and --workers must be positive")
    families = args.family or ["frechet"]
    s_values = args.s if args.s is not None else [0.0, 0.25, 0.5, 0.75, 1.0]
    x_values = args.x if args.x is not None else [0.3, 0.5, 0.7]
    scenarios = [
        _scenario(args, fam, s, x_values, reps=args.reps) for fam in families for s in s_values
    ]
    config = EstimatorConfig(bandwidth=args.bandwidth, tuning=tuning)
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(SIMULATE_COLUMNS)
        for sc in scenarios:
            for row in run_study(sc, config, workers=args.workers):
                w.writerow([
                    sc.family, fmt(row.x), fmt(row.s), fmt(row.tau_c), fmt(row.mean_p_hat),
                    fmt(row.median_p_hat), fmt(row.mse_p_hat), fmt(row.mean_p_beran),
                    fmt(row.mse_p_beran), fmt(row.mean_gamma_hat), fmt(row.median_gamma_hat),
                    fmt(row.p_true), fmt(row.gamma_true), fmt(row.failures),
                ])
    return EXIT_OK


def default_x_grid(covariates, points=19):
    """Equispaced grid over the central 90% of the covariate range."""
    lo, hi = float(np.min(covariates)), float(np.max(covariates))
    pad = 0.05 * (hi - lo)
    return np.linspace(lo + pad, hi - pad, points)


def cmd_estimate(args) -> int:
    if args.input is None:
        raise UsageError("estimate needs --input")
    tuning = _tuning(args)
    _check_bandwidth(args)
    sample = load_csv(args.input)
    tau_n = max_followup(sample)
    h = args.bandwidth if args.bandwidth is not None else select_bandwidth(sample)
    kernel = KernelSpec(h)
    xs = args.x if args.x is not None else default_x_grid(sample.covariates)
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(ESTIMATE_COLUMNS)
        for x in xs:
            try:
                curve = beran_cdf(sample, x, kernel)
                est = estimate_tail(curve, tau_n, tuning)
            except NoMass:
                w.writerow([fmt(x), fmt(h)] + [""] * 9 + ["no-mass"])
                continue
            w.writerow([
                fmt(x), fmt(h), fmt(est.tuning.y1), fmt(est.tuning.y2), fmt(tau_n),
                fmt(est.gamma), fmt(est.beran_at_tau), fmt(est.p_hat), fmt(est.p_hat_clipped),
                fmt(1.0 - est.beran_at_tau), fmt(1.0 - est.p_hat),
                "ok" if est.gamma_raw is not None else "gamma-floored",
            ])
    return EXIT_OK


def _single(values, name, default):
    if values is None:
        return default
    if len(values) != 1:
        raise UsageError(f"{name} takes a single value for this subcommand")
    return values[0]


def cmd_asymptotics(args) -> int:
    if not args.family or len(args.family) != 1:
        raise UsageError("asymptotics needs a single --family")
    family = args.family[0]
    x = _single(args.x, "--x", 0.5)
    s = _single(args.s, "--s", 0.5)
    y1 = 0.5 if args.y1 is None else args.y1
    y2 = 0.5 if args.y2 is None else args.y2
    try:
        tuning = TuningPair(y1, y2)
    except ValueError as exc:
        raise UsageError(str(exc))
    if not 0.0 <= s <= 1.0 or not 0.0 < args.epsilon <= 1.0:
        raise UsageError("--s must lie in [0, 1] and --epsilon in (0, 1]")
    tau_c = tau_grid(family, args.x_ref, s)
    model = CureModel(family, tau_c, args.epsilon)
    ing = ModelIngredients.from_model(model, x)
    ts = args.t_grid if args.t_grid is not None else tau_c * np.array([0.5, 1.0, 1.5, 2.0, 3.0])
    lim = limit_targets(model, x, tau_c, tuning)
    rows = [
        ("tau_c", None, tau_c),
        ("gamma_limit", None, lim.gamma_limit),
        ("p_limit", None, lim.p_limit),
        ("sigma2_gamma", None, sigma2_gamma(ing, y2, tau_c)),
        ("sigma2_p", None, sigma2_p(ing, y1, y2, tau_c)),
    ]
    rows += [("delta", t, delta_cov(ing, y1, y2, tau_c, t, t)) for t in ts]
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(("quantity", "t", "value"))
        for name, t, v in rows:
            w.writerow((name, fmt(t), fmt(v)))
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.input is None and not args.family:
        raise UsageError("curve needs --input or --family")
    if args.family and len(args.family) != 1:
        raise UsageError("curve takes a single --family")
    tuning = _tuning(args)
    _check_bandwidth(args)
    x = _single(args.x, "--x", 0.5)
    model = None
    if args.family:
        sc = _scenario(args, args.family[0], _single(args.s, "--s", 0.5), (x,))
        model = sc.model
    sample = load_csv(args.input) if args.input is not None else generate(sc, 0)
    tau_n = max_followup(sample)
    h = args.bandwidth if args.bandwidth is not None else select_bandwidth(sample)
    curve = beran_cdf(sample, x, KernelSpec(h))
    est = estimate_tail(curve, tau_n, tuning)
    ts = args.t_grid if args.t_grid is not None else np.linspace(0.0, 3.0 * tau_n, 301)
    cols = ["t", "F_beran", "F_hat"]
    data = [ts, curve(ts), f_hat(curve, tau_n, est, ts)]
    if model is not None:
        lim = limit_targets(model, x, model.tau_c, est.tuning)
        cols += ["F_true", "F_limit"]
        data += [model.cdf(ts, x), lim.distribution(ts)]
    with _output(args.out) as fh:
        w = _writer(fh)
        w.writerow(cols)
        for row in zip(*data):
            w.writerow([fmt(v) for v in row])
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "asymptotics": cmd_asymptotics,
    "curve": cmd_curve,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", type=family_list, help="gev, gpd or frechet (comma list for simulate)")
    common.add_argument("--n", type=int, default=2000, help="sample size (default: %(default)s)")
    common.add_argument("--reps", type=int, default=100, help="replications (default: %(default)s)")
    common.add_argument("--s", type=float_list, help="censoring-endpoint positions in [0, 1]")
    common.add_argument("--x", type=float_list, help="covariate evaluation points")
    common.add_argument("--epsilon", type=float, default=0.1,
                        help="censoring atom at tau_c (default: %(default)s)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bandwidth", type=float, help="default: normal-reference rule")
    common.add_argument("--y1", type=float)
    common.add_argument("--y2", type=float, help="default: data-driven over 0.25:0.02:0.89")
    common.add_argument("--x-ref", type=float, default=0.5, dest="x_ref",
                        help="covariate at which quantiles define tau_c (default: %(default)s)")
    common.add_argument("--input", help="CSV with columns time,status,covariate")
    common.add_argument("--out", help="output CSV (default: stdout)")
    common.add_argument("--t-grid", type=t_grid, dest="t_grid", help='"lo:step:hi"')
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(
        prog="curetail",
        description="Cure-rate extrapolation under insufficient follow-up.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "Monte Carlo study over families, x and s",
        "estimate": "estimate cure rates on a CSV dataset",
        "asymptotics": "analytic asymptotic variances for a model",
        "curve": "Beran and extrapolated distribution function on a t-grid",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except DegenerateDenominator as exc:
        print(f"curetail: degenerate input, hypothesis {exc.hypothesis} fails: {exc}",
              file=sys.stderr)
        return EXIT_DEGENERATE
    except DataError as exc:
        print(f"curetail: invalid data: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"curetail: {exc}", file=sys.stderr)
        return EXIT_IO
    except CureTailError as exc:
        print(f"curetail: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
