"""Command-line interface.

Every command reads an optional TOML config (``--config``) and applies flag
overrides on top (flags win). All file outputs are atomic. Exit codes: 0 on
success/pass, 1 when a statistical validation fails, 2 on configuration
errors. Commands that consume randomness require an explicit seed; nothing
is ever auto-seeded.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .analytic import (AnalyticError, check_block_conditions,
                       default_block_schedule, limit_report)
from .analytic import ell as ell_fn
from .calibrate import (CalibrationError, default_fit_spec, fit,
                        linear_baseline_rmse, predicted_curve,
                        ranking_data_from_csv)
from .config import ConfigError, RunConfig, emit_config, load_config, override
from .match_model import Kernel, WinFunctionError, F_s
from .measures import MeasureError, UniformInterval, inverse_cdf, sample
from .processes import (MarkovTilting, ProcessError, alpha, alpha_tail_bound,
                        marginal_measure)
from .quadrature import QuadratureError
from .reports import atomic_write_csv, atomic_write_text, summary_block
from .scheduling import (SchedulingError, calendar_to_csv,
                         canonical_focal_calendar, circle_calendar)
from .simulate import (QuenchedEnvironment, SimulationError, draw_environment,
                       ranking_curve, run_replicas, wins_focal_array)
from .stats import (StatsError, clt_check_gsum, clt_check_wins,
                    product_shift_deviation)
from .streams import substream

CONFIG_ERRORS = (ConfigError, MeasureError, ProcessError, WinFunctionError,
                 SchedulingError, SimulationError, CalibrationError,
                 StatsError, OSError)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--seed", type=int, help="master seed (required for "
                   "anything random; never auto-generated)")
    p.add_argument("--two-n", dest="two_n", type=int, help="league size")
    p.add_argument("--s", type=float, help="focal strength")
    p.add_argument("--replicas", type=int)
    p.add_argument("--mode", choices=("focal", "full"))
    p.add_argument("--tol", type=float, help="numeric tolerance")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--threads", type=int, help="worker thread cap")
    p.add_argument("--echo-config", help="write the effective config here")


def _load(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    keys = ("seed", "two_n", "s", "replicas", "mode", "tol", "out", "threads",
            "s_min", "s_max", "s_step")
    return override(cfg, **{k: getattr(args, k, None) for k in keys})


def _echo(cfg: RunConfig, args: argparse.Namespace) -> None:
    if getattr(args, "echo_config", None):
        atomic_write_text(args.echo_config, emit_config(cfg))


def _report_rows(report) -> tuple[list[str], list]:
    d = asdict(report)
    return list(d), [d[k] for k in d]


def _emit_report(report, out: str | None, title: str) -> None:
    header, row = _report_rows(report)
    if out:
        atomic_write_csv(out, header, [row])
    print(summary_block(title, list(zip(header, row))))


def cmd_simulate(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    w = cfg.build_win()
    proc = cfg.build_process()
    two_n = cfg.require("two_n")
    seed = cfg.require("seed")
    if args.env:
        focal, strengths = _read_env_csv(args.env, two_n)
        s = cfg.s if cfg.s is not None else focal
        env = QuenchedEnvironment(two_n, s, strengths, cfg.build_mu(), seed)
    else:
        env = draw_environment(cfg.build_mu(), two_n, cfg.require("s"), seed)
    if args.save_env:
        rows = [(0, env.focal_strength)] + [
            (i + 1, float(v)) for i, v in enumerate(env.strengths)]
        atomic_write_csv(args.save_env, ("team_index", "strength"), rows)
    if args.export_calendar:
        cal = (canonical_focal_calendar(two_n) if cfg.mode == "focal"
               else circle_calendar(two_n))
        calendar_to_csv(cal, args.export_calendar)
    results = run_replicas(env, proc, w, cfg.require("replicas"),
                           mode=cfg.mode, threads=cfg.threads)
    if cfg.out:
        if cfg.mode == "focal":
            atomic_write_csv(cfg.out, ("replica", "wins"),
                             [(r, res.wins_focal)
                              for r, res in enumerate(results)])
        else:
            atomic_write_csv(cfg.out, ("replica", "team", "wins"),
                             [(r, t, int(v))
                              for r, res in enumerate(results)
                              for t, v in enumerate(res.wins_all)])
    wins = wins_focal_array(results)
    print(summary_block("simulate", [
        ("mode", cfg.mode), ("two_n", two_n), ("replicas", len(results)),
        ("mean focal wins", float(wins.mean())),
        ("mean focal win fraction", float(wins.mean()) / two_n)]))
    return 0


def _read_env_csv(path: str, two_n: int) -> tuple[float, np.ndarray]:
    """Returns (focal strength, opponent strengths) from an env export."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["team_index", "strength"]:
            raise ConfigError(
                f"expected header team_index,strength in {path}")
        rows = {int(r["team_index"]): float(r["strength"]) for r in reader}
    if sorted(rows) != list(range(two_n)):
        raise ConfigError(
            f"{path} must list team_index 0..{two_n - 1} exactly")
    return rows[0], np.array([rows[i] for i in range(1, two_n)])


def _s_grid(cfg: RunConfig) -> list[float]:
    if cfg.s_min is None:
        return [cfg.require("s")]
    lo, hi = cfg.s_min, cfg.require("s_max")
    step = cfg.require("s_step")
    if step <= 0 or hi < lo:
        raise ConfigError("need s_min <= s_max and s_step > 0")
    count = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(count) if lo + i * step <= hi + 1e-12]


def cmd_analytic_curve(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    w, proc, mu = cfg.build_win(), cfg.build_process(), cfg.build_mu()
    rows = []
    for s in _s_grid(cfg):
        rep = limit_report(w, proc, mu, s, cfg.tol)
        rows.append((rep.s, rep.ell, rep.sigma2, rep.rho2, rep.total_var,
                     rep.rho2_truncation_bound))
    header = ("s", "ell", "sigma2", "rho2", "total_var", "trunc_bound")
    if cfg.out:
        atomic_write_csv(cfg.out, header, rows)
    print(("{:>12}" * len(header)).format(*header))
    for row in rows:
        print(("{:>12.4g}" * len(row)).format(*row))
    return 0


def cmd_validate_lln(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    w, proc, mu = cfg.build_win(), cfg.build_process(), cfg.build_mu()
    two_n, s = cfg.require("two_n"), cfg.require("s")
    env = draw_environment(mu, two_n, s, cfg.require("seed"))
    results = run_replicas(env, proc, w, cfg.require("replicas"),
                           mode="focal", threads=cfg.threads)
    mean_frac = float(wins_focal_array(results).mean()) / two_n
    target = ell_fn(w, marginal_measure(proc), mu, s, cfg.tol)
    gap = abs(mean_frac - target)
    passed = gap <= args.check_tol
    if cfg.out:
        atomic_write_csv(cfg.out,
                         ("mean_win_fraction", "limit", "gap", "tolerance",
                          "passed"),
                         [(mean_frac, target, gap, args.check_tol, passed)])
    print(summary_block("law of large numbers", [
        ("mean win fraction", mean_frac), ("limit ell(s)", target),
        ("gap", gap), ("tolerance", args.check_tol), ("passed", passed)]))
    return 0 if passed else 1


def cmd_validate_clt(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    w, proc, mu = cfg.build_win(), cfg.build_process(), cfg.build_mu()
    two_n, s = cfg.require("two_n"), cfg.require("s")
    env = draw_environment(mu, two_n, s, cfg.require("seed"))
    rep = limit_report(w, proc, mu, s, min(cfg.tol, 1e-8))
    report = clt_check_wins(env, proc, w, cfg.require("replicas"), rep,
                            tol=min(cfg.tol, 1e-6), threads=cfg.threads,
                            var_tol=args.var_tol)
    _emit_report(report, cfg.out, "central limit theorem (win count)")
    return 0 if report.passed else 1


def cmd_validate_gsum(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    w, proc, mu = cfg.build_win(), cfg.build_process(), cfg.build_mu()
    two_n, s = cfg.require("two_n"), cfg.require("s")
    seed = cfg.require("seed")
    strengths = np.asarray(
        sample(mu, substream(seed, "strengths"), size=two_n - 1))
    k = Kernel(w, marginal_measure(proc))
    tol = min(cfg.tol, 1e-8)

    def g(x: float, u: float) -> float:
        return F_s(k, s, x, u, tol / 4)

    report = clt_check_gsum(g, proc, mu, strengths, cfg.require("replicas"),
                            seed, tol=tol, var_tol=args.var_tol)
    _emit_report(report, cfg.out, "central limit theorem (centred g-sum)")
    return 0 if report.passed else 1


def cmd_ranking(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    w, proc, mu = cfg.build_win(), cfg.build_process(), cfg.build_mu()
    two_n = cfg.require("two_n")
    strengths, curve = ranking_curve(mu, two_n, proc, w,
                                     cfg.require("replicas"),
                                     cfg.require("seed"), threads=cfg.threads)
    nu = marginal_measure(proc)
    predicted = np.array([
        ell_fn(w, nu, mu, inverse_cdf(mu, (i + 0.5) / two_n), cfg.tol)
        for i in range(two_n)])
    if cfg.out:
        atomic_write_csv(
            cfg.out,
            ("rank_index", "strength", "mean_win_fraction", "predicted_ell"),
            [(i, float(strengths[i]), float(curve[i]), float(predicted[i]))
             for i in range(two_n)])
    sup_dist = float(np.max(np.abs(curve - predicted)))
    passed = True if args.check_tol is None else sup_dist <= args.check_tol
    print(summary_block("ranking curve", [
        ("two_n", two_n), ("replicas", cfg.require("replicas")),
        ("sup distance to limit", sup_dist),
        ("tolerance", "none" if args.check_tol is None else args.check_tol),
        ("passed", passed)]))
    return 0 if passed else 1


def cmd_mixing(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    proc = cfg.build_process()
    rows = []
    for n in range(1, args.max_lag + 1):
        a = alpha(proc, n)
        bound = (alpha_tail_bound(proc, n)
                 if isinstance(proc, MarkovTilting) else 0.0)
        rows.append((n, a, bound))
    if cfg.out:
        atomic_write_csv(cfg.out, ("n", "alpha", "tail_bound"), rows)
    print(summary_block("strong mixing coefficients", [
        (f"alpha({n})", a) for n, a, _ in rows[:10]]))
    return 0


def cmd_blocks(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    proc = cfg.build_process()
    try:
        grid = sorted({int(v) for v in args.n_grid.split(",")})
    except ValueError as exc:
        raise ConfigError(f"--n-grid must be comma-separated integers "
                          f"({exc})") from exc
    if not grid or grid[0] < 16:
        raise ConfigError("--n-grid entries must be >= 16")
    report = check_block_conditions(lambda n: alpha(proc, n),
                                    default_block_schedule(), grid)
    if cfg.out:
        atomic_write_csv(
            cfg.out,
            ("n", "p", "q", "q_over_p", "p_over_n", "n_alpha_q_over_p",
             "weighted_alpha_sum"),
            [(r.n, r.p, r.q, r.q_over_p, r.p_over_n, r.n_alpha_q_over_p,
              r.weighted_alpha_sum) for r in report.rows])
    items = []
    for name, dec, halv in zip(report.QUANTITIES, report.decreasing,
                               report.halved):
        items.append((f"{name} decreasing", dec))
        items.append((f"{name} halved over grid", halv))
    items.append(("monotone from n", report.valid_from))
    print(summary_block("block-size conditions", items))
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    data = ranking_data_from_csv(args.data, args.matches_per_team,
                                 args.points_per_win)
    spec = default_fit_spec(n_starts=args.starts, max_evals=args.max_evals)
    result = fit(data, spec)
    observed = data.win_fractions()
    inst = result.instance(spec)
    predicted = predicted_curve(inst, len(observed), spec.curve_tol)
    baseline = linear_baseline_rmse(data)
    if cfg.out:
        atomic_write_csv(
            cfg.out, ("rank_index", "observed", "predicted"),
            [(i, float(observed[i]), float(predicted[i]))
             for i in range(len(observed))])
    items = [(k, v) for k, v in result.params.items()]
    items += [("rmse", result.rmse), ("linear baseline rmse", baseline),
              ("beats baseline", result.rmse < baseline)]
    text = summary_block("fitted parameters", items)
    print(text)
    if args.params_out:
        atomic_write_text(args.params_out, text + "\n")
    return 0


def cmd_shift_deviation(args) -> int:
    cfg = _load(args)
    _echo(cfg, args)
    mu = cfg.build_mu() if cfg.mu is not None else UniformInterval(0.0, 1.0)
    two_n = cfg.two_n if cfg.two_n is not None else 20_000
    seed = cfg.require("seed")
    bound = args.bound_a
    rows = []
    passes = 0
    for run in range(args.runs):
        xs = np.asarray(sample(mu, substream(seed, "shift-dev", run),
                               size=two_n))
        rep = product_shift_deviation(xs, bound)
        passes += rep.concentration_ok
        rows.append((run, rep.sup_dev, rep.eps_star, rep.concentration_ok))
    if cfg.out:
        atomic_write_csv(cfg.out, ("run", "sup_dev", "eps_star", "ok"), rows)
    rate = passes / args.runs
    passed = rate >= args.min_pass_rate
    print(summary_block("uniform shift deviation (h = x*y)", [
        ("sample size", two_n), ("runs", args.runs), ("pass rate", rate),
        ("required rate", args.min_pass_rate),
        ("eps_star", rows[0][2]), ("passed", passed)]))
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiltleague",
        description="Round-robin league simulation with stationary strength "
                    "tilts: limits, fluctuations, ranking curves.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run league replicas")
    _common_flags(p)
    p.add_argument("--export-calendar", help="write the calendar CSV here")
    p.add_argument("--save-env", help="write the strength vector CSV here")
    p.add_argument("--env", help="load the strength vector from this CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analytic-curve",
                       help="limit quantities on an s grid")
    _common_flags(p)
    p.add_argument("--s-min", dest="s_min", type=float)
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--s-step", dest="s_step", type=float)
    p.set_defaults(func=cmd_analytic_curve)

    p = sub.add_parser("validate-lln", help="replica mean vs limit ell(s)")
    _common_flags(p)
    p.add_argument("--check-tol", type=float, default=0.02)
    p.set_defaults(func=cmd_validate_lln)

    p = sub.add_parser("validate-clt",
                       help="standardized win count vs normal limit")
    _common_flags(p)
    p.add_argument("--var-tol", type=float, default=0.1)
    p.set_defaults(func=cmd_validate_clt)

    p = sub.add_parser("validate-gsum",
                       help="centred g-sum vs its long-run variance")
    _common_flags(p)
    p.add_argument("--var-tol", type=float, default=0.1)
    p.set_defaults(func=cmd_validate_gsum)

    p = sub.add_parser("ranking", help="full-league mean ranking curve")
    _common_flags(p)
    p.add_argument("--check-tol", type=float, default=None,
                   help="fail if sup distance to the limit exceeds this")
    p.set_defaults(func=cmd_ranking)

    p = sub.add_parser("mixing", help="strong mixing coefficients alpha(n)")
    _common_flags(p)
    p.add_argument("--max-lag", type=int, default=20)
    p.set_defaults(func=cmd_mixing)

    p = sub.add_parser("blocks", help="audit the block-size conditions")
    _common_flags(p)
    p.add_argument("--n-grid", default="1000,10000,100000,1000000")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("calibrate", help="fit the model to a ranking curve")
    _common_flags(p)
    p.add_argument("--data", required=True,
                   help="CSV with a mean_points column, best team first")
    p.add_argument("--matches-per-team", type=int, required=True)
    p.add_argument("--points-per-win", type=float, default=2.0)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--max-evals", type=int, default=300)
    p.add_argument("--params-out", help="write the fitted block here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("shift-deviation",
                       help="uniform lagged-mean concentration check")
    _common_flags(p)
    p.add_argument("--bound-a", type=float, default=1.0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--min-pass-rate", type=float, default=0.99)
    p.set_defaults(func=cmd_shift_deviation)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AnalyticError, QuadratureError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
