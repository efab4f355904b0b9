"""Command-line front end.

Subcommands: solve, cond, bounds, gen, validate, table. Human-readable
output uses 3 significant digits; files written via --out keep full
precision. Exit codes: 0 success, 2 parse/shape/flag problems, 3 no unique
solution, 4 not-applicable or ill-conditioned gap, 5 internal numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import bounds as bounds_mod
from . import exact
from .core import check_uniqueness, residual_diagnostics, solve_tls, svd_bundle
from .errors import (
    IllConditionedGap,
    InvalidAlpha,
    NotApplicable,
    NoUniqueSolution,
    ParseError,
    ShapeError,
    TlsCondError,
    TrivialProblem,
    VerdictFailure,
)
from .generators import KammNagyConfig, generate_ab_alpha, kamm_nagy_problem
from .perturb import monte_carlo_validate
from .problem import ReportDocument, load_problem, save_problem, save_report

TABLE1_COLUMNS = (
    "label",
    "m",
    "ratio_sigma_n",
    "ratio_sigma_hat_n",
    "kappa_rel",
    "kappa2_lower_rel",
    "kappa2_upper_rel",
    "kappa1_upper_rel",
    "bhm",
)

TABLE2_COLUMNS = (
    "label",
    "m",
    "n",
    "alpha",
    "ratio_sigma_n",
    "ratio_sigma_hat_n",
    "kappa_rel",
    "kappa2_lower_rel",
    "kappa2_upper_rel",
    "kappa1_upper_rel",
    "bhm",
)


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def _bound_row(problem) -> dict:
    """Shared per-problem pipeline for the table subcommand."""
    bundle = svd_bundle(problem)
    solution = solve_tls(problem, bundle)
    work = exact.build_spectral_work(problem, bundle, solution)
    report = bounds_mod.bounds_report(problem, bundle, solution, work)
    failed = [fam for fam, ok in report.sandwich_verdicts.items() if not ok]
    if failed:
        raise VerdictFailure(
            f"{problem.label}: families {failed} fail to enclose kappa="
            f"{report.kappa_reference:.6e}"
        )
    diag = check_uniqueness(bundle)
    rel = report.relative_pairs()
    kappa_rel = (
        None if report.rel_scale is None else report.kappa_reference * report.rel_scale
    )
    return {
        "ratio_sigma_n": diag.ratio_sigma_n,
        "ratio_sigma_hat_n": diag.ratio_sigma_hat_n,
        "kappa_rel": kappa_rel,
        "kappa2_lower_rel": rel["kappa2_lower"].lower,
        "kappa2_upper_rel": rel["kappa2_upper"].upper,
        "kappa1_upper_rel": rel["kappa1"].upper,
        "bhm": rel["bhm"].upper,
    }


def _median_rows(draws: list[dict]) -> dict:
    keys = draws[0].keys()
    out = {}
    for key in keys:
        values = [d[key] for d in draws]
        out[key] = None if any(v is None for v in values) else float(np.median(values))
    return out


def run_table_example1(
    m_list,
    seed: int = 0,
    n_seeds: int = 1,
    omega: int = 8,
    spread: float = 1.25,
    gamma: float = 1e-3,
) -> ReportDocument:
    """Deblurring sweep: one row per m, medians over n_seeds draws."""
    rows = []
    for idx, m in enumerate(m_list):
        draws = []
        for k in range(n_seeds):
            config = KammNagyConfig(
                m=m, omega=omega, spread=spread, gamma=gamma,
                seed=_derive_seed(seed, idx, k),
            )
            draws.append(_bound_row(kamm_nagy_problem(config)))
        rows.append({"label": f"deblur_m{m}", "m": float(m), **_median_rows(draws)})
    metadata = {
        "table": "example1",
        "seed": seed,
        "n_seeds": n_seeds,
        "omega": omega,
        "spread": spread,
        "gamma": gamma,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    return ReportDocument(columns=TABLE1_COLUMNS, rows=tuple(rows), metadata=metadata)


def run_table_example2(
    shape_list,
    alpha_list,
    seed: int = 0,
    n_seeds: int = 1,
) -> ReportDocument:
    """Alpha-controlled sweep: one row per (shape, alpha)."""
    rows = []
    for sidx, (m, n) in enumerate(shape_list):
        for aidx, alpha in enumerate(alpha_list):
            draws = []
            for k in range(n_seeds):
                problem = generate_ab_alpha(m, n, alpha, _derive_seed(seed, sidx, aidx, k))
                draws.append(_bound_row(problem))
            rows.append(
                {
                    "label": f"alpha_m{m}_n{n}_a{alpha:g}",
                    "m": float(m),
                    "n": float(n),
                    "alpha": float(alpha),
                    **_median_rows(draws),
                }
            )
    metadata = {
        "table": "example2",
        "seed": seed,
        "n_seeds": n_seeds,
        "shapes": [list(s) for s in shape_list],
        "alphas": list(alpha_list),
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    return ReportDocument(columns=TABLE2_COLUMNS, rows=tuple(rows), metadata=metadata)


def _fmt3(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, str):
        return value
    return f"{value:.2e}"


def _print_report(report: ReportDocument) -> None:
    widths = [max(len(c), 10) for c in report.columns]
    print("  ".join(c.ljust(w) for c, w in zip(report.columns, widths)))
    for row in report.rows:
        print("  ".join(_fmt3(row[c]).ljust(w) for c, w in zip(report.columns, widths)))


def _cmd_solve(args) -> int:
    problem = load_problem(args.input, args.format)
    bundle = svd_bundle(problem)
    solution = solve_tls(problem, bundle)
    report = residual_diagnostics(problem, bundle, solution)
    diag = check_uniqueness(bundle)
    print(f"m={problem.m} n={problem.n} label={problem.label}")
    print(f"alpha={solution.alpha:.6e}  ||x||={solution.norm_x:.6e}  rel_gap={diag.rel_gap:.3e}")
    if problem.n <= 10:
        print("x =", " ".join(f"{v:.12e}" for v in solution.x))
    ids = report.identities
    print(
        f"identity residuals: optimal={ids.optimal_value:.2e} "
        f"gradient={ids.gradient:.2e} singular_vector={ids.singular_vector:.2e}"
    )
    if report.gap_chain_holds is None:
        print("gap enclosure chain: n/a (x = 0)")
    else:
        print(
            f"gap enclosure chain: {report.gap_chain_lower:.3e} <= {report.gap_chain_mid:.3e}"
            f" <= {report.gap_chain_upper:.3e} -> {'ok' if report.gap_chain_holds else 'VIOLATED'}"
        )
    return 0


_METHOD_ALIASES = {"kron": "kronecker"}


def _cmd_cond(args) -> int:
    problem = load_problem(args.input, args.format)
    bundle = svd_bundle(problem)
    solution = solve_tls(problem, bundle)
    methods = (
        ["kronecker", "cholesky", "svd", "baboulin"]
        if args.method == "all"
        else [_METHOD_ALIASES.get(args.method, args.method)]
    )
    if "kronecker" in methods:
        work = exact.build_k_matrix(problem, bundle, solution)
    else:
        work = exact.build_spectral_work(problem, bundle, solution)
    runners = {
        "kronecker": lambda: exact.kron_condition(work, problem, solution),
        "cholesky": lambda: exact.cholesky_condition(work, problem, bundle, solution),
        "svd": lambda: exact.svd_condition(work, bundle, solution),
        "baboulin": lambda: exact.baboulin_condition(work, bundle, solution),
    }
    failure = None
    for method in methods:
        try:
            est = runners[method]()
        except TlsCondError as exc:
            print(f"{method:10s} failed: {exc}")
            failure = failure or exc
            continue
        rel = "n/a" if est.kappa_rel is None else f"{est.kappa_rel:.6e}"
        flags = f"  [{'; '.join(est.warnings)}]" if est.warnings else ""
        print(f"{method:10s} kappa_abs={est.kappa_abs:.6e}  kappa_rel={rel}{flags}")
    if failure is not None:
        raise failure
    return 0


def _cmd_bounds(args) -> int:
    problem = load_problem(args.input, args.format)
    bundle = svd_bundle(problem)
    solution = solve_tls(problem, bundle)
    work = exact.build_spectral_work(problem, bundle, solution)
    report = bounds_mod.bounds_report(problem, bundle, solution, work)
    print(f"kappa_reference (svd formula) = {report.kappa_reference:.6e}")
    print(f"alpha={report.alpha:.6e}  rho={report.rho:.4f}")
    for family, pair in report.pairs.items():
        verdict = report.sandwich_verdicts.get(family)
        status = "" if verdict is None else ("  encloses" if verdict else "  VIOLATED")
        note = f"  ({pair.applicability_note})" if pair.applicability_note else ""
        print(
            f"{family:16s} lower={_fmt3(pair.lower):>10s} upper={_fmt3(pair.upper):>10s}"
            f"{status}{note}"
        )
    if not all(report.sandwich_verdicts.values()):
        raise VerdictFailure("a certified bound failed to enclose kappa")
    return 0


def _cmd_gen(args) -> int:
    if args.kind == "alpha":
        if args.n is None or args.alpha is None:
            raise InvalidAlpha("--kind alpha requires --n and --alpha")
        problem = generate_ab_alpha(args.m, args.n, args.alpha, args.seed)
    else:
        config = KammNagyConfig(
            m=args.m, omega=args.omega, spread=args.spread, gamma=args.gamma, seed=args.seed
        )
        problem = kamm_nagy_problem(config)
    save_problem(problem, args.out, args.format)
    print(f"wrote {problem.label} (m={problem.m}, n={problem.n}) to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    problem = load_problem(args.input, args.format)
    summary = monte_carlo_validate(
        problem, trials=args.trials, t=args.step, seed=args.seed
    )
    print(
        f"kappa={summary.kappa_reference:.6e}  step={summary.step:.3e}  "
        f"trials={summary.trials}"
    )
    max_obs = "n/a" if summary.max_observed_ratio is None else f"{summary.max_observed_ratio:.6e}"
    print(f"max random ratio = {max_obs}")
    print(f"worst-direction ratio = {summary.worst_direction_ratio:.6e}")
    for t, remainder in summary.convergence_slopes:
        print(f"  t={t:.3e}  first-order remainder={remainder:.3e}")
    print(f"sound={summary.sound}  attained={summary.attained}")
    if not summary.sound:
        raise VerdictFailure("observed sensitivity exceeds the condition number")
    return 0


def _cmd_table(args) -> int:
    if args.example == 1:
        report = run_table_example1(args.m_list, seed=args.seed, n_seeds=args.seeds)
    else:
        shapes = [tuple(int(v) for v in s.split("x")) for s in args.shapes]
        report = run_table_example2(shapes, args.alphas, seed=args.seed, n_seeds=args.seeds)
    _print_report(report)
    if args.out:
        save_report(report, args.out, "json" if args.json else None)
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tlscond",
        description="TLS solver, exact condition numbers, bounds, and validation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("--input", required=True, help="problem file ([A b] array)")
        p.add_argument("--format", choices=["mm", "csv"], default=None)

    p_solve = sub.add_parser("solve", help="solve the TLS problem and check identities")
    add_input(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_cond = sub.add_parser("cond", help="exact condition numbers")
    add_input(p_cond)
    p_cond.add_argument(
        "--method",
        choices=["kron", "cholesky", "svd", "baboulin", "all"],
        default="all",
    )
    p_cond.set_defaults(func=_cmd_cond)

    p_bounds = sub.add_parser("bounds", help="lower/upper bounds and verdicts")
    add_input(p_bounds)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_gen = sub.add_parser("gen", help="generate a test problem")
    p_gen.add_argument("--kind", choices=["alpha", "kammnagy"], required=True)
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--n", type=int, default=None)
    p_gen.add_argument("--alpha", type=float, default=None)
    p_gen.add_argument("--omega", type=int, default=8)
    p_gen.add_argument("--spread", type=float, default=1.25)
    p_gen.add_argument("--gamma", type=float, default=1e-3)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--format", choices=["mm", "csv"], default=None)
    p_gen.set_defaults(func=_cmd_gen)

    p_val = sub.add_parser("validate", help="perturbation validation")
    add_input(p_val)
    p_val.add_argument("--trials", type=int, default=100)
    p_val.add_argument("--step", type=float, default=None,
                       help="absolute step (default 1e-8 * ||[A b]||_F)")
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=_cmd_validate)

    p_table = sub.add_parser("table", help="reproduce the experiment table layouts")
    p_table.add_argument("--example", type=int, choices=[1, 2], required=True)
    p_table.add_argument("--seeds", type=int, default=1, help="median over this many draws")
    p_table.add_argument("--seed", type=int, default=0)
    p_table.add_argument("--m-list", type=int, nargs="+", default=[100, 300, 500],
                         dest="m_list", help="example 1 sizes")
    p_table.add_argument("--shapes", nargs="+", default=["200x150"],
                         help="example 2 shapes as MxN")
    p_table.add_argument("--alphas", type=float, nargs="+", default=[1e-2, 1e-3, 1e-5],
                         help="example 2 alpha targets")
    p_table.add_argument("--out", default=None)
    p_table.add_argument("--json", action="store_true", help="force JSON output")
    p_table.set_defaults(func=_cmd_table)
    return parser


_EXIT_CODES = (
    ((ParseError, ShapeError, InvalidAlpha, OSError), 2),
    ((NoUniqueSolution, TrivialProblem), 3),
    ((NotApplicable, IllConditionedGap), 4),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TlsCondError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for classes, code in _EXIT_CODES:
            if isinstance(exc, classes):
                return code
        return 5


if __name__ == "__main__":
    sys.exit(main())
