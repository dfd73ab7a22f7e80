"""Command-line interface.

Subcommands: validate, resolve, indices, empirical, fit, netstats,
evaluate, synth.  Reports are written to the output directory as CSV (or
JSON with --format json) plus rendered figures; the paths of all written
files go to stdout, progress messages to stderr only.  Runs with
identical inputs, flags and seed produce byte-identical outputs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 resource limit
(exact enumeration above the cap with the Monte Carlo fallback disabled
via --mc-runs 0).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import figures
from .dataset import Dataset, load_dataset, save_dataset
from .empirical import (
    MIN_USER_VOTES,
    ResolvedVoting,
    exercised_power,
    potential_power,
    power_correlation,
    power_curves,
    resolve_dataset,
    reversal_analysis,
    user_approval_rates,
)
from .errors import (
    DataFormatError,
    DegenerateInputError,
    InvalidInputError,
    ResourceLimitError,
    SeparationError,
)
from .evaluation import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_BETA0,
    DEFAULT_BETA1,
    MODEL_NAMES,
    ModelSpec,
    benchmark,
    indices_table,
)
from .fitting import fit_beta_mle, fit_logistic, fit_power_law
from .game import DEFAULT_ENUMERATION_CAP, as_quorum
from .indices import ApprovalModel, DEFAULT_MC_RUNS
from .netstats import stats_time_series
from .synth import SynthConfig, generate_synthetic


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise _UsageError(message)


def _progress(args, message: str) -> None:
    if args.progress:
        print(message, file=sys.stderr)


def _jsonable(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool):
        return int(value)
    if hasattr(value, "isoformat"):
        return value.isoformat()
    return value


def write_table(out_dir: Path, name: str, fieldnames: list[str],
                rows: list[dict], fmt: str) -> Path:
    """Write one report table as CSV or JSON; values match across formats."""
    rows = [{k: _jsonable(r.get(k)) for k in fieldnames} for r in rows]
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / f"{name}.json"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
    else:
        path = out_dir / f"{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fieldnames)
            for r in rows:
                writer.writerow(["" if r[k] is None else r[k] for k in fieldnames])
    return path


def _emit(paths: list[Path]) -> None:
    for p in paths:
        print(p)


def _load(args) -> Dataset:
    _progress(args, f"loading dataset from {args.data}")
    return load_dataset(args.data)


def _models(args) -> list[ModelSpec]:
    names = [m.strip() for m in args.models.split(",") if m.strip()]
    return [ModelSpec(name, alpha=args.alpha, beta=args.beta,
                      beta0=args.beta0, beta1=args.beta1) for name in names]


# ---------------------------------------------------------------------------
# subcommands

def _cmd_validate(args) -> list[Path]:
    ds = _load(args)
    rows = [
        {"table": "users", "rows": len(ds.users)},
        {"table": "areas", "rows": len(ds.areas)},
        {"table": "issues", "rows": len(ds.issues)},
        {"table": "initiatives", "rows": len(ds.initiatives)},
        {"table": "ballots", "rows": len(ds.ballots)},
        {"table": "delegations", "rows": len(ds.delegations)},
    ]
    return [write_table(args.out, "validation", ["table", "rows"], rows, args.format)]


def _cmd_resolve(args) -> list[Path]:
    ds = _load(args)
    resolved = resolve_dataset(ds)
    weight_rows = []
    unresolved_rows = []
    for bs in resolved.ballots:
        for v in bs.votes:
            weight_rows.append({"issue_id": bs.issue_id,
                                "initiative_id": bs.initiative_id,
                                "voter_id": v.voter,
                                "effective_weight": v.weight})
        for voter in sorted(resolved.unresolved[bs.initiative_id]):
            unresolved_rows.append({"issue_id": bs.issue_id,
                                    "initiative_id": bs.initiative_id,
                                    "voter_id": voter})
    return [
        write_table(args.out, "effective_weights",
                    ["issue_id", "initiative_id", "voter_id", "effective_weight"],
                    weight_rows, args.format),
        write_table(args.out, "unresolved",
                    ["issue_id", "initiative_id", "voter_id"],
                    unresolved_rows, args.format),
    ]


def _cmd_indices(args) -> list[Path]:
    ds = _load(args)
    resolved = resolve_dataset(ds)
    rows = indices_table(resolved, _models(args), mc_runs=args.mc_runs,
                         seed=args.seed, cap=args.cap)
    paths = [write_table(args.out, "indices",
                         ["initiative_id", "issue_id", "voter_id", "weight",
                          "model", "value", "estimator"], rows, args.format)]
    if not args.no_figures and rows:
        paths.append(figures.indices_figure(rows, args.out / "indices.png"))
    return paths


def _cmd_empirical(args) -> list[Path]:
    ds = _load(args)
    resolved = resolve_dataset(ds)
    _progress(args, f"measuring power over {len(resolved.ballots)} initiatives")
    curves = power_curves(resolved, max_weight=args.max_weight,
                          include_over_cap=args.include_over_cap,
                          ignore_author_delegations=args.ignore_author_delegations)
    curve_rows = []
    weights = sorted(set(curves.potential.values) | set(curves.exercised.values))
    for w in weights:
        pn = curves.potential.counts.get(w, 0)
        en = curves.exercised.counts.get(w, 0)
        curve_rows.append({
            "weight": w,
            "potential_mean": curves.potential.values.get(w),
            "potential_n": pn,
            "exercised_mean": curves.exercised.values.get(w),
            "exercised_n": en,
            "low_support": int(pn < 30),
        })
    learning_rows = [{
        "k": p.k,
        "direct_rate": p.direct_rate, "direct_n": p.direct_n,
        "effective_rate": p.effective_rate, "effective_n": p.effective_n,
        "low_support": int(p.direct_n < 30),
    } for p in curves.learning]
    approval_rows = [{
        "weight": b.weight,
        "approval_per_vote": b.approval_per_vote,
        "approval_per_voter": b.approval_per_voter,
        "agreement_rate": b.agreement,
        "votes": b.votes,
        "voters": b.voters,
        "low_support": int(b.votes < 30),
    } for b in curves.approval_by_weight]

    pot_all, exe_all = [], []
    for bs in resolved.ballots:
        for v in bs.votes:
            pot_all.append(potential_power(bs, v.voter))
            exe_all.append(exercised_power(bs, v.voter))
    corr = power_correlation(resolved, seed=args.seed)
    mean_pot = sum(pot_all) / len(pot_all) if pot_all else None
    mean_exe = sum(exe_all) / len(exe_all) if exe_all else None
    summary_rows = [{
        "initiatives": len(resolved.ballots),
        "votes": len(pot_all),
        "reversal_unchanged": reversal_analysis(resolved),
        "mean_potential_power": mean_pot,
        "mean_exercised_power": mean_exe,
        "exercised_to_potential_ratio":
            (mean_exe / mean_pot) if mean_pot else None,
        "spearman_rho": corr[0] if corr else None,
        "p_value": corr[1] if corr else None,
    }]

    paths = [
        write_table(args.out, "power_curves",
                    ["weight", "potential_mean", "potential_n", "exercised_mean",
                     "exercised_n", "low_support"], curve_rows, args.format),
        write_table(args.out, "learning_curve",
                    ["k", "direct_rate", "direct_n", "effective_rate",
                     "effective_n", "low_support"], learning_rows, args.format),
        write_table(args.out, "approval_by_weight",
                    ["weight", "approval_per_vote", "approval_per_voter",
                     "agreement_rate", "votes", "voters", "low_support"],
                    approval_rows, args.format),
        write_table(args.out, "empirical_summary",
                    ["initiatives", "votes", "reversal_unchanged",
                     "mean_potential_power", "mean_exercised_power",
                     "exercised_to_potential_ratio", "spearman_rho", "p_value"],
                    summary_rows, args.format),
    ]
    if not args.no_figures:
        paths.append(figures.power_curves_figure(curves, args.out / "power_curves.png"))
        if curves.learning:
            paths.append(figures.learning_curve_figure(
                curves, args.out / "learning_curve.png"))
        if curves.approval_by_weight:
            paths.append(figures.approval_by_weight_figure(
                curves, args.out / "approval_by_weight.png"))
    return paths


def _cmd_fit(args) -> list[Path]:
    ds = _load(args)
    resolved = resolve_dataset(ds)
    if args.kind == "beta":
        rates, below_min = user_approval_rates(resolved, min_votes=args.min_votes)
        fit = fit_beta_mle(rates.values())
        rows = [{
            "alpha": fit.alpha, "beta": fit.beta, "mean": fit.mean,
            "samples": fit.samples, "excluded_extreme": fit.excluded,
            "excluded_below_min_votes": len(below_min),
            "log_likelihood": fit.log_likelihood,
            "iterations": fit.iterations, "converged": fit.converged,
        }]
        paths = [write_table(args.out, "fit_beta", list(rows[0]), rows, args.format)]
        if not args.no_figures:
            paths.append(figures.beta_fit_figure(
                fit, sorted(rates.values()), args.out / "fit_beta.png"))
        return paths
    if args.kind == "logistic":
        rates, _ = user_approval_rates(resolved, min_votes=1)
        full_approval = {u for u, r in rates.items() if r == 1.0}
        obs = []
        for bs in resolved.ballots:
            for v in bs.votes:
                if v.voter not in full_approval:
                    obs.append((v.weight, v.decision))
        fit = fit_logistic(obs)
        rows = [{
            "beta0": fit.beta0, "beta1": fit.beta1,
            "observations": fit.observations, "converged": fit.converged,
            "excluded_full_approval_users": len(full_approval),
            "p_at_weight_1": fit.predict(1), "p_at_weight_100": fit.predict(100),
        }]
        paths = [write_table(args.out, "fit_logistic", list(rows[0]), rows, args.format)]
        if not args.no_figures:
            by_weight: dict[int, list[int]] = {}
            for w, d in obs:
                by_weight.setdefault(w, []).append(d)
            means = {w: sum(ds_) / len(ds_) for w, ds_ in by_weight.items()}
            paths.append(figures.logistic_fit_figure(
                fit, means, args.out / "fit_logistic.png"))
        return paths
    # power law
    samples = _power_law_samples(ds, resolved, args.target)
    fit = fit_power_law(samples, xmin=args.xmin)
    rows = [{
        "target": args.target, "exponent": fit.exponent, "xmin": fit.xmin,
        "samples": fit.samples, "median": fit.median,
    }]
    paths = [write_table(args.out, "fit_powerlaw", list(rows[0]), rows, args.format)]
    if not args.no_figures:
        paths.append(figures.power_law_figure(
            fit, samples, args.out / "fit_powerlaw.png"))
    return paths


def _power_law_samples(ds: Dataset, resolved: ResolvedVoting, target: str) -> list[int]:
    if target == "activity":
        return [len({e.issue_id for e in history})
                for history in resolved.direct_histories.values()]
    if target == "indegree":
        counts: dict[str, int] = {}
        for e in ds.delegations:
            counts[e.trustee] = counts.get(e.trustee, 0) + 1
        return sorted(counts.values())
    # per-vote effective weights
    return [v.weight for bs in resolved.ballots for v in bs.votes]


def _cmd_netstats(args) -> list[Path]:
    ds = _load(args)
    rows = stats_time_series(ds.delegations,
                             positive_indegree_only=args.gini_positive_only)
    table = [{
        "date": r.date.date().isoformat(),
        "edges_added": r.edges_added,
        "edges_removed": r.edges_removed,
        "active_delegations": r.active_delegations,
        "indegree_gini": r.indegree_gini,
        "reciprocity": r.reciprocity,
        "clustering": r.clustering,
        "largest_component": r.largest_component,
    } for r in rows]
    paths = [write_table(args.out, "netstats_daily",
                         ["date", "edges_added", "edges_removed",
                          "active_delegations", "indegree_gini", "reciprocity",
                          "clustering", "largest_component"], table, args.format)]
    if not args.no_figures and rows:
        paths.append(figures.netstats_figure(rows, args.out / "netstats.png"))
    return paths


def _cmd_evaluate(args) -> list[Path]:
    ds = _load(args)
    resolved = resolve_dataset(ds)
    _progress(args, f"evaluating {args.models} on {len(resolved.ballots)} initiatives")
    report = benchmark(resolved, _models(args), mc_runs=args.mc_runs,
                       seed=args.seed, cap=args.cap, max_weight=args.max_weight,
                       fingerprint=ds.fingerprint())
    rows = [{
        "model": r.model,
        "squared_error": r.squared_error,
        "log_likelihood": r.log_likelihood,
        "perplexity": r.perplexity,
        "perplexity_per_observation": r.perplexity_per_observation,
        "clamped": r.clamped,
        "buckets": r.buckets,
    } for r in report.rows]
    meta = [{
        "initiatives": report.initiatives,
        "observations": report.observations,
        "mc_runs": report.mc_runs,
        "seed": report.seed,
        "dataset_fingerprint": report.fingerprint,
    }]
    paths = [
        write_table(args.out, "evaluation",
                    ["model", "squared_error", "log_likelihood", "perplexity",
                     "perplexity_per_observation", "clamped", "buckets"],
                    rows, args.format),
        write_table(args.out, "evaluation_meta", list(meta[0]), meta, args.format),
    ]
    if not args.no_figures and report.rows:
        paths.append(figures.evaluation_figure(report, args.out / "evaluation.png"))
    return paths


def _cmd_synth(args) -> list[Path]:
    if args.model in ("beta-independent", "beta-homogeneous"):
        model = ApprovalModel(args.model, alpha=args.alpha, beta=args.beta)
    elif args.model == "logistic":
        model = ApprovalModel.logistic(args.beta0, args.beta1)
    else:
        model = ApprovalModel(args.model)
    config = SynthConfig(
        users=args.users, initiatives=args.initiatives,
        quorum=as_quorum(args.quorum), model=model,
        indegree_exponent=args.indegree_exponent,
        participation_exponent=args.participation_exponent,
        seed=args.seed, areas=args.areas,
        delegations_per_user=args.delegations_per_user, days=args.days)
    _progress(args, f"generating {config.users} users / {config.initiatives} initiatives")
    ds = generate_synthetic(config)
    return save_dataset(ds, args.out)


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="liquidpower",
                     description="Delegative-democracy voting power analysis")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for all randomised steps (default 0)")
    common.add_argument("--mc-runs", type=int, default=DEFAULT_MC_RUNS,
                        help="Monte Carlo runs per estimate; 0 disables the "
                             "fallback above the enumeration cap (default 1000000)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (default: current directory)")
    common.add_argument("--progress", action="store_true",
                        help="log progress to stderr")
    common.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
    common.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP,
                        help="exact-enumeration cap on voters per game")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="load and validate a dataset directory")
    p.add_argument("data")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("resolve", parents=[common],
                       help="per-issue effective voting weights")
    p.add_argument("data")
    p.set_defaults(func=_cmd_resolve)

    p = sub.add_parser("indices", parents=[common],
                       help="per-initiative power index table")
    p.add_argument("data")
    _add_model_options(p)
    p.set_defaults(func=_cmd_indices)

    p = sub.add_parser("empirical", parents=[common],
                       help="power curves, approval/agreement, learning, reversal")
    p.add_argument("data")
    p.add_argument("--max-weight", type=int, default=100)
    p.add_argument("--include-over-cap", action="store_true",
                   help="keep votes with weight above --max-weight in curves")
    p.add_argument("--ignore-author-delegations", action="store_true",
                   help="bucket initiative authors at weight 1 in approval tables")
    p.set_defaults(func=_cmd_empirical)

    p = sub.add_parser("fit", parents=[common],
                       help="fit beta / logistic / power-law models")
    p.add_argument("kind", choices=("beta", "logistic", "powerlaw"))
    p.add_argument("data")
    p.add_argument("--min-votes", type=int, default=MIN_USER_VOTES,
                   help="minimum votes for per-user aggregates (default 10)")
    p.add_argument("--target", choices=("activity", "indegree", "weights"),
                   default="activity", help="power-law sample source")
    p.add_argument("--xmin", type=int, default=1)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("netstats", parents=[common],
                       help="daily delegation-network statistics")
    p.add_argument("data")
    p.add_argument("--gini-positive-only", action="store_true",
                   help="Gini over nodes with at least one incoming delegation")
    p.set_defaults(func=_cmd_netstats)

    p = sub.add_parser("evaluate", parents=[common],
                       help="squared error and perplexity per power index")
    p.add_argument("data")
    p.add_argument("--max-weight", type=int, default=100)
    _add_model_options(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", parents=[common],
                       help="generate a synthetic dataset")
    p.add_argument("--users", type=int, default=400)
    p.add_argument("--initiatives", type=int, default=600)
    p.add_argument("--quorum", default="2/3")
    p.add_argument("--model", choices=("uniform-independent", "uniform-homogeneous",
                                       "beta-independent", "beta-homogeneous",
                                       "logistic"),
                   default="beta-homogeneous")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--beta0", type=float, default=DEFAULT_BETA0)
    p.add_argument("--beta1", type=float, default=DEFAULT_BETA1)
    p.add_argument("--indegree-exponent", type=float, default=1.38)
    p.add_argument("--participation-exponent", type=float, default=1.87)
    p.add_argument("--delegations-per-user", type=float, default=1.08)
    p.add_argument("--areas", type=int, default=4)
    p.add_argument("--days", type=int, default=730)
    p.set_defaults(func=_cmd_synth)
    return parser


def _add_model_options(p) -> None:
    p.add_argument("--models", default=",".join(MODEL_NAMES),
                   help="comma-separated: " + ",".join(MODEL_NAMES))
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--beta0", type=float, default=DEFAULT_BETA0)
    p.add_argument("--beta1", type=float, default=DEFAULT_BETA1)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        _emit(args.func(args))
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (DataFormatError, InvalidInputError, DegenerateInputError,
            SeparationError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
