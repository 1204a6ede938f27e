"""Command-line front end: ingestion, identification, estimation, refutation.

Exit codes: 0 on success, 1 on usage errors (bad or missing flags), 2 on
runtime/data errors, each with a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources

from .dataset import AnalysisSpec, EstimatorKind, load_csv, text_histogram
from .errors import CausalKitError
from .estimators import DEFAULT_N_STRATA, bootstrap_ci, estimate_ate
from .graph import parse_graph
from .refuters import RefuterKind, run_refuter
from .report import (
    render_interpretation,
    render_json,
    render_refutation_block,
    render_text_report,
)
from .scm import CohortConfig, student_cohort_generator

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage problems; this CLI reserves 2 for
    # runtime errors and uses 1 for bad flags.
    def error(self, message: str) -> "argparse.NoReturn":  # type: ignore[name-defined]
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def student_cohort_graph_text() -> str:
    """Source text of the graph bundled for the synthetic cohort."""
    return (
        resources.files("causalkit")
        .joinpath("data/student_cohort_graph.txt")
        .read_text(encoding="utf-8")
    )


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--graph", required=True, help="causal graph source file")
    p.add_argument("--treatment", required=True, help="treatment column/node")
    p.add_argument("--outcome", required=True, help="outcome column/node")
    p.add_argument(
        "--estimator",
        choices=[k.value for k in EstimatorKind],
        default=EstimatorKind.PROPENSITY_SCORE_MATCHING.value,
    )
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--n-strata", type=int, default=DEFAULT_N_STRATA)
    p.add_argument("--n-jobs", type=int, default=1, help="replicate thread count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causalkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="identify and estimate an effect")
    _add_analysis_flags(analyze)
    analyze.add_argument("--ci", action="store_true", help="bootstrap a CI")
    analyze.add_argument("--n-boot", type=int, default=200)
    analyze.add_argument("--level", type=float, default=0.95)

    refute = sub.add_parser("refute", help="stress-test an estimate")
    _add_analysis_flags(refute)
    refute.add_argument(
        "--refuter",
        action="append",
        required=True,
        choices=[k.value for k in RefuterKind],
        help="repeatable; refuters run in the order given",
    )
    refute.add_argument("--n-sims", type=int, default=100)
    refute.add_argument("--fraction", type=float, default=0.8)

    simulate = sub.add_parser("simulate", help="write a synthetic student cohort")
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--seed", type=int, default=42)
    simulate.add_argument("--out", required=True, help="CSV output path")
    simulate.add_argument("--confounding", type=float, default=1.0)
    simulate.add_argument(
        "--graph-out", default=None, help="also write the cohort graph here"
    )

    histogram = sub.add_parser("histogram", help="text histogram of a column")
    histogram.add_argument("--data", required=True)
    histogram.add_argument("--column", required=True)
    histogram.add_argument("--bins", type=int, default=10)

    return parser


def _load_analysis(args: argparse.Namespace):
    table, _ = load_csv(args.data)
    with open(args.graph, "r", encoding="utf-8") as fh:
        graph = parse_graph(fh.read())
    estimand = graph.identify_backdoor(args.treatment, args.outcome)
    spec = AnalysisSpec(
        treatment=args.treatment,
        outcome=args.outcome,
        confounders=list(estimand.adjustment_set),
        estimator=EstimatorKind(args.estimator),
        seed=args.seed,
    )
    return table, spec, estimand


def run_analyze(args: argparse.Namespace) -> str:
    table, spec, estimand = _load_analysis(args)
    if args.ci:
        estimate = bootstrap_ci(
            table,
            spec,
            estimand,
            n_boot=args.n_boot,
            level=args.level,
            n_strata=args.n_strata,
            n_jobs=args.n_jobs,
        )
    else:
        estimate = estimate_ate(table, spec, estimand, n_strata=args.n_strata)
    if args.format == "json":
        return render_json(estimand, estimate)
    return render_text_report(estimand, estimate) + "\n" + render_interpretation(
        estimand, estimate
    )


def run_refute(args: argparse.Namespace) -> str:
    table, spec, estimand = _load_analysis(args)
    results = [
        run_refuter(
            kind,
            table,
            spec,
            estimand,
            n_sims=args.n_sims,
            fraction=args.fraction,
            n_jobs=args.n_jobs,
            n_strata=args.n_strata,
        )
        for kind in args.refuter
    ]
    if args.format == "json":
        estimate = estimate_ate(table, spec, estimand, n_strata=args.n_strata)
        return render_json(estimand, estimate, results)
    blocks = [render_refutation_block(spec.estimator, r) for r in results]
    return "\n".join(blocks)


def run_simulate(args: argparse.Namespace) -> str:
    cfg = CohortConfig(
        n_students=args.n, seed=args.seed, confounding_strength=args.confounding
    )
    table, _ = student_cohort_generator(cfg)
    table.to_csv(args.out)
    if args.graph_out:
        with open(args.graph_out, "w", encoding="utf-8") as fh:
            fh.write(student_cohort_graph_text())
    return f"wrote {table.n_rows} rows to {args.out}\n"


def run_histogram(args: argparse.Namespace) -> str:
    table, _ = load_csv(args.data)
    return text_histogram(table, args.column, args.bins)


_COMMANDS = {
    "analyze": run_analyze,
    "refute": run_refute,
    "simulate": run_simulate,
    "histogram": run_histogram,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        output = _COMMANDS[args.command](args)
    except (CausalKitError, OSError, ValueError) as exc:
        print(f"causalkit: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
