"""causalkit: causal DAGs, backdoor identification, ATE estimation by
matching/stratification/regression, and refutation testing, verified
against structural-model simulations with known ground truth."""

from .dataset import (
    AnalysisSpec,
    EstimatorKind,
    Table,
    binarize_by_mean,
    load_csv,
    standardize_columns,
    text_histogram,
)
from .estimators import (
    Estimate,
    bootstrap_ci,
    distance_matching_ate,
    estimate_ate,
    linear_regression_ate,
    psm_ate,
    stratification_ate,
)
from .graph import CausalGraph, Estimand, parse_graph, render_graph
from .propensity import (
    LogisticModel,
    fit_logistic,
    logistic_gradient,
    predict_propensity,
)
from .refuters import (
    RefutationResult,
    RefuterKind,
    refutation_p_value,
    refute_bootstrap,
    refute_data_subset,
    refute_placebo_treatment,
    refute_random_common_cause,
    run_refuter,
)
from .scm import (
    CohortConfig,
    ScmSpec,
    ScmVariable,
    parse_scm_spec,
    render_scm_spec,
    sample_dataset,
    student_cohort_generator,
    true_ate_mc,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisSpec",
    "CausalGraph",
    "CohortConfig",
    "Estimand",
    "Estimate",
    "EstimatorKind",
    "LogisticModel",
    "RefutationResult",
    "RefuterKind",
    "ScmSpec",
    "ScmVariable",
    "Table",
    "binarize_by_mean",
    "bootstrap_ci",
    "distance_matching_ate",
    "estimate_ate",
    "fit_logistic",
    "linear_regression_ate",
    "load_csv",
    "logistic_gradient",
    "parse_graph",
    "parse_scm_spec",
    "predict_propensity",
    "psm_ate",
    "refutation_p_value",
    "refute_bootstrap",
    "refute_data_subset",
    "refute_placebo_treatment",
    "refute_random_common_cause",
    "render_graph",
    "render_scm_spec",
    "run_refuter",
    "sample_dataset",
    "standardize_columns",
    "stratification_ate",
    "student_cohort_generator",
    "text_histogram",
    "true_ate_mc",
]
